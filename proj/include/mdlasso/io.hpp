#ifndef MDLASSO_IO_HPP
#define MDLASSO_IO_HPP

#include <filesystem>
#include <string>

#include "mdlasso/types.hpp"

namespace mdlasso::io {

// CSV with the literal token NA marking missing cells.  Observed values are
// printed with max_digits10 precision so a write/read round trip reproduces
// them exactly.
std::string format_masked_csv(const MaskedMatrix& masked);
void write_masked_csv(const MaskedMatrix& masked, const std::filesystem::path& path);
MaskedMatrix read_masked_csv(const std::filesystem::path& path);

std::string format_dense_csv(const MatrixXd& m);
void write_dense_csv(const MatrixXd& m, const std::filesystem::path& path);
MatrixXd read_dense_csv(const std::filesystem::path& path);

// One value per line.
void write_vector(const VectorXd& v, const std::filesystem::path& path);
VectorXd read_vector(const std::filesystem::path& path);

// Edge list with a "p=<count>" header, one "i j" pair (0-based) per line.
std::string format_graph(const SparsityGraph& graph);
void write_graph(const SparsityGraph& graph, const std::filesystem::path& path);
SparsityGraph read_graph(const std::filesystem::path& path);

// ModelTruth sidecar (JSON).
void write_truth(const ModelTruth& truth, const std::filesystem::path& path);
ModelTruth read_truth(const std::filesystem::path& path);

}  // namespace mdlasso::io

#endif
