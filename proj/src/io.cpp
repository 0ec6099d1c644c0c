#include "mdlasso/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace mdlasso::io {

namespace {

// Shortest representation that round-trips through strtod.
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    char shorter[32];
    for (int prec = 1; prec < 17; ++prec) {
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& token, const std::filesystem::path& path) {
  const std::string t = trim(token);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw Error(Err::UnreadableInput,
                "bad numeric cell '" + token + "' in " + path.string());
  return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Err::UnreadableInput, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

void write_file(const std::string& content, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Err::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(Err::IoError, "short write to " + path.string());
}

}  // namespace

std::string format_masked_csv(const MaskedMatrix& masked) {
  std::string out;
  for (Eigen::Index i = 0; i < masked.rows(); ++i) {
    for (Eigen::Index a = 0; a < masked.cols(); ++a) {
      if (a) out += ',';
      out += masked.observed(i, a) ? format_double(masked.at(i, a)) : "NA";
    }
    out += '\n';
  }
  return out;
}

void write_masked_csv(const MaskedMatrix& masked, const std::filesystem::path& path) {
  write_file(format_masked_csv(masked), path);
}

MaskedMatrix read_masked_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty())
    throw Error(Err::UnreadableInput, path.string() + " is empty");
  const auto first = split_csv_line(lines[0]);
  const auto n = static_cast<Eigen::Index>(lines.size());
  const auto p = static_cast<Eigen::Index>(first.size());
  MatrixXd values = MatrixXd::Zero(n, p);
  MaskXX mask(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto cells = split_csv_line(lines[static_cast<std::size_t>(i)]);
    if (static_cast<Eigen::Index>(cells.size()) != p)
      throw Error(Err::UnreadableInput,
                  "row " + std::to_string(i) + " of " + path.string() +
                      " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(p));
    for (Eigen::Index a = 0; a < p; ++a) {
      const std::string cell = trim(cells[static_cast<std::size_t>(a)]);
      if (cell == "NA") {
        mask(i, a) = false;
      } else {
        mask(i, a) = true;
        values(i, a) = parse_double(cell, path);
      }
    }
  }
  MaskedMatrix out(std::move(values), std::move(mask));
  validate(out);
  return out;
}

std::string format_dense_csv(const MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index a = 0; a < m.cols(); ++a) {
      if (a) out += ',';
      out += format_double(m(i, a));
    }
    out += '\n';
  }
  return out;
}

void write_dense_csv(const MatrixXd& m, const std::filesystem::path& path) {
  write_file(format_dense_csv(m), path);
}

MatrixXd read_dense_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty())
    throw Error(Err::UnreadableInput, path.string() + " is empty");
  const auto p = static_cast<Eigen::Index>(split_csv_line(lines[0]).size());
  MatrixXd m(static_cast<Eigen::Index>(lines.size()), p);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto cells = split_csv_line(lines[i]);
    if (static_cast<Eigen::Index>(cells.size()) != p)
      throw Error(Err::UnreadableInput,
                  "ragged row " + std::to_string(i) + " in " + path.string());
    for (Eigen::Index a = 0; a < p; ++a)
      m(static_cast<Eigen::Index>(i), a) = parse_double(cells[static_cast<std::size_t>(a)], path);
  }
  return m;
}

void write_vector(const VectorXd& v, const std::filesystem::path& path) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += format_double(v(i));
    out += '\n';
  }
  write_file(out, path);
}

VectorXd read_vector(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  VectorXd v(static_cast<Eigen::Index>(lines.size()));
  for (std::size_t i = 0; i < lines.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = parse_double(lines[i], path);
  return v;
}

std::string format_graph(const SparsityGraph& graph) {
  std::string out = "p=" + std::to_string(graph.p) + "\n";
  for (int u = 0; u < graph.p; ++u)
    for (int v : graph.adjacency[static_cast<std::size_t>(u)])
      if (u < v) out += std::to_string(u) + " " + std::to_string(v) + "\n";
  return out;
}

void write_graph(const SparsityGraph& graph, const std::filesystem::path& path) {
  write_file(format_graph(graph), path);
}

SparsityGraph read_graph(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0].rfind("p=", 0) != 0)
    throw Error(Err::UnreadableInput,
                path.string() + " must start with a 'p=<count>' header");
  int p = 0;
  try {
    p = std::stoi(lines[0].substr(2));
  } catch (const std::exception&) {
    throw Error(Err::UnreadableInput, "bad 'p=' header in " + path.string());
  }
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream ss(lines[i]);
    int u = 0, v = 0;
    if (!(ss >> u >> v))
      throw Error(Err::UnreadableInput,
                  "bad edge line '" + lines[i] + "' in " + path.string());
    edges.emplace_back(u, v);
  }
  return SparsityGraph::from_edges(p, edges);
}

void write_truth(const ModelTruth& truth, const std::filesystem::path& path) {
  nlohmann::json j;
  j["beta0"] = std::vector<double>(truth.beta0.data(),
                                   truth.beta0.data() + truth.beta0.size());
  j["s"] = truth.s;
  j["R"] = truth.R;
  j["sigma"] = truth.sigma;
  j["sigma_x"] = truth.sigma_x;
  j["alpha"] = truth.alpha;
  j["covariance_kind"] = covariance_kind_name(truth.covariance_kind);
  j["phi"] = truth.phi;
  j["bandwidth"] = truth.bandwidth;
  write_file(j.dump(2) + "\n", path);
}

ModelTruth read_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::UnreadableInput, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(Err::UnreadableInput,
                "bad JSON in " + path.string() + ": " + e.what());
  }
  ModelTruth truth;
  const auto beta = j.at("beta0").get<std::vector<double>>();
  truth.beta0 = Eigen::Map<const VectorXd>(beta.data(),
                                           static_cast<Eigen::Index>(beta.size()));
  truth.s = j.at("s").get<int>();
  truth.R = j.at("R").get<double>();
  truth.sigma = j.at("sigma").get<double>();
  truth.sigma_x = j.at("sigma_x").get<double>();
  truth.alpha = j.at("alpha").get<double>();
  const auto kind = j.at("covariance_kind").get<std::string>();
  if (kind == "identity") truth.covariance_kind = CovarianceKind::Identity;
  else if (kind == "ar1") truth.covariance_kind = CovarianceKind::Ar1;
  else if (kind == "banded") truth.covariance_kind = CovarianceKind::BandedPrecision;
  else throw Error(Err::UnreadableInput, "unknown covariance kind " + kind);
  truth.phi = j.at("phi").get<double>();
  truth.bandwidth = j.at("bandwidth").get<int>();
  return truth;
}

}  // namespace mdlasso::io
