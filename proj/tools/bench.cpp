// Wall-clock comparison of the OpenMP kernels against their serial
// reference paths: row-parallel imputation and trial-parallel sweeps.

#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mdlasso/experiments.hpp"
#include "mdlasso/impute.hpp"
#include "mdlasso/synth.hpp"

using namespace mdlasso;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

template <typename F>
double time_it(const char* label, F&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const double elapsed = seconds_since(start);
  std::printf("  %-28s %8.3f s\n", label, elapsed);
  return elapsed;
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
  const int n = quick ? 400 : 2000;
  const int p = quick ? 200 : 600;
  const double alpha = 0.7;

#ifdef _OPENMP
  std::printf("OpenMP max threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP\n");
#endif

  std::printf("AR(1) imputation, n=%d p=%d alpha=%.2f\n", n, p, alpha);
  const MatrixXd X_ar = synth::gen_ar1(n, p, 0.4, RngSeed{11});
  const MaskedMatrix Z_ar = synth::apply_mcar(X_ar, alpha, RngSeed{12});
  ImputedMatrix serial_ar, parallel_ar;
  const double t_ar_serial = time_it("ar1_impute_serial", [&] {
    serial_ar = impute::ar1_impute_serial(Z_ar, impute::Ar1Params{0.4, false});
  });
  const double t_ar_parallel = time_it("ar1_impute (OpenMP)", [&] {
    parallel_ar = impute::ar1_impute(Z_ar, impute::Ar1Params{0.4, false});
  });
  const bool ar_match = serial_ar.data == parallel_ar.data;
  std::printf("  identical results: %s, speedup %.2fx\n", ar_match ? "yes" : "NO",
              t_ar_serial / std::max(t_ar_parallel, 1e-9));

  const int pg = quick ? 120 : 300;
  std::printf("graphical imputation, n=%d p=%d alpha=%.2f\n", n, pg, alpha);
  const auto design = synth::gen_banded_precision(n, pg, 0.25, 3, RngSeed{13});
  const MaskedMatrix Z_g = synth::apply_mcar(design.X, alpha, RngSeed{14});
  ImputedMatrix serial_g, parallel_g;
  const double t_g_serial = time_it("graphical_impute_serial", [&] {
    serial_g = impute::graphical_impute_serial(Z_g, design.graph, design.sigma);
  });
  const double t_g_parallel = time_it("graphical_impute (OpenMP)", [&] {
    parallel_g = impute::graphical_impute(Z_g, design.graph, design.sigma);
  });
  const bool g_match = serial_g.data == parallel_g.data;
  std::printf("  identical results: %s, speedup %.2fx\n", g_match ? "yes" : "NO",
              t_g_serial / std::max(t_g_parallel, 1e-9));

  experiments::ExperimentConfig cfg;
  cfg.n = quick ? 200 : 400;
  cfg.p = quick ? 240 : 480;
  cfg.trials = quick ? 4 : 20;
  cfg.alpha_grid = {0.7, 0.9};
  std::printf("fig1 sweep, n=%d p=%d trials=%d\n", cfg.n, cfg.p, cfg.trials);
  std::vector<experiments::SweepRow> rows_serial, rows_parallel;
  cfg.threads = 1;
  const double t_e_serial =
      time_it("trials serial", [&] { rows_serial = experiments::run_fig1(cfg); });
  cfg.threads = 0;
  const double t_e_parallel =
      time_it("trials OpenMP", [&] { rows_parallel = experiments::run_fig1(cfg); });
  const bool e_match =
      experiments::format_dat(rows_serial) == experiments::format_dat(rows_parallel);
  std::printf("  identical results: %s, speedup %.2fx\n", e_match ? "yes" : "NO",
              t_e_serial / std::max(t_e_parallel, 1e-9));

  return (ar_match && g_match && e_match) ? 0 : 1;
}
