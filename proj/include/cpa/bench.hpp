#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cpa/aot.hpp"
#include "cpa/config.hpp"
#include "cpa/pi.hpp"

namespace cpa {

struct ReportRow {
  std::string scheme;  // "cpa", "aloha", "smm"
  int M = 0;
  int tau = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double R = 0.0;
  double p_d = 0.0;
  double gamma = 0.0;
  double gamma_stderr = 0.0;
  std::string backend;  // "aot" or "sim"
  std::string normalization_mode;
  std::uint64_t seed = 0;
};

struct ThroughputReport {
  std::vector<ReportRow> rows;
};

// scheme,M,tau,alpha,beta,R,p_d,gamma,gamma_stderr,backend,normalization_mode,seed
void emit_csv(const ThroughputReport& report, const std::string& path);
ThroughputReport read_report_csv(const std::string& path);

// Long-form plot data: figure,series,x,y
struct PlotPoint {
  std::string figure;
  std::string series;
  double x = 0.0;
  double y = 0.0;
};
void emit_plotdata(const std::vector<PlotPoint>& points, const std::string& path);

// Deterministic work splitter: fn(i) runs once for each i < n, results must
// be written to slot i of a preallocated buffer so the outcome is invariant
// to thread count and scheduling.
void parallel_for(std::uint64_t n, int threads, const std::function<void(std::uint64_t)>& fn);

struct SweepSpec {
  SystemConfig base;          // K, M, L, sigma2, R, b, seed; alpha/beta/tau come from grids
  std::vector<double> alphas = default_alpha_grid();
  std::vector<double> betas = default_beta_grid();
  std::vector<int> taus = {4};
  std::string backend = "aot";  // "aot" | "sim"
  std::uint64_t trials = 16;    // sim frames per grid point
  std::uint64_t pi_trials = 10000;
  std::string pi_cache;
  Normalization norm = Normalization::PerChannelUse;
  int threads = 1;
  bool ideal_pi = false;  // skip estimation, pi = 1 everywhere

  static std::vector<double> default_alpha_grid();  // 0.6 : 0.05 : 2.0
  static std::vector<double> default_beta_grid();   // 0.25 : 0.25 : 4.0
  static std::vector<int> default_tau_grid();       // {2,4,8,16,32}
};

// Evaluate gamma over the (alpha, beta, tau) grid with the chosen backend.
// The analysis backend reports the requested alpha; the simulation backend
// reports the attained alpha after Delta rounds to an integer slot count.
ThroughputReport sweep(const SweepSpec& spec);

struct OptimizeResult {
  ReportRow best;
  ThroughputReport surface;
};

// Argmax of gamma over the sweep grid; exact gamma ties resolve to the
// smallest alpha, then beta, then tau.
OptimizeResult optimize(const SweepSpec& spec);

// One row per (scheme, M, R): this protocol at its optimized operating
// point, the uncoordinated baseline at its optimal activation, and the
// fully scheduled reference, all under the same physics.
ThroughputReport compare_schemes(const SweepSpec& spec, const std::vector<int>& Ms,
                                 const std::vector<double>& Rs);

// Canned figure datasets; files land in outdir as fig<N>.csv and
// fig<N>_report.csv where applicable.
void fig_recipe(int figure, const SweepSpec& spec, const std::string& outdir);

}  // namespace cpa
