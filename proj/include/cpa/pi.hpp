#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpa/aot.hpp"
#include "cpa/config.hpp"

namespace cpa {

struct PiEstimate {
  int degree = 0;
  double value = 0.0;
  double se = 0.0;  // sqrt(pi (1-pi) / trials)
  std::uint64_t trials = 0;
};

// Estimated decode-probability table plus per-degree uncertainty.
// Index alignment follows PiTable: entry 0 is unused padding.
struct PiTableEstimate {
  PiTable table;
  std::vector<double> se;
  std::vector<std::uint64_t> trials;
  std::string mode;  // "micro" or "frame"

  PiEstimate at(int degree) const {
    const auto j = static_cast<std::size_t>(degree);
    if (degree < 1 || j >= table.values.size()) return {degree, 0.0, 0.0, 0};
    return {degree, table.values[j], se[j], trials[j]};
  }
};

// One decode-probability table request. The micro model draws a degree-j
// collision in isolation: j member channels plus pilot noise form the
// estimate, the j-1 non-target members are cancelled with independent
// power estimates, and the surrounding slot contributes Poisson(
// (tau-1) beta) cross-pilot interferers (or exactly fixed_cross of them
// when fixed_cross >= 0, used by the single-pilot baseline).
struct PiRequest {
  int tau = 4;
  double beta = 1.0;
  double R = 1.0;
  double fixed_cross = -1.0;
  int max_degree = -1;  // -1: sized so the collision ensemble's mass is covered
};

struct PiMicroParams {
  int M = 400;
  double sigma2 = 0.1;
  int b = 2;
  double margin_db = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t trials = 10000;
};

inline PiMicroParams micro_params(const SystemConfig& cfg, std::uint64_t trials = 10000) {
  return {cfg.M, cfg.sigma2, cfg.b, cfg.margin_db, cfg.seed, trials};
}

// Batch estimator. All requests share one set of per-(degree, trial)
// channel draws, so adding requests is nearly free and any sub-batch
// reproduces the same numbers as the full batch. cache_dir, when nonempty,
// is consulted per request and populated on miss.
std::vector<PiTableEstimate> pi_micro_tables(const PiMicroParams& params,
                                             const std::vector<PiRequest>& requests,
                                             const std::string& cache_dir = "");

// Single-degree estimate for cfg's own operating point; bit-identical to
// the corresponding row of a batch table.
PiEstimate pi_micro(int degree, const SystemConfig& cfg, std::uint64_t trials = 10000);

// In-situ estimate: run full frames and tally the one SINR test each node
// receives, bucketed by original node degree. Degrees never observed have
// trials == 0 and value NaN.
PiTableEstimate pi_frame(const SystemConfig& cfg, std::uint64_t trials);

// degree,estimate,stderr,trials,mode
void write_pi_csv(const std::string& path, const PiTableEstimate& est);
PiTableEstimate read_pi_csv(const std::string& path);

// Canonical cache key; doubles are rendered exactly so near-equal
// parameters never alias.
std::string pi_cache_key(const PiMicroParams& params, const PiRequest& req);

}  // namespace cpa
