#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "cpa/config.hpp"
#include "cpa/rng.hpp"

namespace cpa {

// Per-user downlink scheduling delay under random polling: a user is served
// in a slot with probability p_eff = p_a (1 - p_a/tau)^(K-1) (it must be the
// lone winner of its resource). Delay counts the slots that pass before the
// serving slot, so its support starts at 0 and the mean is (1-p_eff)/p_eff;
// a K=1, p_a=1 system serves immediately with delay 0.
struct DelayModel {
  double p_eff = 0.0;

  double pmf(std::uint64_t delta) const {
    return p_eff * std::pow(1.0 - p_eff, static_cast<double>(delta));
  }

  double mean() const {
    if (p_eff <= 0.0) return std::numeric_limits<double>::infinity();
    return (1.0 - p_eff) / p_eff;
  }
};

inline DelayModel downlink_delay(const SystemConfig& cfg) {
  const double p = cfg.p_a * std::pow(1.0 - cfg.p_a / static_cast<double>(cfg.tau),
                                      static_cast<double>(cfg.K - 1));
  return DelayModel{p};
}

// Empirical mean of the same delay: count losing slots until the first win.
inline double simulate_delay_mean(const SystemConfig& cfg, std::uint64_t trials) {
  const DelayModel m = downlink_delay(cfg);
  if (m.p_eff <= 0.0) return std::numeric_limits<double>::infinity();
  if (m.p_eff >= 1.0) return 0.0;
  auto rng = rng_stream(cfg.seed, Stream::Downlink, 0, 0);
  const double log1mp = std::log1p(-m.p_eff);
  double sum = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t)
    sum += std::floor(std::log(rng.uniform()) / log1mp);
  return sum / static_cast<double>(trials);
}

// Uncoordinated-access optimum: each of the tau resources is a pure
// collision channel, and K p/tau (1 - p/tau)^(K-1) peaks at p = tau/K.
inline double aloha_optimal_pa(const SystemConfig& cfg) {
  return std::min(1.0, static_cast<double>(cfg.tau) / static_cast<double>(cfg.K));
}

// Rate per channel use when only collision-free transmissions survive;
// pi1 is the lone transmitter's decode probability under the slot's
// cross-resource interference.
inline double aloha_throughput(const SystemConfig& cfg, double pi1) {
  const double x = cfg.p_a / static_cast<double>(cfg.tau);
  const double p_singleton =
      static_cast<double>(cfg.K) * x * std::pow(1.0 - x, static_cast<double>(cfg.K - 1));
  return static_cast<double>(cfg.tau) * p_singleton * pi1 * cfg.R *
         static_cast<double>(cfg.D()) / static_cast<double>(cfg.L);
}

// Fully scheduled upper reference: every slot carries exactly tau collision-
// free users, so only the decode probability (with its tau-1 scheduled
// neighbors interfering) discounts the rate.
inline double smm_throughput(const SystemConfig& cfg, double pi1) {
  return static_cast<double>(cfg.tau) * pi1 * cfg.R * static_cast<double>(cfg.D()) /
         static_cast<double>(cfg.L);
}

}  // namespace cpa
