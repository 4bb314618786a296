#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "cpa/config.hpp"
#include "cpa/rng.hpp"

namespace cpa {

// Sparse frame schedule: per slot, the ascending list of active users and
// the pilot each one picked. Inactive users are simply absent; with
// p_a ~ 1e-3 a dense K x Delta activity table would be almost all zeros.
struct PilotSchedule {
  std::int64_t K = 0;
  int tau = 0;
  struct Slot {
    std::vector<std::uint32_t> users;   // ascending
    std::vector<std::uint16_t> pilots;  // pilots[i] belongs to users[i]
  };
  std::vector<Slot> slots;

  // Pilot index of user k in slot n, or -1 if inactive there.
  int pilot_of(std::size_t n, std::uint32_t k) const {
    const auto& s = slots[n];
    auto it = std::lower_bound(s.users.begin(), s.users.end(), k);
    if (it == s.users.end() || *it != k) return -1;
    return s.pilots[static_cast<std::size_t>(it - s.users.begin())];
  }
};

// Draw a frame schedule. Activation skips through the user range with
// geometric gaps, so cost scales with the number of activations, not K.
inline PilotSchedule draw_schedule(const SystemConfig& cfg, Rng& rng) {
  PilotSchedule sched;
  sched.K = cfg.K;
  sched.tau = cfg.tau;
  sched.slots.resize(static_cast<std::size_t>(cfg.Delta));
  const double log1mp = (cfg.p_a < 1.0) ? std::log1p(-cfg.p_a) : 0.0;
  for (auto& slot : sched.slots) {
    if (cfg.p_a >= 1.0) {
      slot.users.resize(static_cast<std::size_t>(cfg.K));
      for (std::int64_t k = 0; k < cfg.K; ++k) slot.users[static_cast<std::size_t>(k)] = static_cast<std::uint32_t>(k);
    } else if (cfg.p_a > 0.0) {
      double pos = -1.0;
      for (;;) {
        pos += std::floor(std::log(rng.uniform()) / log1mp) + 1.0;
        if (pos >= static_cast<double>(cfg.K)) break;
        slot.users.push_back(static_cast<std::uint32_t>(pos));
      }
    }
    slot.pilots.resize(slot.users.size());
    for (auto& p : slot.pilots) p = static_cast<std::uint16_t>(rng.uniform_int(static_cast<std::uint64_t>(cfg.tau)));
  }
  return sched;
}

// Histograms of realized degrees. First: factor side, count of colliders on
// each (slot, pilot) resource, one entry per resource including empty ones.
// Second: variable side, number of activations per user, one entry per user
// including never-active ones. Index = degree, value = count.
inline std::pair<std::vector<std::uint64_t>, std::vector<std::uint64_t>> empirical_degrees(
    const PilotSchedule& sched) {
  std::vector<std::uint64_t> factor_hist(1, 0);
  std::vector<std::uint64_t> user_deg(static_cast<std::size_t>(sched.K), 0);
  std::vector<std::uint64_t> node_deg(static_cast<std::size_t>(sched.tau), 0);
  auto bump = [](std::vector<std::uint64_t>& h, std::uint64_t d) {
    if (h.size() <= d) h.resize(d + 1, 0);
    ++h[d];
  };
  for (const auto& slot : sched.slots) {
    std::fill(node_deg.begin(), node_deg.end(), 0);
    for (std::size_t i = 0; i < slot.users.size(); ++i) {
      ++node_deg[slot.pilots[i]];
      ++user_deg[slot.users[i]];
    }
    for (int j = 0; j < sched.tau; ++j) bump(factor_hist, node_deg[static_cast<std::size_t>(j)]);
  }
  std::vector<std::uint64_t> variable_hist(1, 0);
  for (auto d : user_deg) bump(variable_hist, d);
  return {std::move(factor_hist), std::move(variable_hist)};
}

}  // namespace cpa
