#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cpa/config.hpp"
#include "cpa/phy.hpp"

namespace cpa {

// Returned when the interference-plus-noise term vanishes (noiseless
// orthogonal singletons); large enough to pass any sane threshold, finite
// so downstream arithmetic stays well-defined.
inline constexpr double kInfiniteSinr = 1e30;

// phi = Y^pu s_j^H / tau. For a lone collider this is h_k plus noise of
// variance sigma2/tau per entry; with several colliders it is their sum.
inline VecC ls_estimate(const MatC& Ypu, const RowC& pilot) {
  return (Ypu * pilot.adjoint()) / static_cast<double>(pilot.cols());
}

// f = phi^H Y^u: one combined data row per (slot, pilot) resource.
inline RowC matched_filter(const VecC& phi, const MatC& Yu) { return phi.adjoint() * Yu; }

inline double power_sum(const VecC& phi) { return phi.squaredNorm(); }

// Zero-forcing normalization of the matched filter; only meaningful when a
// single user owns the estimate.
inline RowC zf_estimate(const VecC& phi, const MatC& Yu) {
  const double p = phi.squaredNorm();
  if (p == 0.0) throw std::invalid_argument("zf_estimate: zero channel estimate");
  return (phi.adjoint() * Yu) / p;
}

// Scalar downlink channel estimate from the precoded pilot section.
inline cd downlink_concat_channel(const RowC& ypd, const RowC& pilot) {
  return (ypd * pilot.adjoint())(0, 0) / static_cast<double>(pilot.cols());
}

// One (slot, pilot) resource as the decoder sees it.
//
// a[i] is the matched-filter gain phi^H h of member i; each member also
// accrues interference from every *other* active user in the slot, whose
// pilots are not orthogonal to phi in finite snapshots. Those cross-pilot
// contributions are folded into the scalar cross2 = sum |phi^H h_l|^2 over
// non-member slot actives: the receiver never learns those per-user gains,
// so they are never cancellable, even after such a user is decoded from a
// different slot.
//
// g tracks the residual power estimate; successive cancellations subtract
// estimates, not truths, so g can drift negative. It must not be clamped:
// the drift is exactly the estimation error the SINR model accounts for.
struct FactorNode {
  std::uint32_t slot = 0;
  std::uint16_t pilot = 0;
  std::vector<std::uint32_t> members;  // users on this resource, schedule order
  std::vector<cd> a;                   // matched gains, aligned with members
  std::vector<double> ghat;            // cancellation value used per member (0 = still in)
  std::vector<std::uint8_t> in_resid;  // 1 while the member is undecoded
  double cross2 = 0.0;                 // uncancellable same-slot, other-pilot power
  double phi2 = 0.0;                   // ||phi||^2, fixed at estimation time
  double g = 0.0;                      // residual power estimate, mutated by SIC
  bool tested = false;                 // a node is SINR-tested at most once
  // Full-signal extras; empty in the virtual backend.
  VecC phi;
  RowC f;

  std::size_t residual_degree() const {
    std::size_t d = 0;
    for (auto v : in_resid) d += v;
    return d;
  }

  int original_degree() const { return static_cast<int>(members.size()); }
};

// Post-cancellation SINR for decoding member t at this node. Cancelled
// members leave residue |a - ghat|^2; undecoded members and cross-pilot
// actives interfere at full power; noise enters through ||phi||^2 sigma2.
inline double node_sinr(const FactorNode& node, std::size_t t, double sigma2) {
  double den = node.cross2 + node.phi2 * sigma2;
  for (std::size_t i = 0; i < node.members.size(); ++i) {
    if (i == t) continue;
    if (node.in_resid[i]) {
      den += std::norm(node.a[i]);
    } else {
      den += std::norm(node.a[i] - cd(node.ghat[i], 0.0));
    }
  }
  const double num = std::norm(node.a[t]);
  if (den <= 0.0) return kInfiniteSinr;
  const double s = num / den;
  return (s > kInfiniteSinr) ? kInfiniteSinr : s;
}

// Decodability test: achievable rate at the measured SINR must cover the
// b*R information bits per data symbol, i.e. SINR >= 2^(bR) - 1 (threshold
// widened by any configured margin).
inline bool decodable(const FactorNode& node, std::size_t t, const SystemConfig& cfg) {
  return node_sinr(node, t, cfg.sigma2) >= cfg.sinr_threshold();
}

}  // namespace cpa
