#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "cpa/config.hpp"
#include "cpa/rng.hpp"
#include "cpa/schedule.hpp"

namespace cpa {

using cd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using RowC = Eigen::RowVectorXcd;

// tau x tau DFT pilot book. Row j is pilot s_j with unit-modulus entries,
// ||s_j||^2 = tau, and S * S^H = tau * I.
inline MatC make_pilots(int tau) {
  MatC S(tau, tau);
  for (int j = 0; j < tau; ++j)
    for (int t = 0; t < tau; ++t) {
      const double ang = -2.0 * M_PI * static_cast<double>(j) * static_cast<double>(t) /
                         static_cast<double>(tau);
      S(j, t) = cd(std::cos(ang), std::sin(ang));
    }
  return S;
}

// Per-slot channel matrices, one column per *active* user in schedule order.
// Channels of silent users are never observed by any receiver path, so they
// are not drawn; this also keeps the draw sequence identical between the
// full and virtual signal backends.
struct ChannelRealization {
  std::vector<MatC> slot_channels;  // size Delta; each M x |A_n|
};

inline void fill_cnormal(MatC& A, Rng& rng) {
  for (Eigen::Index c = 0; c < A.cols(); ++c)
    for (Eigen::Index r = 0; r < A.rows(); ++r) A(r, c) = rng.cnormal();
}

// Draw i.i.d. CN(0,1) channels for every activation in the schedule.
// Stream coordinates are (trial, slot): each slot owns a substream, so the
// realization is independent of how other slots are processed.
inline ChannelRealization draw_channels(const SystemConfig& cfg, const PilotSchedule& sched,
                                        std::uint64_t trial) {
  ChannelRealization ch;
  ch.slot_channels.resize(sched.slots.size());
  for (std::size_t n = 0; n < sched.slots.size(); ++n) {
    auto rng = rng_stream(cfg.seed, Stream::Channels, trial, n);
    MatC H(cfg.M, static_cast<Eigen::Index>(sched.slots[n].users.size()));
    fill_cnormal(H, rng);
    ch.slot_channels[n] = std::move(H);
  }
  return ch;
}

// Unit-power QPSK payload symbols, one row vector of length D per user,
// reused verbatim in every slot where that user is active.
struct UserMessages {
  // lazily drawn: symbol row for user k comes from its own substream.
  static RowC draw(const SystemConfig& cfg, std::uint64_t trial, std::uint32_t user) {
    auto rng = rng_stream(cfg.seed, Stream::DataSymbols, trial, user);
    RowC x(cfg.D());
    const double a = 1.0 / std::sqrt(2.0);
    for (int t = 0; t < cfg.D(); ++t) {
      const std::uint64_t bits = rng.next();
      x(t) = cd((bits & 1) ? a : -a, (bits & 2) ? a : -a);
    }
    return x;
  }
};

// Explicit received uplink signals for one slot.
struct SlotSignals {
  MatC Ypu;  // M x tau   pilot section
  MatC Yu;   // M x D     data section
};

// Y^pu = sum_k h_k s_{ik} + Z,  Y^u = sum_k h_k x_k + Z'. Noise entries are
// CN(0, sigma2). Pilot noise and data noise come from separate substreams
// so the virtual backend can draw only what it needs.
inline SlotSignals synth_uplink(const SystemConfig& cfg, const PilotSchedule& sched,
                                const ChannelRealization& ch, const MatC& pilots,
                                std::uint64_t trial, std::size_t n) {
  const auto& slot = sched.slots[n];
  const MatC& H = ch.slot_channels[n];
  SlotSignals sig;
  sig.Ypu = MatC::Zero(cfg.M, cfg.tau);
  sig.Yu = MatC::Zero(cfg.M, cfg.D());
  for (std::size_t i = 0; i < slot.users.size(); ++i) {
    sig.Ypu += H.col(static_cast<Eigen::Index>(i)) * pilots.row(slot.pilots[i]);
    sig.Yu += H.col(static_cast<Eigen::Index>(i)) * UserMessages::draw(cfg, trial, slot.users[i]);
  }
  const double sd = std::sqrt(cfg.sigma2);
  {
    auto rng = rng_stream(cfg.seed, Stream::PilotNoise, trial, n);
    for (Eigen::Index c = 0; c < sig.Ypu.cols(); ++c)
      for (Eigen::Index r = 0; r < sig.Ypu.rows(); ++r) sig.Ypu(r, c) += sd * rng.cnormal();
  }
  {
    auto rng = rng_stream(cfg.seed, Stream::DataNoise, trial, n);
    for (Eigen::Index c = 0; c < sig.Yu.cols(); ++c)
      for (Eigen::Index r = 0; r < sig.Yu.rows(); ++r) sig.Yu(r, c) += sd * rng.cnormal();
  }
  return sig;
}

// Single-antenna downlink as seen by one user: the base station beamforms
// with w, sends pilot s_j then data x; the user sees scalar channel h^T w.
struct DownlinkSignals {
  RowC ypd;  // 1 x tau
  RowC yd;   // 1 x D
};

inline DownlinkSignals synth_downlink(const VecC& h, const VecC& w, const RowC& pilot,
                                      const RowC& xd, double sigma2, Rng& rng) {
  const cd gain = h.transpose() * w;
  DownlinkSignals sig;
  sig.ypd = gain * pilot;
  sig.yd = gain * xd;
  const double sd = std::sqrt(sigma2);
  for (Eigen::Index t = 0; t < sig.ypd.cols(); ++t) sig.ypd(t) += sd * rng.cnormal();
  for (Eigen::Index t = 0; t < sig.yd.cols(); ++t) sig.yd(t) += sd * rng.cnormal();
  return sig;
}

}  // namespace cpa
