#include "cpa/sic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cpa/phy.hpp"

namespace cpa {

namespace {

// Shared skeleton: create the Delta * tau nodes and the user adjacency.
DecodingGraph make_skeleton(const SystemConfig& cfg, const PilotSchedule& sched) {
  DecodingGraph g;
  g.cfg = cfg;
  g.sched = sched;
  g.nodes.resize(sched.slots.size() * static_cast<std::size_t>(cfg.tau));
  g.user_nodes.resize(static_cast<std::size_t>(cfg.K));
  g.decoded.assign(static_cast<std::size_t>(cfg.K), 0);
  for (std::size_t n = 0; n < sched.slots.size(); ++n) {
    for (int j = 0; j < cfg.tau; ++j) {
      auto& node = g.node_at(n, j);
      node.slot = static_cast<std::uint32_t>(n);
      node.pilot = static_cast<std::uint16_t>(j);
    }
    const auto& slot = sched.slots[n];
    for (std::size_t i = 0; i < slot.users.size(); ++i) {
      auto& node = g.node_at(n, slot.pilots[i]);
      node.members.push_back(slot.users[i]);
      g.user_nodes[slot.users[i]].push_back(
          static_cast<std::uint32_t>(n * static_cast<std::size_t>(cfg.tau) + slot.pilots[i]));
    }
  }
  for (auto& node : g.nodes) {
    node.a.assign(node.members.size(), cd(0.0, 0.0));
    node.ghat.assign(node.members.size(), 0.0);
    node.in_resid.assign(node.members.size(), 1);
  }
  return g;
}

// Fill matched gains, cross-pilot power, and power sums for one slot given
// the estimates phi (M x tau) and the active-user channels H (M x A).
void fill_slot_nodes(DecodingGraph& g, std::size_t n, const MatC& phi_all, const MatC& H) {
  const auto& slot = g.sched.slots[n];
  const int tau = g.cfg.tau;
  for (int j = 0; j < tau; ++j) {
    auto& node = g.node_at(n, j);
    const auto phi = phi_all.col(j);
    node.phi2 = phi.squaredNorm();
    node.g = node.phi2;
    std::size_t mi = 0;
    double cross2 = 0.0;
    for (std::size_t i = 0; i < slot.users.size(); ++i) {
      const cd ai = (phi.adjoint() * H.col(static_cast<Eigen::Index>(i)))(0, 0);
      if (slot.pilots[i] == j) {
        node.a[mi++] = ai;
      } else {
        cross2 += std::norm(ai);
      }
    }
    node.cross2 = cross2;
  }
}

void build_virtual(DecodingGraph& g, std::uint64_t trial) {
  const auto& cfg = g.cfg;
  const MatC S = make_pilots(cfg.tau);
  for (std::size_t n = 0; n < g.sched.slots.size(); ++n) {
    const auto& slot = g.sched.slots[n];
    MatC H(cfg.M, static_cast<Eigen::Index>(slot.users.size()));
    {
      auto rng = rng_stream(cfg.seed, Stream::Channels, trial, n);
      fill_cnormal(H, rng);
    }
    MatC Z(cfg.M, cfg.tau);
    {
      auto rng = rng_stream(cfg.seed, Stream::PilotNoise, trial, n);
      fill_cnormal(Z, rng);
    }
    // phi_j = sum of member channels + Z s_j^H / tau, assembled without
    // ever forming the M x tau received pilot block.
    MatC phi_all = (std::sqrt(cfg.sigma2) / static_cast<double>(cfg.tau)) * (Z * S.adjoint());
    for (std::size_t i = 0; i < slot.users.size(); ++i)
      phi_all.col(slot.pilots[i]) += H.col(static_cast<Eigen::Index>(i));
    fill_slot_nodes(g, n, phi_all, H);
  }
}

void build_full(DecodingGraph& g, std::uint64_t trial) {
  const auto& cfg = g.cfg;
  const MatC S = make_pilots(cfg.tau);
  const ChannelRealization ch = draw_channels(cfg, g.sched, trial);
  for (std::size_t n = 0; n < g.sched.slots.size(); ++n) {
    const SlotSignals sig = synth_uplink(cfg, g.sched, ch, S, trial, n);
    MatC phi_all(cfg.M, cfg.tau);
    for (int j = 0; j < cfg.tau; ++j) phi_all.col(j) = ls_estimate(sig.Ypu, S.row(j));
    fill_slot_nodes(g, n, phi_all, ch.slot_channels[n]);
    for (int j = 0; j < cfg.tau; ++j) {
      auto& node = g.node_at(n, j);
      node.phi = phi_all.col(j);
      node.f = matched_filter(node.phi, sig.Yu);
    }
  }
}

void build_orthogonal(DecodingGraph& g, std::uint64_t trial) {
  const auto& cfg = g.cfg;
  // One power draw per user per frame, fetched lazily in slot-scan order.
  std::vector<double> power(static_cast<std::size_t>(cfg.K), -1.0);
  auto power_of = [&](std::uint32_t k) {
    double& w = power[k];
    if (w < 0.0) {
      auto rng = rng_stream(cfg.seed, Stream::OrthoPower, trial, k);
      w = rng.gamma(static_cast<double>(cfg.M));
    }
    return w;
  };
  for (std::size_t n = 0; n < g.sched.slots.size(); ++n) {
    for (int j = 0; j < cfg.tau; ++j) {
      auto& node = g.node_at(n, j);
      double sum = 0.0;
      for (std::size_t i = 0; i < node.members.size(); ++i) {
        const double w = power_of(node.members[i]);
        node.a[i] = cd(w, 0.0);
        sum += w;
      }
      node.phi2 = sum;
      node.g = sum;
      node.cross2 = 0.0;
    }
  }
}

}  // namespace

DecodingGraph build_graph(const SystemConfig& cfg, const PilotSchedule& sched,
                          std::uint64_t trial) {
  cfg.validate();
  DecodingGraph g = make_skeleton(cfg, sched);
  switch (cfg.mode) {
    case SignalMode::Virtual: build_virtual(g, trial); break;
    case SignalMode::Full: build_full(g, trial); break;
    case SignalMode::Orthogonal: build_orthogonal(g, trial); break;
  }
  return g;
}

void sic_decode(DecodingGraph& graph, DecodingResult& result, const TrialOptions& opts) {
  const auto& cfg = graph.cfg;
  result.slot_decoded.assign(graph.sched.slots.size(), 0);
  std::size_t max_deg = 0;
  for (const auto& node : graph.nodes) max_deg = std::max(max_deg, node.members.size());
  result.degree_tests.assign(max_deg + 1, 0);
  result.degree_passes.assign(max_deg + 1, 0);

  auto decode_user = [&](std::uint32_t node_idx, std::size_t t, double sinr, int iteration) {
    auto& node = graph.nodes[node_idx];
    const std::uint32_t user = node.members[t];
    const double ghat = node.g;  // residual estimate at the decoding node
    graph.decoded[user] = 1;
    graph.ledger.push_back({user, node_idx, ghat, iteration});
    if (opts.enable_sic) {
      for (auto other_idx : graph.user_nodes[user]) {
        auto& other = graph.nodes[other_idx];
        for (std::size_t i = 0; i < other.members.size(); ++i) {
          if (other.members[i] == user && other.in_resid[i]) {
            other.in_resid[i] = 0;
            other.ghat[i] = ghat;
            other.g -= ghat;
            if (other.f.size() > 0) {
              // full backend also replays the cancellation on the combined
              // data row: subtract ghat * x_user.
              other.f -= ghat * UserMessages::draw(cfg, result.trial, user);
            }
          }
        }
      }
    } else {
      for (std::size_t i = 0; i < node.members.size(); ++i)
        if (node.members[i] == user) node.in_resid[i] = 0;
    }
    ++result.slot_decoded[node.slot];
    if (opts.capture_trace) {
      const double db = 10.0 * std::log10(std::max(sinr, 1e-300));
      result.trace.push_back({result.trial, node.slot, node.pilot, node.original_degree(), user,
                              iteration, db});
    }
  };

  int iteration = 0;
  bool progress = true;
  while (progress) {
    progress = false;
    ++iteration;
    for (std::uint32_t idx = 0; idx < graph.nodes.size(); ++idx) {
      auto& node = graph.nodes[idx];
      if (node.tested || node.members.empty()) continue;
      std::size_t t = node.members.size();
      if (opts.enable_sic) {
        std::size_t d = 0;
        for (std::size_t i = 0; i < node.in_resid.size(); ++i)
          if (node.in_resid[i]) {
            ++d;
            t = i;
          }
        if (d != 1) continue;
      } else {
        if (node.members.size() != 1 || !node.in_resid[0]) continue;
        t = 0;
      }
      node.tested = true;
      const double sinr = node_sinr(node, t, cfg.sigma2);
      const auto deg = static_cast<std::size_t>(node.original_degree());
      ++result.degree_tests[deg];
      const bool ok = sinr >= cfg.sinr_threshold();
      if (ok) {
        ++result.degree_passes[deg];
        decode_user(idx, t, sinr, iteration);
        progress = true;
      }
    }
  }
  result.iterations = iteration;

  result.decoded_users.clear();
  for (std::uint32_t k = 0; k < graph.decoded.size(); ++k)
    if (graph.decoded[k]) result.decoded_users.push_back(k);
  result.decoded_count = result.decoded_users.size();
  std::vector<std::uint8_t> active(static_cast<std::size_t>(cfg.K), 0);
  for (const auto& slot : graph.sched.slots)
    for (auto u : slot.users) active[u] = 1;
  result.active_count = 0;
  for (auto v : active) result.active_count += v;
  // Per-slot rate |S_n| R D / L, averaged over the frame's Delta slots.
  result.gamma = static_cast<double>(result.decoded_count) * cfg.R *
                 static_cast<double>(cfg.D()) /
                 (static_cast<double>(cfg.L) * static_cast<double>(graph.sched.slots.size()));
  result.ledger = graph.ledger;
}

DecodingResult run_trial(const SystemConfig& cfg, std::uint64_t trial, const TrialOptions& opts) {
  auto rng = rng_stream(cfg.seed, Stream::Schedule, trial, 0);
  const PilotSchedule sched = draw_schedule(cfg, rng);
  DecodingGraph graph = build_graph(cfg, sched, trial);
  DecodingResult result;
  result.trial = trial;
  sic_decode(graph, result, opts);
  return result;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file: " + path);
  out << "trial,slot,pilot,original_degree,decoded_user,iteration,sinr_db\n";
  for (const auto& r : rows) {
    out << r.trial << ',' << r.slot << ',' << r.pilot << ',' << r.original_degree << ','
        << r.decoded_user << ',' << r.iteration << ',' << r.sinr_db << '\n';
  }
}

}  // namespace cpa
