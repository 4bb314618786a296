#pragma once

#include <cstdint>
#include <vector>

#include "cpa/config.hpp"
#include "cpa/receiver.hpp"
#include "cpa/schedule.hpp"

namespace cpa {

struct TraceRow {
  std::uint64_t trial;
  std::uint32_t slot;
  std::uint16_t pilot;
  int original_degree;
  std::uint32_t decoded_user;
  int iteration;
  double sinr_db;
};

struct CancellationEntry {
  std::uint32_t user;
  std::uint32_t node_index;  // node whose residual estimate was used
  double ghat;
  int iteration;
};

// Bipartite decoding state for one frame. Node (slot n, pilot j) lives at
// index n * tau + j; user_nodes maps each user to the nodes it appears in.
struct DecodingGraph {
  SystemConfig cfg;
  PilotSchedule sched;
  std::vector<FactorNode> nodes;
  std::vector<std::vector<std::uint32_t>> user_nodes;
  std::vector<std::uint8_t> decoded;
  std::vector<CancellationEntry> ledger;

  FactorNode& node_at(std::size_t slot, int pilot) {
    return nodes[slot * static_cast<std::size_t>(cfg.tau) + static_cast<std::size_t>(pilot)];
  }
};

struct DecodingResult {
  std::uint64_t trial = 0;
  int iterations = 0;
  std::uint64_t decoded_count = 0;
  std::uint64_t active_count = 0;  // users that transmitted at least once
  double gamma = 0.0;              // rate per channel use, averaged over the frame
  std::vector<std::uint32_t> decoded_users;     // ascending
  std::vector<std::uint32_t> slot_decoded;      // |S_n| per slot
  std::vector<std::uint64_t> degree_tests;      // index = original node degree
  std::vector<std::uint64_t> degree_passes;
  std::vector<TraceRow> trace;
  std::vector<CancellationEntry> ledger;

  double p_d_active() const {
    return active_count ? static_cast<double>(decoded_count) / static_cast<double>(active_count)
                        : 0.0;
  }
};

struct TrialOptions {
  bool enable_sic = true;     // false: test only originally-singleton nodes, no cancellation
  bool capture_trace = false;
};

// Assemble the frame's factor nodes under cfg.mode. All three backends draw
// from identical (trial, slot)-keyed streams, so Full and Virtual realize
// the same frame and differ only in what they materialize.
DecodingGraph build_graph(const SystemConfig& cfg, const PilotSchedule& sched,
                          std::uint64_t trial);

// Iterative cancellation to fixpoint. Within a pass nodes are visited in
// slot-major, pilot-minor order; a node is SINR-tested at most once in its
// lifetime (its SINR cannot change after it first reaches residual degree
// one, so retesting is pointless and single-testing keeps statistics clean).
void sic_decode(DecodingGraph& graph, DecodingResult& result, const TrialOptions& opts);

// Schedule draw + graph build + decode for one self-contained trial.
DecodingResult run_trial(const SystemConfig& cfg, std::uint64_t trial,
                         const TrialOptions& opts = {});

// trial,slot,pilot,original_degree,decoded_user,iteration,sinr_db
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);

}  // namespace cpa
