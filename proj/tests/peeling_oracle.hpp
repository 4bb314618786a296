#pragma once

// Independent reference decoder for equivalence tests: ignores all physics
// and repeatedly resolves any (slot, pilot) resource with exactly one
// undecoded occupant. Kept deliberately separate from the production
// decoder; a stack-driven worklist instead of pass scans.

#include <cstdint>
#include <set>
#include <vector>

#include "cpa/schedule.hpp"

namespace cpa_test {

inline std::set<std::uint32_t> peel(const cpa::PilotSchedule& sched) {
  struct Node {
    std::vector<std::uint32_t> members;
    std::size_t alive = 0;
  };
  const std::size_t tau = static_cast<std::size_t>(sched.tau);
  std::vector<Node> nodes(sched.slots.size() * tau);
  std::vector<std::vector<std::size_t>> user_nodes;
  for (std::size_t n = 0; n < sched.slots.size(); ++n) {
    const auto& slot = sched.slots[n];
    for (std::size_t i = 0; i < slot.users.size(); ++i) {
      const std::size_t idx = n * tau + slot.pilots[i];
      nodes[idx].members.push_back(slot.users[i]);
      ++nodes[idx].alive;
      if (user_nodes.size() <= slot.users[i]) user_nodes.resize(slot.users[i] + 1);
      user_nodes[slot.users[i]].push_back(idx);
    }
  }
  std::set<std::uint32_t> decoded;
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].alive == 1) stack.push_back(i);
  while (!stack.empty()) {
    const std::size_t idx = stack.back();
    stack.pop_back();
    if (nodes[idx].alive != 1) continue;
    std::uint32_t user = 0;
    bool found = false;
    for (auto u : nodes[idx].members)
      if (!decoded.count(u)) {
        user = u;
        found = true;
        break;
      }
    if (!found) continue;
    decoded.insert(user);
    for (auto other : user_nodes[user]) {
      if (--nodes[other].alive == 1) stack.push_back(other);
    }
  }
  return decoded;
}

}  // namespace cpa_test
