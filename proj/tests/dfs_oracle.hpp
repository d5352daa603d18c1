// Independent single-threaded depth-first enumerator used as the checker's
// oracle. Shares only the semantics module (enabled_choices / apply_choice /
// initial_state / is_all_done); the safety predicates are re-implemented here
// from scratch so a checker bug cannot hide in both sides.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "coordcheck/semantics.hpp"

namespace oracle {

struct Result {
  std::set<std::vector<uint8_t>> states;  // canonical encodings of all reachable states
  bool violation_found = false;
  // Shortest depth at which any violation occurs, and the kinds present at
  // that depth (a violating state/edge is a leaf: its successors are not
  // explored, matching the checker's stop-at-first-violating-level contract).
  std::optional<uint64_t> min_violation_depth;
  std::set<coord::ViolationKind> kinds_at_min_depth;
};

struct Config {
  int64_t default_bound = 3;
  std::map<std::string, int64_t> per_channel_bounds;
  uint64_t max_states = 2'000'000;
};

inline std::vector<coord::ViolationKind> state_violations(const coord::System& sys,
                                                          const coord::GlobalState& s,
                                                          const Config& cfg) {
  std::vector<coord::ViolationKind> out;
  for (size_t c = 0; c < s.queues.size(); ++c) {
    int64_t bound = cfg.default_bound;
    auto it = cfg.per_channel_bounds.find(sys.channel_name(c));
    if (it != cfg.per_channel_bounds.end()) bound = it->second;
    if (static_cast<int64_t>(s.queues[c].size()) > bound) {
      out.push_back(coord::ViolationKind::QueueBoundExceeded);
    }
  }
  bool all_done = true;
  for (uint16_t pc : s.pc) all_done = all_done && pc == coord::kDonePc;
  if (all_done) {
    for (int16_t h : s.holders) {
      if (h != coord::kNoHolder) out.push_back(coord::ViolationKind::OrphanLock);
    }
    for (const auto& q : s.queues) {
      if (!q.empty()) out.push_back(coord::ViolationKind::UndrainedChannel);
    }
  }
  return out;
}

// Explicit-stack DFS with best-known-depth relaxation, so min_violation_depth
// is exact even though visitation order is depth-first.
inline Result explore(const coord::System& sys, const Config& cfg = {}) {
  Result result;
  std::map<std::vector<uint8_t>, uint64_t> best_depth;

  struct Item {
    coord::GlobalState state;
    uint64_t depth;
  };
  std::vector<Item> stack;
  coord::GlobalState init = sys.initial_state();

  auto note_violation = [&result](uint64_t depth, coord::ViolationKind kind) {
    result.violation_found = true;
    if (!result.min_violation_depth || depth < *result.min_violation_depth) {
      result.min_violation_depth = depth;
      result.kinds_at_min_depth = {kind};
    } else if (depth == *result.min_violation_depth) {
      result.kinds_at_min_depth.insert(kind);
    }
  };

  {
    auto enc = sys.encode(init);
    best_depth[enc] = 0;
    result.states.insert(enc);
  }
  for (coord::ViolationKind k : state_violations(sys, init, cfg)) note_violation(0, k);
  {
    bool all_done = sys.is_all_done(init);
    if (!all_done && sys.enabled_choices(init).empty()) {
      note_violation(0, coord::ViolationKind::Deadlock);
    }
  }
  stack.push_back({init, 0});

  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    if (result.min_violation_depth && item.depth >= *result.min_violation_depth) continue;

    auto choices = sys.enabled_choices(item.state);
    for (const auto& choice : choices) {
      coord::StepOutcome outcome = sys.apply_choice(item.state, choice);
      uint64_t depth = item.depth + 1;
      bool edge_violates = false;
      for (const auto& v : outcome.violations) {
        note_violation(depth, v.kind);
        edge_violates = true;
      }
      auto kinds = state_violations(sys, outcome.next, cfg);
      for (coord::ViolationKind k : kinds) {
        note_violation(depth, k);
        edge_violates = true;
      }
      bool all_done = sys.is_all_done(outcome.next);
      bool deadlocked = !all_done && sys.enabled_choices(outcome.next).empty();
      if (deadlocked) {
        note_violation(depth, coord::ViolationKind::Deadlock);
      }

      auto enc = sys.encode(outcome.next);
      auto it = best_depth.find(enc);
      bool improved = it == best_depth.end() || depth < it->second;
      if (it == best_depth.end()) {
        result.states.insert(enc);
        if (result.states.size() > cfg.max_states) {
          throw std::runtime_error("oracle state budget exceeded");
        }
      }
      if (improved) {
        best_depth[enc] = depth;
        if (!edge_violates && !deadlocked) {
          stack.push_back({std::move(outcome.next), depth});
        }
      }
    }
  }

  return result;
}

}  // namespace oracle
