#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coordcheck/digest.hpp"
#include "coordcheck/semantics.hpp"

namespace coord {

struct CheckConfig {
  int64_t channel_bound = 3;                       // default per-channel depth bound
  std::map<std::string, int64_t> per_channel_bounds;
  unsigned worker_count = 1;
  std::optional<uint64_t> state_limit;
  std::optional<std::chrono::milliseconds> time_limit;
  bool collect_fingerprints = false;  // exploration dump for oracle comparison

  // Throws std::invalid_argument on bounds < 1 or worker_count < 1.
  void validate(const Topology& t) const;
  int64_t bound_for(const Topology& t, size_t channel) const;
};

enum class CheckOutcome { Pass, Violation, ResourceExhausted };
const char* to_string(CheckOutcome o);

struct TraceStep {
  StepChoice choice;
  Fingerprint digest;  // state after the choice
};

struct CounterexampleTrace {
  GlobalState initial;
  std::vector<TraceStep> steps;
  Violation final_violation;
};

struct CheckStats {
  uint64_t distinct_states = 0;
  uint64_t transitions = 0;
  uint32_t max_depth = 0;
  std::chrono::microseconds duration{0};
};

struct Verdict {
  CheckOutcome outcome = CheckOutcome::Pass;
  std::optional<ViolationKind> violation_kind;
  std::optional<CounterexampleTrace> trace;
  // Every violation observed at the reported state/step, priority-ordered.
  std::vector<Violation> all_violations;
  CheckStats stats;
  std::vector<Fingerprint> fingerprints;  // filled when cfg.collect_fingerprints
};

// Bounded breadth-first exploration of every state reachable from
// initial_state. Violations are reported from the first violating BFS level
// with the lexicographically least trace, so the trace is minimal and
// identical for any worker_count.
Verdict check(const System& sys, const CheckConfig& cfg);

// The four termination/bound properties plus step-violation pass-through.
// Deadlock is evaluated via enabled_choices emptiness.
std::vector<Violation> evaluate_properties(const System& sys, const GlobalState& s,
                                           const CheckConfig& cfg,
                                           const std::vector<Violation>& step_violations);

enum class TraceStyle { Human, Machine };

// Renders a Violation verdict. Human: numbered steps ending with the violated
// property. Machine: a JSON document that parse_machine_trace round-trips and
// the simulator can replay as a scheduler script.
// Throws std::invalid_argument for non-violation verdicts.
std::string render_trace(const System& sys, const Verdict& v, const CheckConfig& cfg,
                         TraceStyle style);

struct MachineTraceStep {
  std::string agent;
  std::string label;
  int branch = -1;
  std::vector<std::string> effects;
  std::string digest;
};

struct MachineTrace {
  std::string schema;
  int64_t channel_bound = 3;
  std::map<std::string, int64_t> per_channel_bounds;
  unsigned worker_count = 1;
  std::string violation_kind;
  std::string violation_detail;
  std::vector<MachineTraceStep> steps;
  CheckStats stats;
};

MachineTrace parse_machine_trace(const std::string& text);

}  // namespace coord
