#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coordcheck/checker.hpp"
#include "coordcheck/monitor.hpp"
#include "coordcheck/semantics.hpp"

namespace coord {

enum class SchedulerKind { Random, RoundRobin, Script };
const char* to_string(SchedulerKind k);

// (agent, step label, occurrence ordinal): the occurrence-th execution of
// that label takes the step's failure arm (the last either branch).
struct FaultPoint {
  std::string agent;
  std::string label;
  uint64_t occurrence = 1;  // 1-based
};

struct ScriptEntry {
  std::string agent;
  int branch = -1;  // forced either branch; -1 lets the seed decide
};

struct SimConfig {
  uint64_t seed = 0;
  SchedulerKind scheduler = SchedulerKind::Random;
  std::vector<ScriptEntry> script;     // Script scheduler prefix; round-robin after
  std::vector<FaultPoint> fault_plan;
  double fault_rate = 0.0;             // randomized injection on either steps
  uint64_t max_steps = 10000;
  uint64_t livelock_window = 512;      // ticks without a new label before LivelockSuspected
  std::chrono::milliseconds step_timeout{0};  // informational; scheduling is logical
  // Label-reachability milestones (agent, label). Empty = every agent reaching Done.
  std::vector<std::pair<std::string, std::string>> checkpoints;

  void validate() const;
};

enum class SimOutcome { Completed, DeadlockDetected, LivelockSuspected, StepBudgetExhausted };
const char* to_string(SimOutcome o);

struct SimReport {
  SimOutcome outcome = SimOutcome::Completed;
  std::map<std::string, std::string> final_labels;  // agent -> label at end
  std::vector<CoordinationEvent> event_log;         // monitor sequence order
  MonitorStats monitor_stats;
  uint64_t injected_faults = 0;
  size_t checkpoints_hit = 0;
  size_t checkpoints_total = 0;
  uint64_t steps_executed = 0;
};

// Seeded concrete execution: agents are cooperatively scheduled interpreter
// tasks; one turn executes one enabled label atomically, routing every
// coordination statement through the monitor. Deterministic for a given
// (program, topology, config).
SimReport simulate(const System& sys, const SimConfig& cfg);

// Scheduler script replaying a checker counterexample.
std::vector<ScriptEntry> script_from_trace(const MachineTrace& trace);

struct BatchPair {
  std::string label;
  const System* system = nullptr;
};

struct BatchRow {
  std::string pair;
  uint64_t seed = 0;
  SchedulerKind scheduler = SchedulerKind::Random;
  uint64_t faults = 0;
  SimOutcome outcome = SimOutcome::Completed;
};

struct BatchTable {
  std::vector<BatchRow> rows;

  struct Aggregate {
    uint64_t runs = 0;
    uint64_t completed = 0;
    uint64_t deadlock = 0;
    uint64_t livelock = 0;
    uint64_t budget = 0;
    double dl_ll_fraction() const {
      return runs == 0 ? 0.0 : static_cast<double>(deadlock + livelock) / static_cast<double>(runs);
    }
  };
  std::map<std::string, Aggregate> aggregates() const;
  std::string to_text() const;  // tab-delimited, fixed header
};

BatchTable batch(const std::vector<BatchPair>& pairs, const std::vector<SimConfig>& cfgs);

}  // namespace coord
