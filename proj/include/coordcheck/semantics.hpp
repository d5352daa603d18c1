#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coordcheck/protocol.hpp"
#include "coordcheck/topology.hpp"

namespace coord {

inline constexpr uint16_t kDonePc = 0xFFFF;
inline constexpr int16_t kNoHolder = -1;

// Full system state: program counters, bounded locals, FIFO queues, lock
// ownership, counter values. A plain value; successor generation copies.
struct GlobalState {
  std::vector<uint16_t> pc;                   // per agent; kDonePc = terminated
  std::vector<int32_t> locals;                // flattened across agents
  std::vector<std::vector<uint16_t>> queues;  // per channel, label ordinals
  std::vector<int16_t> holders;               // per lock, agent index or kNoHolder
  std::vector<int32_t> counters;              // per counter

  bool operator==(const GlobalState&) const = default;
};

enum class ViolationKind {
  // Priority order for verdict reporting; lower value wins.
  MutualExclusionBreach,
  Deadlock,
  QueueBoundExceeded,
  CounterOverRelease,
  LocalDomainExit,
  OrphanLock,
  UndrainedChannel,
};

const char* to_string(ViolationKind k);
std::optional<ViolationKind> violation_kind_from_string(const std::string& s);

struct Violation {
  ViolationKind kind;
  std::string detail;
};

// One primitive state change performed by an executed step; kept on the
// choice so traces can be rendered and replayed without re-interpretation.
struct Effect {
  enum class Kind { Send, Receive, Acquire, Release, CtrAcquire, CtrRelease, Assign, Goto };
  Kind kind;
  int target = -1;     // channel / lock / counter slot, or goto pc
  int label = -1;      // message label ordinal (Send/Receive)
  int32_t amount = 0;  // counter delta
  int local = -1;      // flattened local slot (Assign/Receive bind)
  int32_t value = 0;   // assigned value
};

struct StepChoice {
  uint16_t agent = 0;
  uint16_t step = 0;  // index into the process body
  int branch = -1;    // either/or branch, -1 for plain steps
  std::vector<Effect> effects;
};

struct StepOutcome {
  GlobalState next;
  std::vector<Violation> violations;
};

// A topology + program compiled into an indexed transition system. Pure and
// immutable; safe for concurrent use from many workers.
class System {
 public:
  // Requires bind_check(program, topo).ok(); throws std::invalid_argument
  // with the report text otherwise.
  System(ProtocolProgram program, Topology topo);

  const Topology& topology() const { return topo_; }
  const ProtocolProgram& program() const { return program_; }

  size_t agent_count() const { return procs_.size(); }
  size_t channel_count() const { return topo_.channels.size(); }
  size_t lock_count() const { return lock_resource_.size(); }
  size_t counter_count() const { return counter_resource_.size(); }

  const std::string& agent_name(size_t i) const { return topo_.agents[i].id; }
  const std::string& channel_name(size_t i) const { return topo_.channels[i].id; }
  const std::string& lock_name(size_t i) const;
  const std::string& counter_name(size_t i) const;
  int64_t counter_initial(size_t i) const { return counter_initial_[i]; }
  // Label name of a step index for an agent ("Done" for the sentinel).
  std::string step_label(size_t agent, uint16_t pc) const;
  int step_index_of(size_t agent, const std::string& label) const;
  size_t branch_count(size_t agent, uint16_t pc) const;

  GlobalState initial_state() const;
  bool is_all_done(const GlobalState& s) const;

  // All enabled (agent, branch) choices of s, in (agent, branch) order.
  // Guards are collected across the whole label with intermediate effects
  // applied, so a choice never blocks mid-step when applied.
  std::vector<StepChoice> enabled_choices(const GlobalState& s) const;

  // Executes one enabled choice atomically. Throws std::invalid_argument if
  // the choice is not enabled in s.
  StepOutcome apply_choice(const GlobalState& s, const StepChoice& c) const;

  struct Expansion {
    StepChoice choice;
    StepOutcome outcome;
  };
  // enabled_choices and apply_choice fused; what exploration loops use.
  std::vector<Expansion> expand(const GlobalState& s) const;

  // Canonical byte encoding of s (declaration order); the fingerprint input.
  std::vector<uint8_t> encode(const GlobalState& s) const;
  GlobalState decode(const std::vector<uint8_t>& bytes) const;

  // For each live blocked agent, the guard kind it is stuck on
  // ("AcquireLock", "Receive", "CounterAcquire"). Agents with an enabled
  // choice or pc = Done are omitted.
  std::vector<std::pair<std::string, std::string>> blocked_agents(const GlobalState& s) const;

  std::string render_effect(const Effect& e) const;
  std::string render_state(const GlobalState& s) const;

 private:
  struct CompiledLocal {
    std::string name;
    int32_t lo, hi, init;
    bool is_bool;
  };
  struct CompiledStmt {
    enum class K {
      Send, Receive, Acquire, Release, CtrAcquire, CtrRelease,
      Assign, If, While, Goto, Skip
    };
    K k = K::Skip;
    int channel = -1;
    uint16_t send_label = 0;
    std::vector<uint16_t> expected;
    int bind_local = -1;
    int resource = -1;  // lock slot or counter slot
    int32_t amount = 1;
    ExprPtr expr;       // assign rhs / if / while condition
    int local = -1;     // assign target
    std::vector<CompiledStmt> then_body, else_body;
    uint16_t goto_target = 0;
  };
  struct CompiledStep {
    std::string label;
    bool is_either = false;
    std::vector<std::vector<CompiledStmt>> branches;
  };
  struct CompiledProcess {
    std::string agent;
    int local_base = 0;
    int local_count = 0;
    std::vector<CompiledStep> steps;
  };

  struct ExecState;  // transient interpreter state

  CompiledStmt compile_stmt(const Statement& s, const ProcessDef& proc);
  std::vector<CompiledStmt> compile_list(const std::vector<Statement>& stmts,
                                         const ProcessDef& proc);

  // Runs one branch of the step at pc for one agent; nullopt when a guard
  // fails (the choice is disabled).
  std::optional<StepOutcome> try_execute(const GlobalState& s, uint16_t agent, int branch,
                                         std::vector<Effect>* effects) const;
  bool exec_list(ExecState& es, const std::vector<CompiledStmt>& stmts) const;
  int64_t eval(const ExecState& es, const Expr& e) const;
  int32_t store_local(ExecState& es, int slot, int64_t raw, bool record_violation = true) const;
  const char* first_failed_guard(const GlobalState& s, uint16_t agent) const;

  Topology topo_;
  ProtocolProgram program_;
  std::vector<CompiledProcess> procs_;
  std::vector<CompiledLocal> locals_;         // flattened
  std::vector<int> lock_resource_;            // lock slot -> topo resource index
  std::vector<int> counter_resource_;         // counter slot -> topo resource index
  std::vector<int64_t> counter_initial_;
  std::vector<int> resource_slot_;            // topo resource index -> slot
};

}  // namespace coord
