#include "coordcheck/simulator.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace coord {

const char* to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::Random: return "random";
    case SchedulerKind::RoundRobin: return "round-robin";
    case SchedulerKind::Script: return "script";
  }
  return "?";
}

const char* to_string(SimOutcome o) {
  switch (o) {
    case SimOutcome::Completed: return "completed";
    case SimOutcome::DeadlockDetected: return "deadlock";
    case SimOutcome::LivelockSuspected: return "livelock-suspected";
    case SimOutcome::StepBudgetExhausted: return "step-budget-exhausted";
  }
  return "?";
}

void SimConfig::validate() const {
  if (fault_rate < 0.0 || fault_rate > 1.0) {
    throw std::invalid_argument("fault rate must be in [0, 1]");
  }
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  for (const auto& f : fault_plan) {
    if (f.occurrence < 1) throw std::invalid_argument("fault occurrence ordinal must be >= 1");
  }
  if (scheduler == SchedulerKind::Script && script.empty()) {
    throw std::invalid_argument("script scheduler needs a nonempty script");
  }
}

namespace {

// Deterministic across platforms, unlike <random> distributions.
struct SplitMix64 {
  uint64_t state;
  explicit SplitMix64(uint64_t seed) : state(seed) {}
  uint64_t next() {
    state += 0x9E3779B97f4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  uint64_t below(uint64_t n) { return n <= 1 ? 0 : next() % n; }
  double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }
};

class Simulation {
 public:
  Simulation(const System& sys, const SimConfig& cfg)
      : sys_(sys), cfg_(cfg), monitor_(sys.topology()), rng_(cfg.seed), shadow_(sys.initial_state()) {
    const size_t n = sys_.agent_count();
    exec_counts_.resize(n);
    pending_rate_fault_.assign(n, false);
    for (size_t a = 0; a < n; ++a) on_arrival(a);
    if (cfg_.checkpoints.empty()) {
      for (size_t a = 0; a < n; ++a) {
        checkpoints_.emplace_back(sys_.agent_name(a), kDoneLabel);
      }
    } else {
      checkpoints_ = cfg_.checkpoints;
    }
    checkpoint_hit_.assign(checkpoints_.size(), false);
    for (size_t a = 0; a < n; ++a) note_checkpoint(a);
  }

  SimReport run() {
    for (;;) {
      if (sys_.is_all_done(shadow_)) return finish(SimOutcome::Completed);
      if (tick_ >= cfg_.max_steps) return finish(SimOutcome::StepBudgetExhausted);
      if (tick_ - last_progress_ > cfg_.livelock_window) {
        return finish(SimOutcome::LivelockSuspected);
      }

      auto expansions = sys_.expand(shadow_);
      std::vector<size_t> runnable;
      std::vector<std::vector<const System::Expansion*>> options(sys_.agent_count());
      for (const auto& e : expansions) {
        options[e.choice.agent].push_back(&e);
      }
      for (size_t a = 0; a < sys_.agent_count(); ++a) {
        if (options[a].empty()) continue;
        if (auto forced = forced_branch(a)) {
          // A fault lands only when the failure arm is actually executable;
          // a tool cannot fail while its branch is blocked on a guard.
          std::vector<const System::Expansion*> kept;
          for (const auto* e : options[a]) {
            if (e->choice.branch == static_cast<int>(*forced)) kept.push_back(e);
          }
          if (!kept.empty()) options[a] = std::move(kept);
        }
        runnable.push_back(a);
      }
      if (runnable.empty()) {
        // Every live agent is parked with no one left to wake it.
        return finish(SimOutcome::DeadlockDetected);
      }

      size_t agent = pick_agent(runnable);
      auto& mine = options[agent];
      const System::Expansion* chosen = nullptr;
      if (forced_script_branch_ >= 0) {
        for (const auto* e : mine) {
          if (e->choice.branch == forced_script_branch_) {
            chosen = e;
            break;
          }
        }
        if (chosen == nullptr) {
          throw std::invalid_argument("script branch " + std::to_string(forced_script_branch_) +
                                      " is not enabled for agent " + sys_.agent_name(agent));
        }
        forced_script_branch_ = -1;
      } else {
        chosen = mine.size() == 1 ? mine[0] : mine[rng_.below(mine.size())];
      }
      execute(agent, *chosen);
    }
  }

 private:
  void on_arrival(size_t a) {
    pending_rate_fault_[a] = false;
    if (cfg_.fault_rate > 0.0 && shadow_.pc[a] != kDonePc &&
        sys_.branch_count(a, shadow_.pc[a]) > 1) {
      pending_rate_fault_[a] = rng_.unit() < cfg_.fault_rate;
    }
  }

  std::optional<size_t> forced_branch(size_t a) {
    uint16_t pc = shadow_.pc[a];
    size_t branches = sys_.branch_count(a, pc);
    if (branches < 2) return std::nullopt;
    const std::string label = sys_.step_label(a, pc);
    uint64_t next_occurrence = exec_counts_[a][label] + 1;
    for (const auto& f : cfg_.fault_plan) {
      if (f.agent == sys_.agent_name(a) && f.label == label && f.occurrence == next_occurrence) {
        return branches - 1;
      }
    }
    if (pending_rate_fault_[a]) return branches - 1;
    return std::nullopt;
  }

  size_t pick_agent(const std::vector<size_t>& runnable) {
    switch (cfg_.scheduler) {
      case SchedulerKind::Random:
        return runnable[rng_.below(runnable.size())];
      case SchedulerKind::RoundRobin:
        return round_robin(runnable);
      case SchedulerKind::Script: {
        if (script_pos_ < cfg_.script.size()) {
          const auto& entry = cfg_.script[script_pos_++];
          int idx = sys_.topology().agent_index(entry.agent);
          if (idx < 0) throw std::invalid_argument("script names unknown agent '" + entry.agent + "'");
          if (std::find(runnable.begin(), runnable.end(), static_cast<size_t>(idx)) ==
              runnable.end()) {
            throw std::invalid_argument("script agent '" + entry.agent +
                                        "' is not runnable at step " +
                                        std::to_string(script_pos_ - 1));
          }
          forced_script_branch_ = entry.branch;
          return static_cast<size_t>(idx);
        }
        return round_robin(runnable);  // script exhausted
      }
    }
    return runnable.front();
  }

  size_t round_robin(const std::vector<size_t>& runnable) {
    for (size_t i = 0; i < sys_.agent_count(); ++i) {
      size_t a = (rr_cursor_ + i) % sys_.agent_count();
      if (std::find(runnable.begin(), runnable.end(), a) != runnable.end()) {
        rr_cursor_ = (a + 1) % sys_.agent_count();
        return a;
      }
    }
    return runnable.front();
  }

  void execute(size_t agent, const System::Expansion& e) {
    const System::Expansion* chosen = &e;
    const std::string label = sys_.step_label(agent, shadow_.pc[agent]);
    if (auto forced = forced_branch(agent);
        forced && chosen->choice.branch == static_cast<int>(*forced)) {
      ++injected_faults_;
    }
    ++exec_counts_[agent][label];

    for (const auto& eff : chosen->choice.effects) {
      std::optional<CoordinationEvent> ev;
      switch (eff.kind) {
        case Effect::Kind::Send:
          ev = CoordinationEvent::send(sys_.agent_name(agent), sys_.channel_name(eff.target),
                                       sys_.topology().channels[eff.target].labels[eff.label]);
          break;
        case Effect::Kind::Receive:
          ev = CoordinationEvent::receive(
              sys_.agent_name(agent), sys_.channel_name(eff.target),
              {sys_.topology().channels[eff.target].labels[eff.label]});
          break;
        case Effect::Kind::Acquire:
          ev = CoordinationEvent::acquire(sys_.agent_name(agent), sys_.lock_name(eff.target));
          break;
        case Effect::Kind::Release:
          ev = CoordinationEvent::release(sys_.agent_name(agent), sys_.lock_name(eff.target));
          break;
        case Effect::Kind::CtrAcquire:
          ev = CoordinationEvent::counter_acquire(sys_.agent_name(agent),
                                                  sys_.counter_name(eff.target),
                                                  static_cast<uint32_t>(eff.amount));
          break;
        case Effect::Kind::CtrRelease:
          ev = CoordinationEvent::counter_release(sys_.agent_name(agent),
                                                  sys_.counter_name(eff.target),
                                                  static_cast<uint32_t>(eff.amount));
          break;
        case Effect::Kind::Assign:
        case Effect::Kind::Goto:
          break;  // local to the agent, nothing to enforce
      }
      if (ev) {
        ev->timestamp = tick_;
        MonitorDecision d = monitor_.submit(*ev);
        if (d.status != DecisionStatus::Accepted) {
          // The turn was chosen from the semantics' enabled set and the
          // scheduler is single-threaded, so the monitor must agree.
          throw std::logic_error("simulator/monitor divergence on " +
                                 std::string(to_string(ev->kind)) + " '" + ev->target +
                                 "': " + d.detail);
        }
      }
    }

    std::vector<uint16_t> old_pc = shadow_.pc;
    shadow_ = chosen->outcome.next;
    ++tick_;

    bool progressed = false;
    for (size_t a = 0; a < shadow_.pc.size(); ++a) {
      if (shadow_.pc[a] != old_pc[a]) {
        progressed = true;
        on_arrival(a);
        note_checkpoint(a);
      }
    }
    if (progressed) last_progress_ = tick_;
  }

  void note_checkpoint(size_t a) {
    const std::string label = sys_.step_label(a, shadow_.pc[a]);
    for (size_t i = 0; i < checkpoints_.size(); ++i) {
      if (!checkpoint_hit_[i] && checkpoints_[i].first == sys_.agent_name(a) &&
          checkpoints_[i].second == label) {
        checkpoint_hit_[i] = true;
      }
    }
  }

  SimReport finish(SimOutcome outcome) {
    SimReport r;
    r.outcome = outcome;
    for (size_t a = 0; a < sys_.agent_count(); ++a) {
      r.final_labels[sys_.agent_name(a)] = sys_.step_label(a, shadow_.pc[a]);
    }
    r.event_log = monitor_.accepted_log();
    r.monitor_stats = monitor_.stats();
    r.injected_faults = injected_faults_;
    r.checkpoints_total = checkpoint_hit_.size();
    r.checkpoints_hit = static_cast<size_t>(
        std::count(checkpoint_hit_.begin(), checkpoint_hit_.end(), true));
    r.steps_executed = tick_;
    return r;
  }

  const System& sys_;
  const SimConfig& cfg_;
  Monitor monitor_;
  SplitMix64 rng_;
  GlobalState shadow_;
  std::vector<std::map<std::string, uint64_t>> exec_counts_;  // per agent, per label
  std::vector<bool> pending_rate_fault_;
  std::vector<std::pair<std::string, std::string>> checkpoints_;
  std::vector<bool> checkpoint_hit_;
  uint64_t tick_ = 0;
  uint64_t last_progress_ = 0;
  uint64_t injected_faults_ = 0;
  size_t rr_cursor_ = 0;
  size_t script_pos_ = 0;
  int forced_script_branch_ = -1;
};

}  // namespace

SimReport simulate(const System& sys, const SimConfig& cfg) {
  cfg.validate();
  Simulation sim(sys, cfg);
  return sim.run();
}

std::vector<ScriptEntry> script_from_trace(const MachineTrace& trace) {
  std::vector<ScriptEntry> script;
  script.reserve(trace.steps.size());
  for (const auto& s : trace.steps) {
    script.push_back({s.agent, s.branch});
  }
  return script;
}

BatchTable batch(const std::vector<BatchPair>& pairs, const std::vector<SimConfig>& cfgs) {
  BatchTable table;
  for (const auto& pair : pairs) {
    for (const auto& cfg : cfgs) {
      SimReport r = simulate(*pair.system, cfg);
      table.rows.push_back({pair.label, cfg.seed, cfg.scheduler, r.injected_faults, r.outcome});
    }
  }
  return table;
}

std::map<std::string, BatchTable::Aggregate> BatchTable::aggregates() const {
  std::map<std::string, Aggregate> out;
  for (const auto& row : rows) {
    Aggregate& a = out[row.pair];
    ++a.runs;
    switch (row.outcome) {
      case SimOutcome::Completed: ++a.completed; break;
      case SimOutcome::DeadlockDetected: ++a.deadlock; break;
      case SimOutcome::LivelockSuspected: ++a.livelock; break;
      case SimOutcome::StepBudgetExhausted: ++a.budget; break;
    }
  }
  return out;
}

std::string BatchTable::to_text() const {
  std::ostringstream os;
  os << "pair\tseed\tscheduler\tinjected_faults\toutcome\n";
  for (const auto& row : rows) {
    os << row.pair << "\t" << row.seed << "\t" << to_string(row.scheduler) << "\t" << row.faults
       << "\t" << to_string(row.outcome) << "\n";
  }
  os << "\npair\truns\tcompleted\tdeadlock\tlivelock\tbudget\tdl_ll_fraction\n";
  for (const auto& [pair, a] : aggregates()) {
    os << pair << "\t" << a.runs << "\t" << a.completed << "\t" << a.deadlock << "\t"
       << a.livelock << "\t" << a.budget << "\t" << a.dl_ll_fraction() << "\n";
  }
  return os.str();
}

}  // namespace coord
