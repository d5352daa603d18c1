#include "coordcheck/semantics.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace coord {

namespace {
// Atomic while loops must terminate; a body that never exits is a program
// bug, not a reachable protocol behavior.
constexpr int kWhileIterationCap = 4096;
}  // namespace

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::MutualExclusionBreach: return "MutualExclusionBreach";
    case ViolationKind::Deadlock: return "Deadlock";
    case ViolationKind::QueueBoundExceeded: return "QueueBoundExceeded";
    case ViolationKind::CounterOverRelease: return "CounterOverRelease";
    case ViolationKind::LocalDomainExit: return "LocalDomainExit";
    case ViolationKind::OrphanLock: return "OrphanLock";
    case ViolationKind::UndrainedChannel: return "UndrainedChannel";
  }
  return "?";
}

std::optional<ViolationKind> violation_kind_from_string(const std::string& s) {
  for (ViolationKind k : {ViolationKind::MutualExclusionBreach, ViolationKind::Deadlock,
                          ViolationKind::QueueBoundExceeded, ViolationKind::CounterOverRelease,
                          ViolationKind::LocalDomainExit, ViolationKind::OrphanLock,
                          ViolationKind::UndrainedChannel}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

System::System(ProtocolProgram program, Topology topo)
    : topo_(std::move(topo)), program_(std::move(program)) {
  ValidationReport topo_report = validate_topology(topo_);
  if (!topo_report.ok()) {
    throw std::invalid_argument("invalid topology:\n" + topo_report.to_string());
  }
  ValidationReport report = bind_check(program_, topo_);
  if (!report.ok()) {
    throw std::invalid_argument("program does not bind to topology:\n" + report.to_string());
  }

  resource_slot_.assign(topo_.resources.size(), -1);
  for (size_t i = 0; i < topo_.resources.size(); ++i) {
    if (topo_.resources[i].kind == ResourceKind::Lock) {
      resource_slot_[i] = static_cast<int>(lock_resource_.size());
      lock_resource_.push_back(static_cast<int>(i));
    } else {
      resource_slot_[i] = static_cast<int>(counter_resource_.size());
      counter_resource_.push_back(static_cast<int>(i));
      counter_initial_.push_back(topo_.resources[i].initial.value_or(0));
    }
  }

  // Processes in topology agent order so agent indices line up everywhere.
  for (const auto& agent : topo_.agents) {
    const ProcessDef* def = program_.find_process(agent.id);
    CompiledProcess cp;
    cp.agent = agent.id;
    cp.local_base = static_cast<int>(locals_.size());
    cp.local_count = static_cast<int>(def->locals.size());
    for (const auto& l : def->locals) {
      locals_.push_back({l.name, static_cast<int32_t>(l.lo), static_cast<int32_t>(l.hi),
                         static_cast<int32_t>(l.init), l.is_bool});
    }
    for (const auto& step : def->body) {
      CompiledStep cs;
      cs.label = step.label;
      if (step.statements.size() == 1 &&
          std::holds_alternative<EitherStmt>(step.statements[0].node)) {
        cs.is_either = true;
        const auto& either = std::get<EitherStmt>(step.statements[0].node);
        for (const auto& branch : either.branches) {
          cs.branches.push_back(compile_list(branch, *def));
        }
      } else {
        cs.branches.push_back(compile_list(step.statements, *def));
      }
      cp.steps.push_back(std::move(cs));
    }
    procs_.push_back(std::move(cp));
  }
}

std::vector<System::CompiledStmt> System::compile_list(const std::vector<Statement>& stmts,
                                                       const ProcessDef& proc) {
  std::vector<CompiledStmt> out;
  out.reserve(stmts.size());
  for (const auto& s : stmts) out.push_back(compile_stmt(s, proc));
  return out;
}

System::CompiledStmt System::compile_stmt(const Statement& s, const ProcessDef& proc) {
  CompiledStmt c;
  // Locals of the process being compiled occupy the current tail of locals_.
  auto local_slot = [&](const std::string& name) {
    for (size_t i = 0; i < proc.locals.size(); ++i) {
      if (proc.locals[i].name == name) {
        return static_cast<int>(locals_.size() - proc.locals.size() + i);
      }
    }
    return -1;
  };

  if (const auto* st = std::get_if<SendStmt>(&s.node)) {
    c.k = CompiledStmt::K::Send;
    c.channel = topo_.channel_index(st->channel);
    c.send_label = static_cast<uint16_t>(topo_.channels[c.channel].label_ordinal(st->label));
  } else if (const auto* st = std::get_if<ReceiveStmt>(&s.node)) {
    c.k = CompiledStmt::K::Receive;
    c.channel = topo_.channel_index(st->channel);
    for (const auto& l : st->expected) {
      c.expected.push_back(
          static_cast<uint16_t>(topo_.channels[c.channel].label_ordinal(l)));
    }
    std::sort(c.expected.begin(), c.expected.end());
    if (st->bind) c.bind_local = local_slot(*st->bind);
  } else if (const auto* st = std::get_if<AcquireStmt>(&s.node)) {
    c.k = CompiledStmt::K::Acquire;
    c.resource = resource_slot_[topo_.resource_index(st->resource)];
  } else if (const auto* st = std::get_if<ReleaseStmt>(&s.node)) {
    c.k = CompiledStmt::K::Release;
    c.resource = resource_slot_[topo_.resource_index(st->resource)];
  } else if (const auto* st = std::get_if<CounterAcquireStmt>(&s.node)) {
    c.k = CompiledStmt::K::CtrAcquire;
    c.resource = resource_slot_[topo_.resource_index(st->resource)];
    c.amount = static_cast<int32_t>(st->amount);
  } else if (const auto* st = std::get_if<CounterReleaseStmt>(&s.node)) {
    c.k = CompiledStmt::K::CtrRelease;
    c.resource = resource_slot_[topo_.resource_index(st->resource)];
    c.amount = static_cast<int32_t>(st->amount);
  } else if (const auto* st = std::get_if<AssignStmt>(&s.node)) {
    c.k = CompiledStmt::K::Assign;
    c.local = local_slot(st->local);
    c.expr = st->value;
  } else if (const auto* st = std::get_if<IfStmt>(&s.node)) {
    c.k = CompiledStmt::K::If;
    c.expr = st->cond;
    c.then_body = compile_list(st->then_body, proc);
    c.else_body = compile_list(st->else_body, proc);
  } else if (const auto* st = std::get_if<WhileStmt>(&s.node)) {
    c.k = CompiledStmt::K::While;
    c.expr = st->cond;
    c.then_body = compile_list(st->body, proc);
  } else if (const auto* st = std::get_if<GotoStmt>(&s.node)) {
    c.k = CompiledStmt::K::Goto;
    c.goto_target = st->target == kDoneLabel
                        ? kDonePc
                        : static_cast<uint16_t>(proc.step_index(st->target));
  } else if (std::holds_alternative<SkipStmt>(s.node)) {
    c.k = CompiledStmt::K::Skip;
  } else {
    // EitherStmt is handled at step level and rejected nested at parse time.
    throw std::logic_error("unexpected statement kind during compilation");
  }
  return c;
}

const std::string& System::lock_name(size_t i) const {
  return topo_.resources[lock_resource_[i]].id;
}
const std::string& System::counter_name(size_t i) const {
  return topo_.resources[counter_resource_[i]].id;
}

std::string System::step_label(size_t agent, uint16_t pc) const {
  if (pc == kDonePc) return kDoneLabel;
  return procs_[agent].steps[pc].label;
}

int System::step_index_of(size_t agent, const std::string& label) const {
  if (label == kDoneLabel) return kDonePc;
  for (size_t i = 0; i < procs_[agent].steps.size(); ++i) {
    if (procs_[agent].steps[i].label == label) return static_cast<int>(i);
  }
  return -1;
}

size_t System::branch_count(size_t agent, uint16_t pc) const {
  if (pc == kDonePc) return 0;
  return procs_[agent].steps[pc].branches.size();
}

GlobalState System::initial_state() const {
  GlobalState s;
  s.pc.assign(procs_.size(), 0);
  s.locals.reserve(locals_.size());
  for (const auto& l : locals_) s.locals.push_back(l.init);
  s.queues.assign(topo_.channels.size(), {});
  s.holders.assign(lock_resource_.size(), kNoHolder);
  s.counters.reserve(counter_initial_.size());
  for (int64_t v : counter_initial_) s.counters.push_back(static_cast<int32_t>(v));
  return s;
}

bool System::is_all_done(const GlobalState& s) const {
  for (uint16_t pc : s.pc) {
    if (pc != kDonePc) return false;
  }
  return true;
}

// --- Execution -----------------------------------------------------------

struct System::ExecState {
  const System& sys;
  GlobalState st;
  uint16_t agent;
  std::vector<Effect>* effects;
  std::vector<Violation> violations;
  bool jumped = false;
};

int64_t System::eval(const ExecState& es, const Expr& e) const {
  switch (e.kind) {
    case Expr::Kind::BoolLit: return e.bool_value ? 1 : 0;
    case Expr::Kind::IntLit: return e.int_value;
    case Expr::Kind::Local: {
      const auto& proc = procs_[es.agent];
      for (int i = 0; i < proc.local_count; ++i) {
        if (locals_[proc.local_base + i].name == e.local) {
          return es.st.locals[proc.local_base + i];
        }
      }
      throw std::logic_error("unresolved local in expression: " + e.local);
    }
    case Expr::Kind::Not: return eval(es, *e.lhs) ? 0 : 1;
    case Expr::Kind::Bin: {
      int64_t a = eval(es, *e.lhs);
      // Short-circuit keeps evaluation cheap; both operands are pure anyway.
      if (e.op == BinOp::And) return a && eval(es, *e.rhs) ? 1 : 0;
      if (e.op == BinOp::Or) return a || eval(es, *e.rhs) ? 1 : 0;
      int64_t b = eval(es, *e.rhs);
      switch (e.op) {
        case BinOp::Eq: return a == b;
        case BinOp::Ne: return a != b;
        case BinOp::Lt: return a < b;
        case BinOp::Le: return a <= b;
        case BinOp::Gt: return a > b;
        case BinOp::Ge: return a >= b;
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        default: break;
      }
      throw std::logic_error("unexpected operator");
    }
  }
  return 0;
}

// Returns false when a guard fails (choice disabled). Effects/violations
// accumulate in es.
bool System::exec_list(ExecState& es, const std::vector<CompiledStmt>& stmts) const {
  for (const auto& c : stmts) {
    if (es.jumped) return true;  // statements after a taken goto never run
    switch (c.k) {
      case CompiledStmt::K::Send: {
        es.st.queues[c.channel].push_back(c.send_label);
        if (es.effects) {
          es.effects->push_back(
              {Effect::Kind::Send, c.channel, static_cast<int>(c.send_label), 0, -1, 0});
        }
        break;
      }
      case CompiledStmt::K::Receive: {
        auto& q = es.st.queues[c.channel];
        if (q.empty()) return false;
        uint16_t head = q.front();
        if (!std::binary_search(c.expected.begin(), c.expected.end(), head)) return false;
        q.erase(q.begin());
        if (c.bind_local >= 0) {
          store_local(es, c.bind_local, static_cast<int32_t>(head));
        }
        if (es.effects) {
          es.effects->push_back(
              {Effect::Kind::Receive, c.channel, static_cast<int>(head), 0, c.bind_local, 0});
        }
        break;
      }
      case CompiledStmt::K::Acquire: {
        if (es.st.holders[c.resource] != kNoHolder) return false;
        es.st.holders[c.resource] = static_cast<int16_t>(es.agent);
        if (es.effects) {
          es.effects->push_back({Effect::Kind::Acquire, c.resource, -1, 0, -1, 0});
        }
        break;
      }
      case CompiledStmt::K::Release: {
        if (es.st.holders[c.resource] == static_cast<int16_t>(es.agent)) {
          es.st.holders[c.resource] = kNoHolder;
        } else {
          es.violations.push_back(
              {ViolationKind::MutualExclusionBreach,
               "agent " + agent_name(es.agent) + " released lock " + lock_name(c.resource) +
                   " it does not hold"});
        }
        if (es.effects) {
          es.effects->push_back({Effect::Kind::Release, c.resource, -1, 0, -1, 0});
        }
        break;
      }
      case CompiledStmt::K::CtrAcquire: {
        if (es.st.counters[c.resource] < c.amount) return false;
        es.st.counters[c.resource] -= c.amount;
        if (es.effects) {
          es.effects->push_back({Effect::Kind::CtrAcquire, c.resource, -1, c.amount, -1, 0});
        }
        break;
      }
      case CompiledStmt::K::CtrRelease: {
        int64_t v = static_cast<int64_t>(es.st.counters[c.resource]) + c.amount;
        int64_t cap = counter_initial_[c.resource];
        if (v > cap) {
          es.violations.push_back(
              {ViolationKind::CounterOverRelease,
               "counter " + counter_name(c.resource) + " released past its initial value " +
                   std::to_string(cap) + " by agent " + agent_name(es.agent)});
          v = cap;
        }
        es.st.counters[c.resource] = static_cast<int32_t>(v);
        if (es.effects) {
          es.effects->push_back({Effect::Kind::CtrRelease, c.resource, -1, c.amount, -1, 0});
        }
        break;
      }
      case CompiledStmt::K::Assign: {
        int32_t v = store_local(es, c.local, eval(es, *c.expr));
        if (es.effects) {
          es.effects->push_back({Effect::Kind::Assign, -1, -1, 0, c.local, v});
        }
        break;
      }
      case CompiledStmt::K::If: {
        if (eval(es, *c.expr)) {
          if (!exec_list(es, c.then_body)) return false;
        } else {
          if (!exec_list(es, c.else_body)) return false;
        }
        break;
      }
      case CompiledStmt::K::While: {
        int iterations = 0;
        while (!es.jumped && eval(es, *c.expr)) {
          if (++iterations > kWhileIterationCap) {
            throw std::runtime_error("while loop at agent " + agent_name(es.agent) +
                                     " exceeded the atomic iteration cap");
          }
          if (!exec_list(es, c.then_body)) return false;
        }
        break;
      }
      case CompiledStmt::K::Goto: {
        es.st.pc[es.agent] = c.goto_target;
        es.jumped = true;
        if (es.effects) {
          es.effects->push_back(
              {Effect::Kind::Goto, static_cast<int>(c.goto_target), -1, 0, -1, 0});
        }
        break;
      }
      case CompiledStmt::K::Skip:
        break;
    }
  }
  return true;
}

// Clamps into the local's domain, recording a LocalDomainExit when the raw
// value falls outside it. Returns the stored value.
int32_t System::store_local(ExecState& es, int slot, int64_t raw, bool record_violation) const {
  const CompiledLocal& l = locals_[slot];
  int64_t v = raw;
  if (v < l.lo || v > l.hi) {
    if (record_violation) {
      es.violations.push_back(
          {ViolationKind::LocalDomainExit,
           "local " + agent_name(es.agent) + "." + l.name + " left its domain [" +
               std::to_string(l.lo) + ".." + std::to_string(l.hi) + "] with value " +
               std::to_string(raw)});
    }
    v = v < l.lo ? l.lo : l.hi;
  }
  es.st.locals[slot] = static_cast<int32_t>(v);
  return static_cast<int32_t>(v);
}

std::optional<StepOutcome> System::try_execute(const GlobalState& s, uint16_t agent, int branch,
                                               std::vector<Effect>* effects) const {
  const CompiledStep& step = procs_[agent].steps[s.pc[agent]];
  const auto& stmts = step.branches[branch < 0 ? 0 : static_cast<size_t>(branch)];
  ExecState es{*this, s, agent, effects, {}, false};
  if (!exec_list(es, stmts)) return std::nullopt;
  if (!es.jumped) {
    uint16_t next = s.pc[agent] + 1;
    es.st.pc[agent] =
        next < procs_[agent].steps.size() ? next : kDonePc;
  }
  return StepOutcome{std::move(es.st), std::move(es.violations)};
}

std::vector<StepChoice> System::enabled_choices(const GlobalState& s) const {
  std::vector<StepChoice> out;
  for (const auto& e : expand(s)) out.push_back(e.choice);
  return out;
}

std::vector<System::Expansion> System::expand(const GlobalState& s) const {
  std::vector<Expansion> out;
  for (uint16_t a = 0; a < procs_.size(); ++a) {
    if (s.pc[a] == kDonePc) continue;
    const CompiledStep& step = procs_[a].steps[s.pc[a]];
    if (step.is_either) {
      for (size_t b = 0; b < step.branches.size(); ++b) {
        StepChoice choice{a, s.pc[a], static_cast<int>(b), {}};
        auto outcome = try_execute(s, a, static_cast<int>(b), &choice.effects);
        if (outcome) out.push_back({std::move(choice), std::move(*outcome)});
      }
    } else {
      StepChoice choice{a, s.pc[a], -1, {}};
      auto outcome = try_execute(s, a, -1, &choice.effects);
      if (outcome) out.push_back({std::move(choice), std::move(*outcome)});
    }
  }
  return out;
}

StepOutcome System::apply_choice(const GlobalState& s, const StepChoice& c) const {
  if (c.agent >= procs_.size() || s.pc[c.agent] != c.step || s.pc[c.agent] == kDonePc) {
    throw std::invalid_argument("choice does not match the agent's current step");
  }
  const CompiledStep& step = procs_[c.agent].steps[c.step];
  if (step.is_either) {
    if (c.branch < 0 || static_cast<size_t>(c.branch) >= step.branches.size()) {
      throw std::invalid_argument("choice branch index out of range");
    }
  } else if (c.branch >= 0) {
    throw std::invalid_argument("branch index given for a non-either step");
  }
  auto outcome = try_execute(s, c.agent, c.branch, nullptr);
  if (!outcome) throw std::invalid_argument("choice is not enabled in this state");
  return std::move(*outcome);
}

const char* System::first_failed_guard(const GlobalState& s, uint16_t agent) const {
  // Re-runs guard collection and reports the first primitive that blocks, for
  // deadlock rendering. Scans branches in order.
  const CompiledStep& step = procs_[agent].steps[s.pc[agent]];
  const char* found = nullptr;
  auto scan = [&](const auto& self, ExecState& es, const std::vector<CompiledStmt>& stmts) -> bool {
    for (const auto& c : stmts) {
      if (es.jumped) return true;
      switch (c.k) {
        case CompiledStmt::K::Receive: {
          auto& q = es.st.queues[c.channel];
          if (q.empty() || !std::binary_search(c.expected.begin(), c.expected.end(), q.front())) {
            found = "Receive";
            return false;
          }
          q.erase(q.begin());
          break;
        }
        case CompiledStmt::K::Acquire:
          if (es.st.holders[c.resource] != kNoHolder) {
            found = "AcquireLock";
            return false;
          }
          es.st.holders[c.resource] = static_cast<int16_t>(agent);
          break;
        case CompiledStmt::K::CtrAcquire:
          if (es.st.counters[c.resource] < c.amount) {
            found = "CounterAcquire";
            return false;
          }
          es.st.counters[c.resource] -= c.amount;
          break;
        case CompiledStmt::K::Send:
          es.st.queues[c.channel].push_back(c.send_label);
          break;
        case CompiledStmt::K::Release:
          if (es.st.holders[c.resource] == static_cast<int16_t>(agent)) {
            es.st.holders[c.resource] = kNoHolder;
          }
          break;
        case CompiledStmt::K::CtrRelease:
          es.st.counters[c.resource] =
              static_cast<int32_t>(std::min<int64_t>(es.st.counters[c.resource] + c.amount,
                                                     counter_initial_[c.resource]));
          break;
        case CompiledStmt::K::Assign:
          store_local(es, c.local, eval(es, *c.expr), /*record=*/false);
          break;
        case CompiledStmt::K::If:
          if (!self(self, es, eval(es, *c.expr) ? c.then_body : c.else_body)) return false;
          break;
        case CompiledStmt::K::While: {
          int iterations = 0;
          while (!es.jumped && eval(es, *c.expr)) {
            if (++iterations > kWhileIterationCap) return true;
            if (!self(self, es, c.then_body)) return false;
          }
          break;
        }
        case CompiledStmt::K::Goto:
          es.jumped = true;
          break;
        case CompiledStmt::K::Skip:
          break;
      }
    }
    return true;
  };
  for (const auto& branch : step.branches) {
    ExecState es{*this, s, agent, nullptr, {}, false};
    if (!scan(scan, es, branch)) return found;
  }
  return found;  // null when some branch is enabled
}

std::vector<std::pair<std::string, std::string>> System::blocked_agents(
    const GlobalState& s) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (uint16_t a = 0; a < procs_.size(); ++a) {
    if (s.pc[a] == kDonePc) continue;
    bool enabled = false;
    const CompiledStep& step = procs_[a].steps[s.pc[a]];
    for (size_t b = 0; b < step.branches.size(); ++b) {
      if (try_execute(s, a, step.is_either ? static_cast<int>(b) : -1, nullptr)) {
        enabled = true;
        break;
      }
      if (!step.is_either) break;
    }
    if (!enabled) {
      const char* guard = first_failed_guard(s, a);
      out.emplace_back(agent_name(a), guard ? guard : "unknown");
    }
  }
  return out;
}

// --- Encoding ------------------------------------------------------------

namespace {
void put16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xFF));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
void put32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
}
uint16_t get16(const std::vector<uint8_t>& in, size_t& pos) {
  uint16_t v = static_cast<uint16_t>(in[pos] | (in[pos + 1] << 8));
  pos += 2;
  return v;
}
uint32_t get32(const std::vector<uint8_t>& in, size_t& pos) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[pos + i]) << (8 * i);
  pos += 4;
  return v;
}
}  // namespace

std::vector<uint8_t> System::encode(const GlobalState& s) const {
  std::vector<uint8_t> out;
  out.reserve(s.pc.size() * 2 + s.locals.size() * 4 + s.holders.size() * 2 +
              s.counters.size() * 4 + s.queues.size() * 2 + 16);
  for (uint16_t pc : s.pc) put16(out, pc);
  for (int32_t v : s.locals) put32(out, static_cast<uint32_t>(v));
  for (const auto& q : s.queues) {
    put16(out, static_cast<uint16_t>(q.size()));
    for (uint16_t m : q) put16(out, m);
  }
  for (int16_t h : s.holders) put16(out, static_cast<uint16_t>(h));
  for (int32_t v : s.counters) put32(out, static_cast<uint32_t>(v));
  return out;
}

GlobalState System::decode(const std::vector<uint8_t>& bytes) const {
  GlobalState s;
  size_t pos = 0;
  s.pc.resize(procs_.size());
  for (auto& pc : s.pc) pc = get16(bytes, pos);
  s.locals.resize(locals_.size());
  for (auto& v : s.locals) v = static_cast<int32_t>(get32(bytes, pos));
  s.queues.resize(topo_.channels.size());
  for (auto& q : s.queues) {
    uint16_t n = get16(bytes, pos);
    q.resize(n);
    for (auto& m : q) m = get16(bytes, pos);
  }
  s.holders.resize(lock_resource_.size());
  for (auto& h : s.holders) h = static_cast<int16_t>(get16(bytes, pos));
  s.counters.resize(counter_resource_.size());
  for (auto& v : s.counters) v = static_cast<int32_t>(get32(bytes, pos));
  return s;
}

std::string System::render_effect(const Effect& e) const {
  std::ostringstream os;
  switch (e.kind) {
    case Effect::Kind::Send:
      os << "send " << channel_name(e.target) << " \"" << topo_.channels[e.target].labels[e.label]
         << "\"";
      break;
    case Effect::Kind::Receive:
      os << "receive " << channel_name(e.target) << " \""
         << topo_.channels[e.target].labels[e.label] << "\"";
      break;
    case Effect::Kind::Acquire:
      os << "acquire " << lock_name(e.target);
      break;
    case Effect::Kind::Release:
      os << "release " << lock_name(e.target);
      break;
    case Effect::Kind::CtrAcquire:
      os << "ctr_acquire " << counter_name(e.target) << " " << e.amount;
      break;
    case Effect::Kind::CtrRelease:
      os << "ctr_release " << counter_name(e.target) << " " << e.amount;
      break;
    case Effect::Kind::Assign:
      os << locals_[e.local].name << " = "
         << (locals_[e.local].is_bool ? (e.value ? "true" : "false") : std::to_string(e.value));
      break;
    case Effect::Kind::Goto:
      os << "goto "
         << (e.target == kDonePc ? std::string(kDoneLabel)
                                 : std::string("pc=") + std::to_string(e.target));
      break;
  }
  return os.str();
}

std::string System::render_state(const GlobalState& s) const {
  std::ostringstream os;
  os << "pc={";
  for (size_t a = 0; a < procs_.size(); ++a) {
    if (a) os << ", ";
    os << agent_name(a) << ":" << step_label(a, s.pc[a]);
  }
  os << "}";
  if (!locals_.empty()) {
    os << " locals={";
    bool first = true;
    for (size_t a = 0; a < procs_.size(); ++a) {
      const auto& proc = procs_[a];
      for (int i = 0; i < proc.local_count; ++i) {
        if (!first) os << ", ";
        first = false;
        const auto& l = locals_[proc.local_base + i];
        os << agent_name(a) << "." << l.name << "=" << s.locals[proc.local_base + i];
      }
    }
    os << "}";
  }
  for (size_t c = 0; c < s.queues.size(); ++c) {
    if (s.queues[c].empty()) continue;
    os << " " << channel_name(c) << "=[";
    for (size_t i = 0; i < s.queues[c].size(); ++i) {
      if (i) os << ", ";
      os << topo_.channels[c].labels[s.queues[c][i]];
    }
    os << "]";
  }
  for (size_t l = 0; l < s.holders.size(); ++l) {
    if (s.holders[l] == kNoHolder) continue;
    os << " " << lock_name(l) << "<-" << agent_name(s.holders[l]);
  }
  for (size_t c = 0; c < s.counters.size(); ++c) {
    os << " " << counter_name(c) << "=" << s.counters[c];
  }
  return os.str();
}

}  // namespace coord
