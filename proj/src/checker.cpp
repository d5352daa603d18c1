#include "coordcheck/checker.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "json.hpp"

namespace coord {

using nlohmann::ordered_json;

const char* to_string(CheckOutcome o) {
  switch (o) {
    case CheckOutcome::Pass: return "pass";
    case CheckOutcome::Violation: return "violation";
    case CheckOutcome::ResourceExhausted: return "resource-exhausted";
  }
  return "?";
}

void CheckConfig::validate(const Topology& t) const {
  if (channel_bound < 1) throw std::invalid_argument("channel bound must be >= 1");
  if (worker_count < 1) throw std::invalid_argument("worker count must be >= 1");
  for (const auto& [id, b] : per_channel_bounds) {
    if (b < 1) throw std::invalid_argument("bound for channel '" + id + "' must be >= 1");
    if (t.find_channel(id) == nullptr) {
      throw std::invalid_argument("bound override names unknown channel '" + id + "'");
    }
  }
}

int64_t CheckConfig::bound_for(const Topology& t, size_t channel) const {
  auto it = per_channel_bounds.find(t.channels[channel].id);
  return it == per_channel_bounds.end() ? channel_bound : it->second;
}

// --- Property evaluation ---------------------------------------------------

namespace {

void priority_sort(std::vector<Violation>& v) {
  std::stable_sort(v.begin(), v.end(), [](const Violation& a, const Violation& b) {
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
}

// Bound/termination properties of the state itself; deadlock is not included
// because it needs the enabled-choice set.
std::vector<Violation> structural_violations(const System& sys, const GlobalState& s,
                                             const std::vector<int64_t>& bounds) {
  std::vector<Violation> out;
  for (size_t c = 0; c < s.queues.size(); ++c) {
    if (static_cast<int64_t>(s.queues[c].size()) > bounds[c]) {
      out.push_back({ViolationKind::QueueBoundExceeded,
                     "channel " + sys.channel_name(c) + " reached depth " +
                         std::to_string(s.queues[c].size()) + ", bound " +
                         std::to_string(bounds[c])});
    }
  }
  if (sys.is_all_done(s)) {
    for (size_t l = 0; l < s.holders.size(); ++l) {
      if (s.holders[l] != kNoHolder) {
        out.push_back({ViolationKind::OrphanLock,
                       "lock " + sys.lock_name(l) + " still held by " +
                           sys.agent_name(s.holders[l]) + " after all agents finished"});
      }
    }
    for (size_t c = 0; c < s.queues.size(); ++c) {
      if (!s.queues[c].empty()) {
        out.push_back({ViolationKind::UndrainedChannel,
                       "channel " + sys.channel_name(c) + " holds " +
                           std::to_string(s.queues[c].size()) +
                           " message(s) after all agents finished"});
      }
    }
  }
  return out;
}

std::vector<int64_t> compile_bounds(const System& sys, const CheckConfig& cfg) {
  std::vector<int64_t> bounds(sys.channel_count());
  for (size_t c = 0; c < bounds.size(); ++c) bounds[c] = cfg.bound_for(sys.topology(), c);
  return bounds;
}

Violation make_deadlock(const System& sys, const GlobalState& s) {
  auto blocked = sys.blocked_agents(s);
  std::map<std::string, int> by_guard;
  for (const auto& [agent, guard] : blocked) ++by_guard[guard];
  std::ostringstream os;
  os << "no agent has an enabled step; ";
  bool first = true;
  for (const auto& [guard, n] : by_guard) {
    if (!first) os << ", ";
    first = false;
    os << n << " agent" << (n == 1 ? "" : "s") << " blocked on " << guard;
  }
  if (blocked.empty()) os << "0 agents blocked";
  return {ViolationKind::Deadlock, os.str()};
}

}  // namespace

std::vector<Violation> evaluate_properties(const System& sys, const GlobalState& s,
                                           const CheckConfig& cfg,
                                           const std::vector<Violation>& step_violations) {
  std::vector<Violation> out = step_violations;
  auto structural = structural_violations(sys, s, compile_bounds(sys, cfg));
  out.insert(out.end(), structural.begin(), structural.end());
  if (!sys.is_all_done(s) && sys.enabled_choices(s).empty()) {
    out.push_back(make_deadlock(sys, s));
  }
  priority_sort(out);
  return out;
}

// --- BFS -------------------------------------------------------------------

namespace {

constexpr uint32_t kNoParent = 0xFFFFFFFFu;

struct FpHash {
  size_t operator()(const Fingerprint& fp) const { return static_cast<size_t>(fp.lo); }
};

struct Rec {
  std::vector<uint8_t> enc;
  Fingerprint fp;
  uint32_t parent = kNoParent;
  StepChoice via;
  uint64_t edge_seq = 0;
};

struct Candidate {
  uint64_t edge_seq = 0;
  uint32_t parent = kNoParent;
  StepChoice via;
  std::vector<uint8_t> final_enc;
  std::vector<Violation> violations;
};

class Bfs {
 public:
  Bfs(const System& sys, const CheckConfig& cfg)
      : sys_(sys), cfg_(cfg), bounds_(compile_bounds(sys, cfg)) {}

  Verdict run() {
    start_ = std::chrono::steady_clock::now();
    GlobalState init = sys_.initial_state();
    std::vector<uint8_t> enc = sys_.encode(init);
    Fingerprint fp = fingerprint_bytes(enc);
    recs_.push_back({std::move(enc), fp, kNoParent, {}, 0});
    seen_.emplace(fp, 0u);
    frontier_.push_back(0);
    {
      auto structural = structural_violations(sys_, init, bounds_);
      if (!structural.empty()) {
        pending_.push_back({0, kNoParent, {}, recs_[0].enc, std::move(structural)});
      }
    }

    uint32_t level = 0;
    for (;;) {
      if (out_of_time()) return exhausted(level);

      // Expand the whole frontier before judging this level: deadlock
      // candidates compete with structural/step candidates of equal depth.
      std::vector<std::vector<System::Expansion>> results(frontier_.size());
      std::vector<uint8_t> done_flags(frontier_.size(), 0);
      expand_frontier(results, done_flags);
      if (aborted_) return exhausted(level);

      for (size_t pos = 0; pos < frontier_.size(); ++pos) {
        if (results[pos].empty() && !done_flags[pos]) {
          const Rec& rec = recs_[frontier_[pos]];
          GlobalState st = sys_.decode(rec.enc);
          add_candidate({rec.edge_seq, rec.parent, rec.via, rec.enc, {make_deadlock(sys_, st)}});
        }
      }

      if (!pending_.empty()) return report(level);
      if (frontier_.empty()) return pass(level == 0 ? 0 : level - 1);

      // Merge edges in canonical (frontier position, expansion order); the
      // first edge reaching a fingerprint becomes its parent, which is what
      // makes traces worker-count invariant.
      std::vector<uint32_t> next_frontier;
      for (size_t pos = 0; pos < frontier_.size(); ++pos) {
        uint32_t cur = frontier_[pos];
        for (auto& e : results[pos]) {
          ++edge_seq_;
          ++transitions_;
          std::vector<uint8_t> child_enc = sys_.encode(e.outcome.next);
          Fingerprint child_fp = fingerprint_bytes(child_enc);
          std::vector<Violation> viols = std::move(e.outcome.violations);
          auto structural = structural_violations(sys_, e.outcome.next, bounds_);
          viols.insert(viols.end(), structural.begin(), structural.end());
          auto it = seen_.find(child_fp);
          if (it == seen_.end()) {
            uint32_t id = static_cast<uint32_t>(recs_.size());
            seen_.emplace(child_fp, id);
            recs_.push_back({child_enc, child_fp, cur, e.choice, edge_seq_});
            next_frontier.push_back(id);
            if (cfg_.state_limit && recs_.size() > *cfg_.state_limit) {
              return exhausted(level + 1);
            }
          }
          if (!viols.empty()) {
            add_candidate({edge_seq_, cur, e.choice, std::move(child_enc), std::move(viols)});
          }
          if ((transitions_ & 0xFFF) == 0 && out_of_time()) return exhausted(level);
        }
      }
      frontier_ = std::move(next_frontier);
      ++level;
    }
  }

 private:
  bool out_of_time() const {
    if (!cfg_.time_limit) return false;
    return std::chrono::steady_clock::now() - start_ >= *cfg_.time_limit;
  }

  std::chrono::microseconds elapsed() const {
    auto us = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - start_);
    return us.count() > 0 ? us : std::chrono::microseconds(1);
  }

  void expand_frontier(std::vector<std::vector<System::Expansion>>& results,
                       std::vector<uint8_t>& done_flags) {
    const size_t n = frontier_.size();
    constexpr size_t kChunk = 128;
    std::atomic<size_t> cursor{0};
    auto work = [&]() {
      for (;;) {
        size_t begin = cursor.fetch_add(kChunk);
        if (begin >= n || aborted_.load(std::memory_order_relaxed)) return;
        size_t end = std::min(begin + kChunk, n);
        for (size_t pos = begin; pos < end; ++pos) {
          GlobalState st = sys_.decode(recs_[frontier_[pos]].enc);
          done_flags[pos] = sys_.is_all_done(st) ? 1 : 0;
          results[pos] = sys_.expand(st);
        }
        if (out_of_time()) aborted_.store(true, std::memory_order_relaxed);
      }
    };
    unsigned workers = std::min<unsigned>(cfg_.worker_count,
                                          static_cast<unsigned>((n + kChunk - 1) / kChunk));
    if (workers <= 1) {
      work();
      return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  void add_candidate(Candidate c) {
    auto it = pending_index_.find(c.edge_seq);
    if (it != pending_index_.end()) {
      auto& existing = pending_[it->second];
      existing.violations.insert(existing.violations.end(), c.violations.begin(),
                                 c.violations.end());
      return;
    }
    pending_index_.emplace(c.edge_seq, pending_.size());
    pending_.push_back(std::move(c));
  }

  CheckStats stats(uint32_t depth) const {
    CheckStats st;
    st.distinct_states = recs_.size();
    st.transitions = transitions_;
    st.max_depth = depth;
    st.duration = elapsed();
    return st;
  }

  Verdict pass(uint32_t depth) {
    Verdict v;
    v.outcome = CheckOutcome::Pass;
    v.stats = stats(depth);
    if (cfg_.collect_fingerprints) {
      v.fingerprints.reserve(recs_.size());
      for (const auto& r : recs_) v.fingerprints.push_back(r.fp);
    }
    return v;
  }

  Verdict exhausted(uint32_t depth) {
    Verdict v;
    v.outcome = CheckOutcome::ResourceExhausted;
    v.stats = stats(depth);
    return v;
  }

  Verdict report(uint32_t level) {
    const Candidate* winner = &pending_.front();
    for (const auto& c : pending_) {
      if (c.edge_seq < winner->edge_seq) winner = &c;
    }

    Verdict v;
    v.outcome = CheckOutcome::Violation;
    v.all_violations = winner->violations;
    priority_sort(v.all_violations);
    v.violation_kind = v.all_violations.front().kind;

    CounterexampleTrace trace;
    trace.initial = sys_.initial_state();
    std::vector<uint32_t> chain;
    for (uint32_t id = winner->parent; id != kNoParent; id = recs_[id].parent) {
      chain.push_back(id);
    }
    std::reverse(chain.begin(), chain.end());
    for (size_t i = 1; i < chain.size(); ++i) {
      trace.steps.push_back({recs_[chain[i]].via, recs_[chain[i]].fp});
    }
    if (winner->parent != kNoParent) {
      trace.steps.push_back({winner->via, fingerprint_bytes(winner->final_enc)});
    }
    trace.final_violation = v.all_violations.front();
    replay_self_check(trace);
    v.trace = std::move(trace);
    v.stats = stats(level);
    v.stats.max_depth = static_cast<uint32_t>(v.trace->steps.size());
    if (cfg_.collect_fingerprints) {
      v.fingerprints.reserve(recs_.size());
      for (const auto& r : recs_) v.fingerprints.push_back(r.fp);
    }
    return v;
  }

  // Replays the trace through apply_choice and confirms digests and the final
  // violation. A mismatch is a checker bug, never a user error.
  void replay_self_check(const CounterexampleTrace& trace) {
    GlobalState s = trace.initial;
    std::vector<Violation> last_step_violations;
    for (const auto& step : trace.steps) {
      StepOutcome out = sys_.apply_choice(s, step.choice);
      s = std::move(out.next);
      last_step_violations = std::move(out.violations);
      if (fingerprint_bytes(sys_.encode(s)) != step.digest) {
        throw std::logic_error("internal replay mismatch: trace digest diverged");
      }
    }
    std::vector<Violation> final_violations = last_step_violations;
    auto structural = structural_violations(sys_, s, bounds_);
    final_violations.insert(final_violations.end(), structural.begin(), structural.end());
    if (!sys_.is_all_done(s) && sys_.enabled_choices(s).empty()) {
      final_violations.push_back(make_deadlock(sys_, s));
    }
    for (const auto& viol : final_violations) {
      if (viol.kind == trace.final_violation.kind) return;
    }
    throw std::logic_error("internal replay mismatch: final violation not reproduced");
  }

  const System& sys_;
  const CheckConfig& cfg_;
  std::vector<int64_t> bounds_;
  std::chrono::steady_clock::time_point start_;
  std::vector<Rec> recs_;
  std::unordered_map<Fingerprint, uint32_t, FpHash> seen_;
  std::vector<uint32_t> frontier_;
  std::vector<Candidate> pending_;
  std::unordered_map<uint64_t, size_t> pending_index_;
  uint64_t edge_seq_ = 0;
  uint64_t transitions_ = 0;
  std::atomic<bool> aborted_{false};
};

}  // namespace

Verdict check(const System& sys, const CheckConfig& cfg) {
  cfg.validate(sys.topology());
  Bfs bfs(sys, cfg);
  return bfs.run();
}

// --- Trace rendering -------------------------------------------------------

namespace {

std::string shout(ViolationKind k) {
  switch (k) {
    case ViolationKind::MutualExclusionBreach: return "MUTUAL_EXCLUSION_BREACH";
    case ViolationKind::Deadlock: return "DEADLOCK";
    case ViolationKind::QueueBoundExceeded: return "QUEUE_BOUND_EXCEEDED";
    case ViolationKind::CounterOverRelease: return "COUNTER_OVER_RELEASE";
    case ViolationKind::LocalDomainExit: return "LOCAL_DOMAIN_EXIT";
    case ViolationKind::OrphanLock: return "ORPHAN_LOCK";
    case ViolationKind::UndrainedChannel: return "UNDRAINED_CHANNEL";
  }
  return "VIOLATION";
}

}  // namespace

std::string render_trace(const System& sys, const Verdict& v, const CheckConfig& cfg,
                         TraceStyle style) {
  if (v.outcome != CheckOutcome::Violation || !v.trace) {
    throw std::invalid_argument("render_trace requires a violation verdict");
  }
  const CounterexampleTrace& trace = *v.trace;

  if (style == TraceStyle::Human) {
    std::ostringstream os;
    os << "counterexample: " << trace.steps.size() << " step(s) to "
       << to_string(trace.final_violation.kind) << "\n";
    os << "initial: " << sys.render_state(trace.initial) << "\n";
    for (size_t i = 0; i < trace.steps.size(); ++i) {
      const auto& st = trace.steps[i];
      os << (i + 1) << ". " << sys.agent_name(st.choice.agent) << ", "
         << sys.step_label(st.choice.agent, st.choice.step);
      if (st.choice.branch >= 0) os << ", branch " << st.choice.branch;
      os << " — ";
      for (size_t e = 0; e < st.choice.effects.size(); ++e) {
        if (e) os << "; ";
        os << sys.render_effect(st.choice.effects[e]);
      }
      if (st.choice.effects.empty()) os << "(no effects)";
      os << " — " << to_hex(st.digest).substr(0, 12) << "\n";
    }
    os << shout(trace.final_violation.kind) << ": " << trace.final_violation.detail << "\n";
    return os.str();
  }

  ordered_json doc;
  doc["schema"] = "coordcheck.trace/1";
  ordered_json cfg_echo;
  cfg_echo["channel_bound"] = cfg.channel_bound;
  cfg_echo["per_channel_bounds"] = ordered_json::object();
  for (const auto& [id, b] : cfg.per_channel_bounds) cfg_echo["per_channel_bounds"][id] = b;
  cfg_echo["workers"] = cfg.worker_count;
  doc["config"] = std::move(cfg_echo);
  doc["outcome"] = "violation";
  ordered_json viol;
  viol["kind"] = to_string(trace.final_violation.kind);
  viol["detail"] = trace.final_violation.detail;
  doc["violation"] = std::move(viol);
  doc["initial_digest"] = to_hex(fingerprint_bytes(sys.encode(trace.initial)));
  ordered_json steps = ordered_json::array();
  for (const auto& st : trace.steps) {
    ordered_json step;
    step["agent"] = sys.agent_name(st.choice.agent);
    step["label"] = sys.step_label(st.choice.agent, st.choice.step);
    if (st.choice.branch >= 0) {
      step["branch"] = st.choice.branch;
    } else {
      step["branch"] = nullptr;
    }
    ordered_json effects = ordered_json::array();
    for (const auto& e : st.choice.effects) effects.push_back(sys.render_effect(e));
    step["effects"] = std::move(effects);
    step["digest"] = to_hex(st.digest);
    steps.push_back(std::move(step));
  }
  doc["steps"] = std::move(steps);
  ordered_json stats;
  stats["distinct_states"] = v.stats.distinct_states;
  stats["transitions"] = v.stats.transitions;
  stats["max_depth"] = v.stats.max_depth;
  stats["duration_us"] = v.stats.duration.count();
  doc["stats"] = std::move(stats);
  return doc.dump(2) + "\n";
}

MachineTrace parse_machine_trace(const std::string& text) {
  ordered_json doc = ordered_json::parse(text);
  MachineTrace mt;
  mt.schema = doc.at("schema").get<std::string>();
  if (mt.schema != "coordcheck.trace/1") {
    throw std::invalid_argument("unsupported trace schema '" + mt.schema + "'");
  }
  const auto& cfg = doc.at("config");
  mt.channel_bound = cfg.at("channel_bound").get<int64_t>();
  for (auto it = cfg.at("per_channel_bounds").begin(); it != cfg.at("per_channel_bounds").end();
       ++it) {
    mt.per_channel_bounds[it.key()] = it.value().get<int64_t>();
  }
  mt.worker_count = cfg.at("workers").get<unsigned>();
  mt.violation_kind = doc.at("violation").at("kind").get<std::string>();
  mt.violation_detail = doc.at("violation").at("detail").get<std::string>();
  for (const auto& step : doc.at("steps")) {
    MachineTraceStep s;
    s.agent = step.at("agent").get<std::string>();
    s.label = step.at("label").get<std::string>();
    s.branch = step.at("branch").is_null() ? -1 : step.at("branch").get<int>();
    for (const auto& e : step.at("effects")) s.effects.push_back(e.get<std::string>());
    s.digest = step.at("digest").get<std::string>();
    mt.steps.push_back(std::move(s));
  }
  const auto& stats = doc.at("stats");
  mt.stats.distinct_states = stats.at("distinct_states").get<uint64_t>();
  mt.stats.transitions = stats.at("transitions").get<uint64_t>();
  mt.stats.max_depth = stats.at("max_depth").get<uint32_t>();
  mt.stats.duration = std::chrono::microseconds(stats.at("duration_us").get<int64_t>());
  return mt;
}

}  // namespace coord
