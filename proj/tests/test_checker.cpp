#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "coordcheck/checker.hpp"
#include "coordcheck/fixtures.hpp"
#include "dfs_oracle.hpp"

using namespace coord;

namespace {

Verdict run(const System& sys, unsigned workers = 1, int64_t bound = 3) {
  CheckConfig cfg;
  cfg.worker_count = workers;
  cfg.channel_bound = bound;
  return check(sys, cfg);
}

std::set<Fingerprint> oracle_fingerprints(const System& sys, const oracle::Result& r) {
  std::set<Fingerprint> out;
  for (const auto& enc : r.states) out.insert(fingerprint_bytes(enc));
  return out;
}

std::string trace_signature(const Verdict& v) {
  std::string sig;
  for (const auto& step : v.trace->steps) {
    sig += std::to_string(step.choice.agent) + ":" + std::to_string(step.choice.step) + ":" +
           std::to_string(step.choice.branch) + ":" + to_hex(step.digest) + ";";
  }
  return sig;
}

}  // namespace

TEST_CASE("naive 3 philosophers deadlock with a minimal trace of 3") {
  System sys = philosophers_fixture(3, false).build();
  Verdict v = run(sys);
  REQUIRE(v.outcome == CheckOutcome::Violation);
  CHECK(*v.violation_kind == ViolationKind::Deadlock);
  REQUIRE(v.trace);
  CHECK(v.trace->steps.size() == 3);

  oracle::Result o = oracle::explore(sys);
  CHECK(o.violation_found);
  CHECK(*o.min_violation_depth == 3);
  CHECK(o.kinds_at_min_depth.count(ViolationKind::Deadlock) == 1);
}

TEST_CASE("ordered 3 philosophers pass with the enumerator's state count") {
  System sys = philosophers_fixture(3, true).build();
  CheckConfig cfg;
  cfg.collect_fingerprints = true;
  Verdict v = check(sys, cfg);
  CHECK(v.outcome == CheckOutcome::Pass);
  CHECK_FALSE(v.trace);

  oracle::Result o = oracle::explore(sys);
  CHECK_FALSE(o.violation_found);
  // State count frozen from the independent enumerator.
  CHECK(o.states.size() == 132);
  CHECK(v.stats.distinct_states == o.states.size());
  std::set<Fingerprint> got(v.fingerprints.begin(), v.fingerprints.end());
  CHECK(got == oracle_fingerprints(sys, o));
}

TEST_CASE("producer done with an unconsumed message is an undrained channel") {
  System sys = fixture_by_name("drainage_undrained").build();
  Verdict v = run(sys);
  REQUIRE(v.outcome == CheckOutcome::Violation);
  CHECK(*v.violation_kind == ViolationKind::UndrainedChannel);
  CHECK(v.trace->steps.size() == 2);
}

TEST_CASE("two-agent circular wait is a deadlock") {
  System sys = fixture_by_name("circular_locks_unrepaired").build();
  Verdict v = run(sys);
  REQUIRE(v.outcome == CheckOutcome::Violation);
  CHECK(*v.violation_kind == ViolationKind::Deadlock);
  CHECK(v.trace->steps.size() == 2);

  oracle::Result o = oracle::explore(sys);
  CHECK(*o.min_violation_depth == 2);
  CHECK(o.kinds_at_min_depth.count(ViolationKind::Deadlock) == 1);
}

TEST_CASE("oracle equivalence on pass fixtures") {
  for (const char* name : {"parallel_build", "hub_repaired", "split_receive_repaired",
                           "drainage_clean", "circular_locks_repaired", "drug_pipeline_noop"}) {
    System sys = fixture_by_name(name).build();
    CheckConfig cfg;
    cfg.collect_fingerprints = true;
    Verdict v = check(sys, cfg);
    REQUIRE(v.outcome == CheckOutcome::Pass);
    oracle::Result o = oracle::explore(sys);
    CHECK_FALSE(o.violation_found);
    std::set<Fingerprint> got(v.fingerprints.begin(), v.fingerprints.end());
    CHECK(got == oracle_fingerprints(sys, o));
  }
}

TEST_CASE("oracle agrees on kind and minimal depth for violating fixtures") {
  for (const char* name :
       {"hub_unrepaired", "reviewer_unrepaired", "split_receive_unrepaired", "queue_overflow"}) {
    System sys = fixture_by_name(name).build();
    Verdict v = run(sys);
    REQUIRE(v.outcome == CheckOutcome::Violation);
    oracle::Result o = oracle::explore(sys);
    REQUIRE(o.violation_found);
    CHECK(v.trace->steps.size() == *o.min_violation_depth);
    CHECK(o.kinds_at_min_depth.count(*v.violation_kind) == 1);
  }
}

TEST_CASE("worker count never changes the verdict or the trace") {
  for (const char* name : {"philosophers_naive_5", "hub_unrepaired", "reviewer_unrepaired",
                           "split_receive_unrepaired", "philosophers_ordered_5"}) {
    System sys = fixture_by_name(name).build();
    Verdict v1 = run(sys, 1);
    Verdict v4 = run(sys, 4);
    Verdict v8 = run(sys, 8);
    CHECK(v1.outcome == v4.outcome);
    CHECK(v1.outcome == v8.outcome);
    CHECK(v1.stats.distinct_states == v4.stats.distinct_states);
    CHECK(v1.stats.distinct_states == v8.stats.distinct_states);
    if (v1.outcome == CheckOutcome::Violation) {
      CHECK(*v1.violation_kind == *v4.violation_kind);
      CHECK(*v1.violation_kind == *v8.violation_kind);
      CHECK(trace_signature(v1) == trace_signature(v4));
      CHECK(trace_signature(v1) == trace_signature(v8));
    }
  }
}

TEST_CASE("evaluate_properties: hand-built states trip exactly one property each") {
  System sys = fixture_by_name("parallel_build").build();
  CheckConfig cfg;

  // Clean termination: all done, everything released and drained.
  GlobalState done = sys.initial_state();
  for (auto& pc : done.pc) pc = kDonePc;
  CHECK(evaluate_properties(sys, done, cfg, {}).empty());

  // Orphan lock only.
  GlobalState orphan = done;
  orphan.holders[0] = 1;
  auto v1 = evaluate_properties(sys, orphan, cfg, {});
  REQUIRE(v1.size() == 1);
  CHECK(v1[0].kind == ViolationKind::OrphanLock);

  // Undrained channel only.
  GlobalState undrained = done;
  undrained.queues[0].push_back(0);
  auto v2 = evaluate_properties(sys, undrained, cfg, {});
  REQUIRE(v2.size() == 1);
  CHECK(v2[0].kind == ViolationKind::UndrainedChannel);

  // Queue bound only (agents still live so no termination properties fire).
  GlobalState overflow = sys.initial_state();
  overflow.queues[0] = {0, 0, 0, 0};
  auto v3 = evaluate_properties(sys, overflow, cfg, {});
  REQUIRE(v3.size() == 1);
  CHECK(v3[0].kind == ViolationKind::QueueBoundExceeded);

  // Deadlock only: builder B waits for a message that never comes while
  // everyone else is done.
  GlobalState stuck = sys.initial_state();
  stuck.pc[0] = kDonePc;  // BUILDER_A
  stuck.pc[2] = kDonePc;  // INTEGRATOR
  // BUILDER_B stays at wait_types with an empty queue.
  auto v4 = evaluate_properties(sys, stuck, cfg, {});
  REQUIRE(v4.size() == 1);
  CHECK(v4[0].kind == ViolationKind::Deadlock);

  // Step-violation pass-through, priority-sorted ahead of later kinds.
  std::vector<Violation> step = {{ViolationKind::CounterOverRelease, "over"},
                                 {ViolationKind::MutualExclusionBreach, "bad release"},
                                 {ViolationKind::LocalDomainExit, "domain"}};
  auto v5 = evaluate_properties(sys, done, cfg, step);
  REQUIRE(v5.size() == 3);
  CHECK(v5[0].kind == ViolationKind::MutualExclusionBreach);
  CHECK(v5[1].kind == ViolationKind::CounterOverRelease);
  CHECK(v5[2].kind == ViolationKind::LocalDomainExit);

  // A state violating several properties reports all, priority first.
  GlobalState multi = done;
  multi.holders[0] = 0;
  multi.queues[0].push_back(0);
  auto v6 = evaluate_properties(sys, multi, cfg, {});
  REQUIRE(v6.size() == 2);
  CHECK(v6[0].kind == ViolationKind::OrphanLock);
  CHECK(v6[1].kind == ViolationKind::UndrainedChannel);
}

TEST_CASE("checker reports the highest-priority kind at the violating state") {
  // All-done state with both an orphan lock and an undrained queue: the
  // verdict picks OrphanLock, and all_violations lists both.
  Topology t = parse_topology(R"({"agents":[{"id":"A"},{"id":"B"}],
    "resources":[{"id":"L","type":"Lock"}],
    "channels":[{"id":"ch","from":"A","to":"B","labels":["m"]}]})");
  System sys(parse_protocol("process A\n  go:\n    acquire L\n    send ch \"m\"\n"
                            "process B\n  go:\n    skip\n"),
             t);
  Verdict v = run(sys);
  REQUIRE(v.outcome == CheckOutcome::Violation);
  CHECK(*v.violation_kind == ViolationKind::OrphanLock);
  CHECK(v.all_violations.size() == 2);
}

TEST_CASE("queue bound is configurable per channel and converts to pass") {
  System sys = fixture_by_name("queue_overflow").build();
  CHECK(run(sys, 1, 3).outcome == CheckOutcome::Violation);
  CHECK(run(sys, 1, 5).outcome == CheckOutcome::Pass);
  CHECK(run(sys, 1, 7).outcome == CheckOutcome::Pass);

  CheckConfig cfg;
  cfg.channel_bound = 3;
  cfg.per_channel_bounds["ch_data"] = 7;
  CHECK(check(sys, cfg).outcome == CheckOutcome::Pass);
}

TEST_CASE("lock-only protocols pass at any bound") {
  System sys = fixture_by_name("circular_locks_repaired").build();
  for (int64_t b : {1, 3, 9}) CHECK(run(sys, 1, b).outcome == CheckOutcome::Pass);
}

TEST_CASE("invalid configurations are rejected") {
  System sys = fixture_by_name("drainage_clean").build();
  CheckConfig bad_bound;
  bad_bound.channel_bound = 0;
  CHECK_THROWS_AS(check(sys, bad_bound), std::invalid_argument);
  CheckConfig bad_workers;
  bad_workers.worker_count = 0;
  CHECK_THROWS_AS(check(sys, bad_workers), std::invalid_argument);
  CheckConfig bad_override;
  bad_override.per_channel_bounds["nope"] = 3;
  CHECK_THROWS_AS(check(sys, bad_override), std::invalid_argument);
}

TEST_CASE("state and time limits yield ResourceExhausted") {
  System sys = philosophers_fixture(5, true).build();
  CheckConfig limited;
  limited.state_limit = 10;
  Verdict v = check(sys, limited);
  CHECK(v.outcome == CheckOutcome::ResourceExhausted);
  CHECK_FALSE(v.trace);

  CheckConfig timed;
  timed.time_limit = std::chrono::milliseconds(0);
  CHECK(check(sys, timed).outcome == CheckOutcome::ResourceExhausted);
}

TEST_CASE("stats sanity") {
  for (const char* name : {"philosophers_ordered_3", "hub_unrepaired", "drainage_clean"}) {
    System sys = fixture_by_name(name).build();
    Verdict v = run(sys);
    CHECK(v.stats.distinct_states >= v.stats.max_depth + 1);
    CHECK(v.stats.duration.count() > 0);
    CHECK(v.stats.transitions > 0);
  }
}

TEST_CASE("machine trace renders, parses back, and replays bit-for-bit") {
  System sys = philosophers_fixture(3, false).build();
  CheckConfig cfg;
  cfg.worker_count = 4;
  Verdict v = check(sys, cfg);
  REQUIRE(v.outcome == CheckOutcome::Violation);

  std::string machine = render_trace(sys, v, cfg, TraceStyle::Machine);
  MachineTrace mt = parse_machine_trace(machine);
  CHECK(mt.schema == "coordcheck.trace/1");
  CHECK(mt.channel_bound == 3);
  CHECK(mt.worker_count == 4);
  CHECK(mt.violation_kind == "Deadlock");
  REQUIRE(mt.steps.size() == v.trace->steps.size());

  // Replay through apply_choice reproduces every digest and the violation.
  GlobalState s = sys.initial_state();
  for (size_t i = 0; i < mt.steps.size(); ++i) {
    const auto& step = mt.steps[i];
    int agent = sys.topology().agent_index(step.agent);
    REQUIRE(agent >= 0);
    StepChoice c;
    c.agent = static_cast<uint16_t>(agent);
    c.step = static_cast<uint16_t>(sys.step_index_of(agent, step.label));
    c.branch = step.branch;
    s = sys.apply_choice(s, c).next;
    CHECK(to_hex(fingerprint_bytes(sys.encode(s))) == step.digest);
  }
  CHECK_FALSE(sys.is_all_done(s));
  CHECK(sys.enabled_choices(s).empty());  // the deadlock, reproduced

  // Round trip: rendering the parsed form again is stable.
  CHECK(parse_machine_trace(machine).steps.size() == mt.steps.size());
}

TEST_CASE("human trace format matches the documented shape") {
  System sys = philosophers_fixture(3, false).build();
  CheckConfig cfg;
  Verdict v = check(sys, cfg);
  std::string text = render_trace(sys, v, cfg, TraceStyle::Human);
  CHECK(text.find("1. PHIL_0") != std::string::npos);
  CHECK(text.find("DEADLOCK: no agent has an enabled step; 3 agents blocked on AcquireLock") !=
        std::string::npos);

  System orphan_sys = [] {
    Topology t = parse_topology(R"({"agents":[{"id":"DEVELOPER_A"}],
      "resources":[{"id":"REPO","type":"Lock"}],"channels":[]})");
    return System(parse_protocol("process DEVELOPER_A\n  go:\n    acquire REPO\n"), t);
  }();
  Verdict vo = run(orphan_sys);
  REQUIRE(vo.outcome == CheckOutcome::Violation);
  CHECK(*vo.violation_kind == ViolationKind::OrphanLock);
  std::string orphan_text = render_trace(orphan_sys, vo, cfg, TraceStyle::Human);
  // The final line names the lock and the holder.
  auto last_line = orphan_text.rfind("ORPHAN_LOCK");
  REQUIRE(last_line != std::string::npos);
  CHECK(orphan_text.find("REPO", last_line) != std::string::npos);
  CHECK(orphan_text.find("DEVELOPER_A", last_line) != std::string::npos);
}

TEST_CASE("render_trace refuses non-violation verdicts") {
  System sys = fixture_by_name("drainage_clean").build();
  CheckConfig cfg;
  Verdict v = check(sys, cfg);
  REQUIRE(v.outcome == CheckOutcome::Pass);
  CHECK_THROWS_AS(render_trace(sys, v, cfg, TraceStyle::Human), std::invalid_argument);
}

TEST_CASE("step violations surface as verdicts: counter over-release") {
  Topology t = parse_topology(R"({"agents":[{"id":"A"}],
    "resources":[{"id":"K","type":"Counter","config":{"initial":8}}],"channels":[]})");
  System sys(parse_protocol("process A\n  go:\n    ctr_release K\n"), t);
  Verdict v = run(sys);
  REQUIRE(v.outcome == CheckOutcome::Violation);
  CHECK(*v.violation_kind == ViolationKind::CounterOverRelease);
  CHECK(v.trace->steps.size() == 1);

  oracle::Result o = oracle::explore(sys);
  CHECK(*o.min_violation_depth == 1);
  CHECK(o.kinds_at_min_depth.count(ViolationKind::CounterOverRelease) == 1);
}

TEST_CASE("a violating edge into an already-seen state is still reported") {
  // The over-release clamps and the step loops back to its own label, so the
  // violating edge lands on the source state itself; dedup must not swallow
  // the violation.
  Topology t = parse_topology(R"({"agents":[{"id":"A"},{"id":"B"}],
    "resources":[{"id":"K","type":"Counter","config":{"initial":2}}],"channels":[]})");
  System sys(parse_protocol("process A\n  spin:\n    skip\n    goto spin\n"
                            "process B\n  oops:\n    ctr_release K\n    goto oops\n"),
             t);
  Verdict v = run(sys);
  REQUIRE(v.outcome == CheckOutcome::Violation);
  CHECK(*v.violation_kind == ViolationKind::CounterOverRelease);
  CHECK(v.trace->steps.size() == 1);
}
