#include "coordcheck/fixtures.hpp"

#include <sstream>
#include <stdexcept>

namespace coord {

System Fixture::build() const {
  return System(parse_protocol(protocol_text), parse_topology(topology_text));
}

Fixture philosophers_fixture(int n, bool ordered, int meals) {
  if (n < 2) throw std::invalid_argument("philosophers need n >= 2");
  Topology topo;
  for (int i = 0; i < n; ++i) topo.agents.push_back({"PHIL_" + std::to_string(i), {}});
  for (int i = 0; i < n; ++i) {
    topo.resources.push_back({"fork_" + std::to_string(i), ResourceKind::Lock, std::nullopt});
  }

  std::ostringstream proto;
  for (int i = 0; i < n; ++i) {
    int left = i;
    int right = (i + 1) % n;
    int first = left;
    int second = right;
    if (ordered && second < first) std::swap(first, second);
    if (i) proto << "\n";
    proto << "process PHIL_" << i << "\n";
    proto << "  local meals : int[0.." << meals << "] = 0\n";
    proto << "  think:\n";
    proto << "    skip\n";
    proto << "    acquire fork_" << first << "\n";
    proto << "  take_second:\n";
    proto << "    acquire fork_" << second << "\n";
    proto << "  eat:\n";
    proto << "    skip\n";
    proto << "  put_down:\n";
    proto << "    release fork_" << first << "\n";
    proto << "    release fork_" << second << "\n";
    proto << "  next_round:\n";
    proto << "    meals = meals + 1\n";
    proto << "    if meals < " << meals << "\n";
    proto << "      goto think\n";
    proto << "    end\n";
  }

  Fixture f;
  f.name = std::string("philosophers_") + (ordered ? "ordered_" : "naive_") + std::to_string(n);
  f.topology_text = serialize_topology(topo);
  f.protocol_text = proto.str();
  if (ordered) {
    f.expected_outcome = CheckOutcome::Pass;
    f.origin = "global fork ordering breaks the circular wait; every philosopher finishes";
  } else {
    f.expected_outcome = CheckOutcome::Violation;
    f.expected_kind = ViolationKind::Deadlock;
    f.origin = "each philosopher grabs its own fork first; one round of left grabs deadlocks";
  }
  return f;
}

namespace {

Fixture parallel_build_fixture() {
  Topology topo;
  topo.agents = {{"BUILDER_A", {}}, {"BUILDER_B", {}}, {"INTEGRATOR", {}}};
  topo.resources = {{"CORE_LIB", ResourceKind::Lock, std::nullopt},
                    {"TYPE_DEFS", ResourceKind::Lock, std::nullopt}};
  topo.channels = {
      {"ch_types", {"BUILDER_A"}, {"BUILDER_B"}, {"types_ready"}},
      {"ch_a_artifact", {"BUILDER_A"}, {"INTEGRATOR"}, {"artifact"}},
      {"ch_b_artifact", {"BUILDER_B"}, {"INTEGRATOR"}, {"artifact"}},
  };

  Fixture f;
  f.name = "parallel_build";
  f.topology_text = serialize_topology(topo);
  f.protocol_text = R"(process BUILDER_A
  update_types:
    acquire TYPE_DEFS
  publish_types:
    release TYPE_DEFS
    send ch_types "types_ready"
  compile:
    acquire CORE_LIB
  finish_compile:
    release CORE_LIB
    send ch_a_artifact "artifact"

process BUILDER_B
  wait_types:
    receive ch_types {"types_ready"}
  compile:
    acquire CORE_LIB
  finish_compile:
    release CORE_LIB
    send ch_b_artifact "artifact"

process INTEGRATOR
  link_first:
    receive_any ch_a_artifact {"artifact"}, ch_b_artifact {"artifact"}
  link_second:
    receive_any ch_a_artifact {"artifact"}, ch_b_artifact {"artifact"}
)";
  f.expected_outcome = CheckOutcome::Pass;
  f.origin = "two builders contend for a shared core library; an integrator links both artifacts";
  return f;
}

Topology hub_topology() {
  Topology topo;
  topo.agents = {{"HUB", {}}, {"SAT_A", {}}, {"SAT_B", {}}};
  topo.channels = {
      {"ch_a_req", {"SAT_A"}, {"HUB"}, {"request", "satellite_done"}},
      {"ch_b_req", {"SAT_B"}, {"HUB"}, {"request", "satellite_done"}},
      {"ch_hub_a", {"HUB"}, {"SAT_A"}, {"response"}},
      {"ch_hub_b", {"HUB"}, {"SAT_B"}, {"response"}},
  };
  return topo;
}

// Satellite retry structure: the failure arm is last, which is where fault
// injection lands.
constexpr const char* kHubUnrepairedProtocol = R"(process HUB
  local served : int[0..2] = 0

  serve:
    if served == 2
      goto Done
    end
  pick:
    either
      receive ch_a_req {"request"}
      send ch_hub_a "response"
    or
      receive ch_b_req {"request"}
      send ch_hub_b "response"
    end
  bump:
    served = served + 1
    goto serve

process SAT_A
  work:
    send ch_a_req "request"
  await:
    receive ch_hub_a {"response"}
  tool:
    either
      goto Done
    or
      goto work
    end

process SAT_B
  work:
    send ch_b_req "request"
  await:
    receive ch_hub_b {"response"}
  tool:
    either
      goto Done
    or
      goto work
    end
)";

constexpr const char* kHubRepairedProtocol = R"(process HUB
  local a_done : bool = false
  local b_done : bool = false
  local msg : int[0..1] = 0

  serve:
    if a_done and b_done
      goto Done
    end
  pick:
    either
      receive ch_a_req {"request", "satellite_done"} -> msg
      if msg == 1
        a_done = true
      else
        send ch_hub_a "response"
      end
    or
      receive ch_b_req {"request", "satellite_done"} -> msg
      if msg == 1
        b_done = true
      else
        send ch_hub_b "response"
      end
    end
  loop_back:
    goto serve

process SAT_A
  work:
    send ch_a_req "request"
  await:
    receive ch_hub_a {"response"}
  tool:
    either
      send ch_a_req "satellite_done"
      goto Done
    or
      goto work
    end

process SAT_B
  work:
    send ch_b_req "request"
  await:
    receive ch_hub_b {"response"}
  tool:
    either
      send ch_b_req "satellite_done"
      goto Done
    or
      goto work
    end
)";

Topology circular_topology() {
  Topology topo;
  topo.agents = {{"DEVELOPER_A", {}}, {"CI_RUNNER", {}}};
  topo.resources = {{"REPO", ResourceKind::Lock, std::nullopt},
                    {"BUILD_SERVER", ResourceKind::Lock, std::nullopt}};
  return topo;
}

constexpr const char* kCircularUnrepairedProtocol = R"(process DEVELOPER_A
  start_work:
    acquire REPO
  request_build:
    acquire BUILD_SERVER
  integrate:
    release BUILD_SERVER
    release REPO

process CI_RUNNER
  start_ci:
    acquire BUILD_SERVER
  checkout:
    acquire REPO
  report:
    release REPO
    release BUILD_SERVER
)";

constexpr const char* kCircularRepairedProtocol = R"(process DEVELOPER_A
  start_work:
    acquire REPO
  integrate:
    release REPO

process CI_RUNNER
  start_ci:
    acquire BUILD_SERVER
  report:
    release BUILD_SERVER
)";

Topology reviewer_topology() {
  Topology topo;
  topo.agents = {{"REVIEWER", {}}, {"DEV_A", {}}, {"DEV_B", {}}, {"DEV_C", {}}};
  topo.channels = {
      {"ch_a_review", {"DEV_A"}, {"REVIEWER"}, {"submission", "review_done"}},
      {"ch_b_review", {"DEV_B"}, {"REVIEWER"}, {"submission", "review_done"}},
      {"ch_c_review", {"DEV_C"}, {"REVIEWER"}, {"submission", "review_done"}},
      {"ch_rev_a", {"REVIEWER"}, {"DEV_A"}, {"approved", "revise"}},
      {"ch_rev_b", {"REVIEWER"}, {"DEV_B"}, {"approved", "revise"}},
      {"ch_rev_c", {"REVIEWER"}, {"DEV_C"}, {"approved", "revise"}},
  };
  return topo;
}

// The reviewer exits after a fixed verdict count even though a "revise"
// verdict sends the developer back into review.
constexpr const char* kReviewerUnrepairedProtocol = R"(process REVIEWER
  local rv_count : int[0..3] = 0
  local which : int[0..2] = 0
  local verdict : int[0..1] = 0

  rev_loop:
    if rv_count == 3
      goto Done
    end
  recv:
    either
      receive ch_a_review {"submission"}
      which = 0
    or
      receive ch_b_review {"submission"}
      which = 1
    or
      receive ch_c_review {"submission"}
      which = 2
    end
  decide:
    either
      verdict = 0
    or
      verdict = 1
    end
  reply:
    if which == 0
      if verdict == 0
        send ch_rev_a "approved"
      else
        send ch_rev_a "revise"
      end
    else
      if which == 1
        if verdict == 0
          send ch_rev_b "approved"
        else
          send ch_rev_b "revise"
        end
      else
        if verdict == 0
          send ch_rev_c "approved"
        else
          send ch_rev_c "revise"
        end
      end
    end
  bump:
    rv_count = rv_count + 1
    goto rev_loop

process DEV_A
  local msg : int[0..1] = 0

  submit:
    send ch_a_review "submission"
  await:
    receive ch_rev_a {"approved", "revise"} -> msg
  react:
    if msg == 1
      goto submit
    end

process DEV_B
  local msg : int[0..1] = 0

  submit:
    send ch_b_review "submission"
  await:
    receive ch_rev_b {"approved", "revise"} -> msg
  react:
    if msg == 1
      goto submit
    end

process DEV_C
  local msg : int[0..1] = 0

  submit:
    send ch_c_review "submission"
  await:
    receive ch_rev_c {"approved", "revise"} -> msg
  react:
    if msg == 1
      goto submit
    end
)";

// Per-developer completion signals replace the verdict count.
constexpr const char* kReviewerRepairedProtocol = R"(process REVIEWER
  local done_count : int[0..3] = 0
  local which : int[0..2] = 0
  local msg : int[0..1] = 0
  local verdict : int[0..1] = 0

  rev_loop:
    if done_count == 3
      goto Done
    end
  recv:
    either
      receive ch_a_review {"submission", "review_done"} -> msg
      which = 0
    or
      receive ch_b_review {"submission", "review_done"} -> msg
      which = 1
    or
      receive ch_c_review {"submission", "review_done"} -> msg
      which = 2
    end
  classify:
    if msg == 1
      goto mark_done
    end
  decide:
    either
      verdict = 0
    or
      verdict = 1
    end
  reply:
    if which == 0
      if verdict == 0
        send ch_rev_a "approved"
      else
        send ch_rev_a "revise"
      end
    else
      if which == 1
        if verdict == 0
          send ch_rev_b "approved"
        else
          send ch_rev_b "revise"
        end
      else
        if verdict == 0
          send ch_rev_c "approved"
        else
          send ch_rev_c "revise"
        end
      end
    end
  back:
    goto rev_loop
  mark_done:
    done_count = done_count + 1
    goto rev_loop

process DEV_A
  local msg : int[0..1] = 0

  submit:
    send ch_a_review "submission"
  await:
    receive ch_rev_a {"approved", "revise"} -> msg
  react:
    if msg == 1
      goto submit
    end
  declare_done:
    send ch_a_review "review_done"

process DEV_B
  local msg : int[0..1] = 0

  submit:
    send ch_b_review "submission"
  await:
    receive ch_rev_b {"approved", "revise"} -> msg
  react:
    if msg == 1
      goto submit
    end
  declare_done:
    send ch_b_review "review_done"

process DEV_C
  local msg : int[0..1] = 0

  submit:
    send ch_c_review "submission"
  await:
    receive ch_rev_c {"approved", "revise"} -> msg
  react:
    if msg == 1
      goto submit
    end
  declare_done:
    send ch_c_review "review_done"
)";

Topology split_receive_topology() {
  Topology topo;
  topo.agents = {{"DISPATCHER", {}}, {"LANE_A", {}}, {"LANE_B", {}}, {"WORKER", {}}};
  topo.channels = {
      {"ch_dispatch_a", {"DISPATCHER"}, {"LANE_A"}, {"job", "idle"}},
      {"ch_dispatch_b", {"DISPATCHER"}, {"LANE_B"}, {"job", "idle"}},
      {"ch_a_out", {"LANE_A"}, {"WORKER"}, {"result"}},
      {"ch_b_out", {"LANE_B"}, {"WORKER"}, {"result"}},
  };
  return topo;
}

// The worker commits to a lane before any result exists; picking the idle
// lane leaves it waiting forever.
constexpr const char* kSplitUnrepairedProtocol = R"(process DISPATCHER
  dispatch:
    either
      send ch_dispatch_a "job"
      send ch_dispatch_b "idle"
    or
      send ch_dispatch_a "idle"
      send ch_dispatch_b "job"
    end

process LANE_A
  local duty : int[0..1] = 0

  await:
    receive ch_dispatch_a {"job", "idle"} -> duty
  act:
    if duty == 0
      send ch_a_out "result"
    end

process LANE_B
  local duty : int[0..1] = 0

  await:
    receive ch_dispatch_b {"job", "idle"} -> duty
  act:
    if duty == 0
      send ch_b_out "result"
    end

process WORKER
  local lane : int[0..1] = 0

  commit:
    either
      lane = 0
    or
      lane = 1
    end
  collect:
    if lane == 0
      receive ch_a_out {"result"}
    else
      receive ch_b_out {"result"}
    end
)";

// Branch selection and message availability are evaluated in one atomic step.
constexpr const char* kSplitRepairedProtocol = R"(process DISPATCHER
  dispatch:
    either
      send ch_dispatch_a "job"
      send ch_dispatch_b "idle"
    or
      send ch_dispatch_a "idle"
      send ch_dispatch_b "job"
    end

process LANE_A
  local duty : int[0..1] = 0

  await:
    receive ch_dispatch_a {"job", "idle"} -> duty
  act:
    if duty == 0
      send ch_a_out "result"
    end

process LANE_B
  local duty : int[0..1] = 0

  await:
    receive ch_dispatch_b {"job", "idle"} -> duty
  act:
    if duty == 0
      send ch_b_out "result"
    end

process WORKER
  collect:
    either
      receive ch_a_out {"result"}
    or
      receive ch_b_out {"result"}
    end
)";

Topology pipe_topology() {
  Topology topo;
  topo.agents = {{"PRODUCER", {}}, {"CONSUMER", {}}};
  topo.channels = {{"ch_data", {"PRODUCER"}, {"CONSUMER"}, {"data"}}};
  return topo;
}

constexpr const char* kDrainCleanProtocol = R"(process PRODUCER
  send_first:
    send ch_data "data"
  send_second:
    send ch_data "data"

process CONSUMER
  recv_first:
    receive ch_data {"data"}
  recv_second:
    receive ch_data {"data"}
)";

constexpr const char* kDrainUndrainedProtocol = R"(process PRODUCER
  produce:
    send ch_data "data"

process CONSUMER
  go_home:
    skip
)";

// One atomic burst of five sends; the consumer can only drain them all at
// once, so the burst depth is the queue's high-water mark.
constexpr const char* kQueueOverflowProtocol = R"(process PRODUCER
  burst:
    send ch_data "data"
    send ch_data "data"
    send ch_data "data"
    send ch_data "data"
    send ch_data "data"

process CONSUMER
  drain:
    receive ch_data {"data"}
    receive ch_data {"data"}
    receive ch_data {"data"}
    receive ch_data {"data"}
    receive ch_data {"data"}
)";

Topology drug_pipeline_topology() {
  Topology topo;
  topo.agents = {{"BIOLOGIST", {}},          {"CHEMIST", {}},
                 {"CLINICAL_LEAD", {}},      {"FORMULATION_SCIENTIST", {}},
                 {"PROJECT_DIRECTOR", {}},   {"REGULATORY_SPECIALIST", {}},
                 {"TOXICOLOGIST", {}}};
  topo.resources = {{"HPLC", ResourceKind::Lock, std::nullopt},
                    {"MASS_SPEC", ResourceKind::Lock, std::nullopt},
                    {"CELL_LAB", ResourceKind::Lock, std::nullopt},
                    {"FORMULATION_SUITE", ResourceKind::Lock, std::nullopt},
                    {"BIOLOGICAL_SAMPLES", ResourceKind::Counter, 8}};
  topo.channels = {
      {"ch_chem_to_form", {"CHEMIST"}, {"FORMULATION_SCIENTIST"}, {"compound", "retry_compound"}},
      {"ch_form_to_bio", {"FORMULATION_SCIENTIST"}, {"BIOLOGIST"}, {"formulated", "done"}},
      {"ch_form_to_tox", {"FORMULATION_SCIENTIST"}, {"TOXICOLOGIST"}, {"formulated", "done"}},
      {"ch_bio_to_clinical", {"BIOLOGIST"}, {"CLINICAL_LEAD"}, {"bio_report"}},
      {"ch_tox_to_clinical", {"TOXICOLOGIST"}, {"CLINICAL_LEAD"}, {"tox_report"}},
      {"ch_clinical_to_reg", {"CLINICAL_LEAD"}, {"REGULATORY_SPECIALIST"}, {"clinical_review"}},
      {"ch_reg_to_director",
       {"REGULATORY_SPECIALIST"},
       {"PROJECT_DIRECTOR"},
       {"approval", "conditional_approval"}},
      {"ch_director_to_chem",
       {"PROJECT_DIRECTOR"},
       {"CHEMIST"},
       {"final_decision", "retry", "abort"}},
      {"ch_director_to_form", {"PROJECT_DIRECTOR"}, {"FORMULATION_SCIENTIST"}, {"retry", "done"}},
      {"ch_reg_to_clinical",
       {"REGULATORY_SPECIALIST"},
       {"CLINICAL_LEAD"},
       {"hold_clearance", "no_hold"}},
      {"ch_director_to_clinical", {"PROJECT_DIRECTOR"}, {"CLINICAL_LEAD"}, {"retry", "done"}},
      {"ch_director_to_reg", {"PROJECT_DIRECTOR"}, {"REGULATORY_SPECIALIST"}, {"retry", "done"}},
  };
  return topo;
}

std::string noop_protocol(const Topology& topo) {
  std::ostringstream os;
  for (size_t i = 0; i < topo.agents.size(); ++i) {
    if (i) os << "\n";
    os << "process " << topo.agents[i].id << "\n";
    os << "  wrap_up:\n";
    os << "    skip\n";
  }
  return os.str();
}

}  // namespace

std::vector<Fixture> fixture_suite() {
  std::vector<Fixture> out;
  for (int n : {3, 5, 7}) out.push_back(philosophers_fixture(n, /*ordered=*/false));
  for (int n : {3, 5, 7}) out.push_back(philosophers_fixture(n, /*ordered=*/true));

  out.push_back(parallel_build_fixture());

  {
    Fixture f;
    f.name = "hub_unrepaired";
    f.topology_text = serialize_topology(hub_topology());
    f.protocol_text = kHubUnrepairedProtocol;
    f.expected_outcome = CheckOutcome::Violation;
    f.expected_kind = ViolationKind::Deadlock;
    f.origin = "hub serves a fixed request count and exits; a retrying satellite's re-sent "
               "request is never consumed";
    out.push_back(std::move(f));
  }
  {
    Fixture f;
    f.name = "hub_repaired";
    f.topology_text = serialize_topology(hub_topology());
    f.protocol_text = kHubRepairedProtocol;
    f.expected_outcome = CheckOutcome::Pass;
    f.origin = "hub loops on per-satellite completion flags, so retry traffic is always served";
    out.push_back(std::move(f));
  }

  {
    Fixture f;
    f.name = "circular_locks_unrepaired";
    f.topology_text = serialize_topology(circular_topology());
    f.protocol_text = kCircularUnrepairedProtocol;
    f.expected_outcome = CheckOutcome::Violation;
    f.expected_kind = ViolationKind::Deadlock;
    f.origin = "two agents acquire the same two locks in opposite orders";
    out.push_back(std::move(f));
  }
  {
    Fixture f;
    f.name = "circular_locks_repaired";
    f.topology_text = serialize_topology(circular_topology());
    f.protocol_text = kCircularRepairedProtocol;
    f.expected_outcome = CheckOutcome::Pass;
    f.origin = "disjoint lock ownership removes the cross acquisition";
    out.push_back(std::move(f));
  }

  {
    Fixture f;
    f.name = "reviewer_unrepaired";
    f.topology_text = serialize_topology(reviewer_topology());
    f.protocol_text = kReviewerUnrepairedProtocol;
    f.expected_outcome = CheckOutcome::Violation;
    f.expected_kind = ViolationKind::Deadlock;
    f.origin = "reviewer exits after a fixed verdict count while revise verdicts re-enter review";
    out.push_back(std::move(f));
  }
  {
    Fixture f;
    f.name = "reviewer_repaired";
    f.topology_text = serialize_topology(reviewer_topology());
    f.protocol_text = kReviewerRepairedProtocol;
    f.expected_outcome = CheckOutcome::Pass;
    f.origin = "per-developer completion signals replace the verdict count";
    out.push_back(std::move(f));
  }

  {
    Fixture f;
    f.name = "split_receive_unrepaired";
    f.topology_text = serialize_topology(split_receive_topology());
    f.protocol_text = kSplitUnrepairedProtocol;
    f.expected_outcome = CheckOutcome::Violation;
    f.expected_kind = ViolationKind::Deadlock;
    f.origin = "worker commits to a lane before checking message availability";
    out.push_back(std::move(f));
  }
  {
    Fixture f;
    f.name = "split_receive_repaired";
    f.topology_text = serialize_topology(split_receive_topology());
    f.protocol_text = kSplitRepairedProtocol;
    f.expected_outcome = CheckOutcome::Pass;
    f.origin = "receives moved into the choosing step, so only a ready lane can be selected";
    out.push_back(std::move(f));
  }

  {
    Fixture f;
    f.name = "drainage_clean";
    f.topology_text = serialize_topology(pipe_topology());
    f.protocol_text = kDrainCleanProtocol;
    f.expected_outcome = CheckOutcome::Pass;
    f.origin = "producer/consumer pair that drains its channel before terminating";
    out.push_back(std::move(f));
  }
  {
    Fixture f;
    f.name = "drainage_undrained";
    f.topology_text = serialize_topology(pipe_topology());
    f.protocol_text = kDrainUndrainedProtocol;
    f.expected_outcome = CheckOutcome::Violation;
    f.expected_kind = ViolationKind::UndrainedChannel;
    f.origin = "consumer terminates without consuming the produced message";
    out.push_back(std::move(f));
  }
  {
    Fixture f;
    f.name = "queue_overflow";
    f.topology_text = serialize_topology(pipe_topology());
    f.protocol_text = kQueueOverflowProtocol;
    f.expected_outcome = CheckOutcome::Violation;
    f.expected_kind = ViolationKind::QueueBoundExceeded;
    f.origin = "five-message burst exceeds the default queue depth bound of 3";
    out.push_back(std::move(f));
  }

  {
    Fixture f;
    f.name = "drug_pipeline_noop";
    f.topology_text = serialize_topology(drug_pipeline_topology());
    f.protocol_text = noop_protocol(drug_pipeline_topology());
    f.expected_outcome = CheckOutcome::Pass;
    f.origin = "seven-agent drug discovery topology with a counter pool; agents terminate "
               "without coordinating";
    out.push_back(std::move(f));
  }

  return out;
}

const Fixture& fixture_by_name(const std::string& name) {
  static const std::vector<Fixture> suite = fixture_suite();
  for (const auto& f : suite) {
    if (f.name == name) return f;
  }
  throw std::invalid_argument("unknown fixture '" + name + "'");
}

}  // namespace coord
