#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "coordcheck/fixtures.hpp"

using namespace coord;

namespace {

// Printed text of each process, for pair diff audits.
std::map<std::string, std::string> process_texts(const std::string& protocol_text) {
  ProtocolProgram p = parse_protocol(protocol_text);
  std::map<std::string, std::string> out;
  for (const auto& proc : p.processes) {
    ProtocolProgram single;
    single.processes.push_back(proc);
    out[proc.agent] = print_protocol(single);
  }
  return out;
}

// The set of process names whose bodies differ between the two variants.
std::set<std::string> differing_processes(const Fixture& a, const Fixture& b) {
  auto pa = process_texts(a.protocol_text);
  auto pb = process_texts(b.protocol_text);
  REQUIRE(pa.size() == pb.size());
  std::set<std::string> out;
  for (const auto& [agent, text] : pa) {
    REQUIRE(pb.count(agent) == 1);
    if (pb.at(agent) != text) out.insert(agent);
  }
  return out;
}

}  // namespace

TEST_CASE("fixture names are unique and origins are documented") {
  std::set<std::string> names;
  for (const auto& f : fixture_suite()) {
    CHECK(names.insert(f.name).second);
    CHECK_FALSE(f.origin.empty());
    CHECK_FALSE(f.topology_text.empty());
    CHECK_FALSE(f.protocol_text.empty());
    if (f.expected_outcome == CheckOutcome::Violation) CHECK(f.expected_kind.has_value());
  }
  CHECK(names.size() >= 19);
  CHECK_THROWS_AS(fixture_by_name("no_such_fixture"), std::invalid_argument);
}

TEST_CASE("every fixture reproduces its expected verdict at 1 and 8 workers") {
  for (const auto& f : fixture_suite()) {
    CAPTURE(f.name);
    System sys = f.build();
    for (unsigned workers : {1u, 8u}) {
      CheckConfig cfg;
      cfg.worker_count = workers;
      Verdict v = check(sys, cfg);
      CHECK(v.outcome == f.expected_outcome);
      if (f.expected_kind) {
        REQUIRE(v.violation_kind.has_value());
        CHECK(*v.violation_kind == *f.expected_kind);
      }
    }
  }
}

TEST_CASE("the files shipped under fixtures/ match the generated suite") {
  namespace fs = std::filesystem;
  fs::path root = fs::path(COORDCHECK_SOURCE_DIR) / "fixtures";
  REQUIRE(fs::exists(root));
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  for (const auto& f : fixture_suite()) {
    CAPTURE(f.name);
    CHECK(slurp(root / f.name / "topology.json") == f.topology_text);
    CHECK(slurp(root / f.name / "protocol.cpl") == f.protocol_text);
  }
}

TEST_CASE("philosophers builder matches the documented shape") {
  for (int n : {3, 5, 7}) {
    Fixture naive = philosophers_fixture(n, false);
    Fixture ordered = philosophers_fixture(n, true);
    ProtocolProgram p = parse_protocol(naive.protocol_text);
    CHECK(static_cast<int>(p.processes.size()) == n);
    for (const auto& proc : p.processes) CHECK(proc.body.size() == 5);

    // Identical topologies; only the last philosopher's fork order differs.
    CHECK(naive.topology_text == ordered.topology_text);
    auto diff = differing_processes(naive, ordered);
    CHECK(diff == std::set<std::string>{"PHIL_" + std::to_string(n - 1)});
  }
  CHECK_THROWS_AS(philosophers_fixture(1, false), std::invalid_argument);
}

TEST_CASE("unrepaired/repaired pairs differ only in their documented processes") {
  struct PairAudit {
    const char* bad;
    const char* good;
    std::set<std::string> expect;
  };
  const PairAudit audits[] = {
      {"hub_unrepaired", "hub_repaired", {"HUB", "SAT_A", "SAT_B"}},
      {"circular_locks_unrepaired", "circular_locks_repaired", {"DEVELOPER_A", "CI_RUNNER"}},
      {"reviewer_unrepaired", "reviewer_repaired", {"REVIEWER", "DEV_A", "DEV_B", "DEV_C"}},
      {"split_receive_unrepaired", "split_receive_repaired", {"WORKER"}},
  };
  for (const auto& audit : audits) {
    CAPTURE(audit.bad);
    const Fixture& bad = fixture_by_name(audit.bad);
    const Fixture& good = fixture_by_name(audit.good);
    CHECK(bad.topology_text == good.topology_text);
    CHECK(differing_processes(bad, good) == audit.expect);
  }
}

TEST_CASE("the split-receive pair keeps dispatcher and lanes identical") {
  auto diff = differing_processes(fixture_by_name("split_receive_unrepaired"),
                                  fixture_by_name("split_receive_repaired"));
  CHECK(diff.count("DISPATCHER") == 0);
  CHECK(diff.count("LANE_A") == 0);
  CHECK(diff.count("LANE_B") == 0);
}

TEST_CASE("satellite edits in the hub pair are exactly the completion signal") {
  // Beyond the membership audit: the satellites' only change is the
  // satellite_done send on the success arm.
  const Fixture& bad = fixture_by_name("hub_unrepaired");
  const Fixture& good = fixture_by_name("hub_repaired");
  auto bad_texts = process_texts(bad.protocol_text);
  auto good_texts = process_texts(good.protocol_text);
  for (const char* sat : {"SAT_A", "SAT_B"}) {
    std::string b = bad_texts.at(sat);
    std::string g = good_texts.at(sat);
    // Removing the completion-signal line from the repaired text yields the
    // unrepaired text.
    std::string needle = "      send ch_" + std::string(sat == std::string("SAT_A") ? "a" : "b") +
                         "_req \"satellite_done\"\n";
    auto pos = g.find(needle);
    REQUIRE(pos != std::string::npos);
    g.erase(pos, needle.size());
    CHECK(b == g);
  }
}
