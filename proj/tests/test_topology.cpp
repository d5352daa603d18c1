#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "coordcheck/fixtures.hpp"
#include "coordcheck/topology.hpp"

using namespace coord;

namespace {

// A tiny deterministic generator for property-style tests.
struct Rng {
  uint64_t s;
  explicit Rng(uint64_t seed) : s(seed) {}
  uint64_t next() {
    s += 0x9E3779B97f4A7C15ULL;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  uint64_t below(uint64_t n) { return n <= 1 ? 0 : next() % n; }
};

const std::string& drug_pipeline_topology_text() {
  static const std::string text = fixture_by_name("drug_pipeline_noop").topology_text;
  return text;
}

Topology random_topology(Rng& rng) {
  Topology t;
  size_t agents = 1 + rng.below(3);
  for (size_t i = 0; i < agents; ++i) t.agents.push_back({"a" + std::to_string(i), {}});
  size_t resources = rng.below(3);
  for (size_t i = 0; i < resources; ++i) {
    bool lock = rng.below(2) == 0;
    t.resources.push_back({"r" + std::to_string(i),
                           lock ? ResourceKind::Lock : ResourceKind::Counter,
                           lock ? std::nullopt : std::make_optional<int64_t>(rng.below(5))});
  }
  // Channels over distinct directed pairs keep the topology valid.
  std::set<std::pair<size_t, size_t>> used;
  size_t channels = rng.below(3);
  for (size_t i = 0; i < channels; ++i) {
    size_t from = rng.below(agents);
    size_t to = rng.below(agents);
    if (!used.insert({from, to}).second) continue;
    std::vector<std::string> labels;
    size_t n_labels = 1 + rng.below(3);
    for (size_t l = 0; l < n_labels; ++l) labels.push_back("m" + std::to_string(l));
    t.channels.push_back({"c" + std::to_string(i), {t.agents[from].id}, {t.agents[to].id}, labels});
  }
  return t;
}

}  // namespace

TEST_CASE("drug pipeline topology parses with the documented shape") {
  Topology t = parse_topology(drug_pipeline_topology_text());
  CHECK(t.agents.size() == 7);
  int locks = 0, counters = 0;
  for (const auto& r : t.resources) {
    if (r.kind == ResourceKind::Lock) ++locks;
    if (r.kind == ResourceKind::Counter) ++counters;
  }
  CHECK(locks == 4);
  CHECK(counters == 1);
  CHECK(t.find_resource("BIOLOGICAL_SAMPLES")->initial == 8);
  CHECK(t.channels.size() == 12);
  CHECK(validate_topology(t).ok());
}

TEST_CASE("minimal topology: one agent, nothing else") {
  Topology t = parse_topology(R"({"agents":[{"id":"A"}],"resources":[],"channels":[]})");
  CHECK(t.agents.size() == 1);
  CHECK(t.resources.empty());
  CHECK(t.channels.empty());
  CHECK(validate_topology(t).ok());
}

TEST_CASE("unknown resource type is a parse error naming the path") {
  std::string doc = R"({"agents":[{"id":"A"}],
    "resources":[{"id":"R","type":"Mutex"}],"channels":[]})";
  try {
    parse_topology(doc);
    FAIL("expected a parse error");
  } catch (const TopologyParseError& e) {
    CHECK(e.path == "resources[0].type");
  }
}

TEST_CASE("closed schema: unknown fields are rejected with their path") {
  std::string doc = R"({"agents":[{"id":"A","color":"red"}],"resources":[],"channels":[]})";
  try {
    parse_topology(doc);
    FAIL("expected a parse error");
  } catch (const TopologyParseError& e) {
    CHECK(e.path == "agents[0].color");
  }
  CHECK_THROWS_AS(parse_topology(R"({"agents":[{"id":"A"}],"resources":[],"channels":[],"x":1})"),
                  TopologyParseError);
  CHECK_THROWS_AS(parse_topology(R"({"agents":[{"id":"A"}],"resources":[]})"),
                  TopologyParseError);
  CHECK_THROWS_AS(parse_topology("not json"), TopologyParseError);
  CHECK_THROWS_AS(parse_topology(R"({"agents":[],"resources":[],"channels":[]})"),
                  TopologyParseError);
  CHECK_THROWS_AS(
      parse_topology(
          R"({"agents":[{"id":"A"}],"resources":[{"id":"K","type":"Counter","config":{"initial":-1}}],"channels":[]})"),
      TopologyParseError);
}

TEST_CASE("multi-endpoint channels accept a string or a list") {
  Topology t = parse_topology(R"({"agents":[{"id":"A"},{"id":"B"},{"id":"C"}],
    "resources":[],
    "channels":[{"id":"c","from":["A","B"],"to":"C","labels":["x"]}]})");
  CHECK(t.channels[0].senders == std::vector<std::string>{"A", "B"});
  CHECK(t.channels[0].receivers == std::vector<std::string>{"C"});
  CHECK(validate_topology(t).ok());
}

TEST_CASE("validation flags dangling endpoints") {
  Topology t = parse_topology(R"({"agents":[{"id":"A"}],"resources":[],
    "channels":[{"id":"ch1","from":"X","to":"A","labels":["m"]}]})");
  ValidationReport r = validate_topology(t);
  CHECK_FALSE(r.ok());
  CHECK(r.error_count() == 1);
  CHECK(r.diagnostics[0].path == "channels[0].from[0]");
}

TEST_CASE("validation flags duplicate directed pairs citing both channels") {
  Topology t = parse_topology(R"({"agents":[{"id":"A"},{"id":"B"}],"resources":[],
    "channels":[{"id":"c1","from":"A","to":"B","labels":["x"]},
                {"id":"c2","from":"A","to":"B","labels":["y"]}]})");
  ValidationReport r = validate_topology(t);
  CHECK_FALSE(r.ok());
  REQUIRE(r.error_count() == 1);
  CHECK(r.diagnostics[0].message.find("c1") != std::string::npos);
  CHECK(r.diagnostics[0].message.find("c2") != std::string::npos);
}

TEST_CASE("validation flags duplicate ids and counter/lock initial rules") {
  Topology t;
  t.agents = {{"A", {}}, {"A", {}}};
  t.resources = {{"K", ResourceKind::Counter, std::nullopt},
                 {"L", ResourceKind::Lock, 3}};
  ValidationReport r = validate_topology(t);
  CHECK(r.error_count() == 3);
}

TEST_CASE("multi-endpoint cross products count every directed pair") {
  // c1 covers (A,C) and (B,C); c2 re-covers (B,C).
  Topology t = parse_topology(R"({"agents":[{"id":"A"},{"id":"B"},{"id":"C"}],"resources":[],
    "channels":[{"id":"c1","from":["A","B"],"to":"C","labels":["x"]},
                {"id":"c2","from":"B","to":"C","labels":["y"]}]})");
  ValidationReport r = validate_topology(t);
  CHECK(r.error_count() == 1);
}

TEST_CASE("serialize/parse round trip is the identity on every fixture topology") {
  for (const auto& f : fixture_suite()) {
    Topology t1 = parse_topology(f.topology_text);
    Topology t2 = parse_topology(serialize_topology(t1));
    CHECK(t1 == t2);
  }
}

TEST_CASE("round trip holds on randomized topologies") {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    Topology t = random_topology(rng);
    CHECK(parse_topology(serialize_topology(t)) == t);
  }
}

TEST_CASE("validation verdict is order independent") {
  Topology t = parse_topology(drug_pipeline_topology_text());
  Topology shuffled = t;
  std::swap(shuffled.agents[0], shuffled.agents[6]);
  std::swap(shuffled.channels[0], shuffled.channels[11]);
  std::swap(shuffled.resources[0], shuffled.resources[4]);
  CHECK(validate_topology(t).ok() == validate_topology(shuffled).ok());

  // An invalid one stays invalid under permutation.
  Topology bad = t;
  bad.channels.push_back(bad.channels[0]);
  bad.channels.back().id = "ch_dup";
  Topology bad_shuffled = bad;
  std::swap(bad_shuffled.channels.front(), bad_shuffled.channels.back());
  CHECK_FALSE(validate_topology(bad).ok());
  CHECK_FALSE(validate_topology(bad_shuffled).ok());
}

TEST_CASE("admission: documented drug pipeline events") {
  Topology t = parse_topology(drug_pipeline_topology_text());
  CHECK(event_admitted(t, CoordinationEvent::send("CHEMIST", "ch_chem_to_form", "compound")));
  Admission bad_label =
      event_admitted(t, CoordinationEvent::send("CHEMIST", "ch_chem_to_form", "approval"));
  CHECK_FALSE(bad_label);
  CHECK(bad_label.reason == AdmitReason::LabelNotDeclared);
  CHECK(event_admitted(t, CoordinationEvent::acquire("BIOLOGIST", "FORMULATION_SUITE")));
  Admission unknown = event_admitted(t, CoordinationEvent::acquire("BIOLOGIST", "NO_SUCH_LOCK"));
  CHECK_FALSE(unknown);
  CHECK(unknown.reason == AdmitReason::UnknownTarget);
  Admission wrong_kind =
      event_admitted(t, CoordinationEvent::acquire("BIOLOGIST", "BIOLOGICAL_SAMPLES"));
  CHECK_FALSE(wrong_kind);
  CHECK(wrong_kind.reason == AdmitReason::WrongResourceKind);
  CHECK(event_admitted(t, CoordinationEvent::counter_acquire("BIOLOGIST", "BIOLOGICAL_SAMPLES", 2)));
}

TEST_CASE("admission: exhaustive enumeration on a small topology") {
  Topology t = parse_topology(R"({"agents":[{"id":"A"},{"id":"B"},{"id":"C"}],
    "resources":[{"id":"L","type":"Lock"},{"id":"K","type":"Counter","config":{"initial":2}}],
    "channels":[{"id":"c_ab","from":"A","to":"B","labels":["x","y"]},
                {"id":"c_bc","from":"B","to":"C","labels":["z"]}]})");
  REQUIRE(validate_topology(t).ok());

  // Every event built from declared ids with correct direction is admitted.
  for (const auto& ch : t.channels) {
    for (const auto& s : ch.senders) {
      for (const auto& l : ch.labels) {
        CHECK(event_admitted(t, CoordinationEvent::send(s, ch.id, l)));
      }
    }
    for (const auto& r : ch.receivers) {
      CHECK(event_admitted(t, CoordinationEvent::receive(r, ch.id)));
      for (const auto& l : ch.labels) {
        CHECK(event_admitted(t, CoordinationEvent::receive(r, ch.id, {l})));
      }
    }
  }
  for (const auto& a : t.agents) {
    CHECK(event_admitted(t, CoordinationEvent::acquire(a.id, "L")));
    CHECK(event_admitted(t, CoordinationEvent::release(a.id, "L")));
    CHECK(event_admitted(t, CoordinationEvent::counter_acquire(a.id, "K")));
    CHECK(event_admitted(t, CoordinationEvent::counter_release(a.id, "K")));
  }

  // Every single-field mutation is rejected with the matching reason.
  {
    Admission a = event_admitted(t, CoordinationEvent::send("Z", "c_ab", "x"));
    CHECK(a.reason == AdmitReason::UnknownActor);
  }
  {
    Admission a = event_admitted(t, CoordinationEvent::send("A", "c_zz", "x"));
    CHECK(a.reason == AdmitReason::UnknownTarget);
  }
  {
    // Reversed direction: the receiver tries to send.
    Admission a = event_admitted(t, CoordinationEvent::send("B", "c_ab", "x"));
    CHECK(a.reason == AdmitReason::DirectionViolation);
  }
  {
    Admission a = event_admitted(t, CoordinationEvent::receive("A", "c_ab"));
    CHECK(a.reason == AdmitReason::DirectionViolation);
  }
  {
    Admission a = event_admitted(t, CoordinationEvent::send("A", "c_ab", "z"));
    CHECK(a.reason == AdmitReason::LabelNotDeclared);
  }
  {
    Admission a = event_admitted(t, CoordinationEvent::receive("B", "c_ab", {"z"}));
    CHECK(a.reason == AdmitReason::LabelNotDeclared);
  }
  {
    Admission a = event_admitted(t, CoordinationEvent::acquire("A", "K"));
    CHECK(a.reason == AdmitReason::WrongResourceKind);
  }
  {
    Admission a = event_admitted(t, CoordinationEvent::counter_release("A", "L"));
    CHECK(a.reason == AdmitReason::WrongResourceKind);
  }

  // Purity: the same call twice gives the same answer.
  auto e = CoordinationEvent::send("A", "c_ab", "x");
  CHECK(event_admitted(t, e).admitted == event_admitted(t, e).admitted);
}

TEST_CASE("serializer emits canonical key order") {
  Topology t = parse_topology(drug_pipeline_topology_text());
  std::string s1 = serialize_topology(t);
  std::string s2 = serialize_topology(parse_topology(s1));
  CHECK(s1 == s2);
  CHECK(s1.find("\"agents\"") < s1.find("\"resources\""));
  CHECK(s1.find("\"resources\"") < s1.find("\"channels\""));
}
