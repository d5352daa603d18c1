#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "coordcheck/fixtures.hpp"
#include "coordcheck/repair.hpp"

using namespace coord;
namespace fs = std::filesystem;

namespace {

fs::path fresh_workdir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("coordcheck_repair_" + tag);
  fs::remove_all(dir);
  return dir;
}

// The fixture-specific rewrite: replace the committing worker with the
// guard-selected form.
std::vector<RewriteRule> split_receive_rules() {
  return {{R"(process WORKER[\s\S]*$)",
           "process WORKER\n"
           "  collect:\n"
           "    either\n"
           "      receive ch_a_out {\"result\"}\n"
           "    or\n"
           "      receive ch_b_out {\"result\"}\n"
           "    end\n"}};
}

LoopConfig loop_config(const std::string& tag, int max_iterations = 4) {
  LoopConfig cfg;
  cfg.max_iterations = max_iterations;
  cfg.workdir = fresh_workdir(tag);
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("an already-verified protocol is Verified at iteration 0") {
  const Fixture& fx = fixture_by_name("parallel_build");
  LoopReport r = run_loop(fx.topology_text, fx.protocol_text, scripted_adapter({}),
                          loop_config("verified0"));
  CHECK(r.outcome == LoopOutcome::Verified);
  CHECK(r.iterations_used == 0);
  CHECK(r.iterations.size() == 1);
  CHECK(r.final_protocol_text == fx.protocol_text);
}

TEST_CASE("scripted adapter repairs the split-receive fixture in one iteration") {
  const Fixture& fx = fixture_by_name("split_receive_unrepaired");
  LoopConfig cfg = loop_config("split");
  LoopReport r = run_loop(fx.topology_text, fx.protocol_text,
                          scripted_adapter(split_receive_rules()), cfg);
  REQUIRE(r.outcome == LoopOutcome::Verified);
  CHECK(r.iterations_used == 1);
  REQUIRE(r.iterations.size() == 2);
  CHECK(r.iterations[0].verdict == "Deadlock");
  CHECK(r.iterations[1].verdict == "pass");

  // The verified text independently re-checks to Pass.
  System sys(parse_protocol(r.final_protocol_text), parse_topology(fx.topology_text));
  CHECK(check(sys, cfg.check).outcome == CheckOutcome::Pass);

  // Persistence: every iteration left its protocol and verdict on disk.
  CHECK(fs::exists(cfg.workdir / "iter_0" / "protocol.txt"));
  CHECK(fs::exists(cfg.workdir / "iter_0" / "verdict.txt"));
  CHECK(fs::exists(cfg.workdir / "iter_1" / "protocol.txt"));
  CHECK(fs::exists(cfg.workdir / "iter_1" / "verdict.txt"));
  CHECK(slurp(cfg.workdir / "iter_0" / "protocol.txt") == fx.protocol_text);
  CHECK(slurp(cfg.workdir / "iter_1" / "protocol.txt") == r.final_protocol_text);
  // iter_0's verdict is a parseable machine trace.
  MachineTrace mt = parse_machine_trace(slurp(cfg.workdir / "iter_0" / "verdict.txt"));
  CHECK(mt.violation_kind == "Deadlock");
}

TEST_CASE("identity adapter exhausts the budget with the same violation each round") {
  const Fixture& fx = fixture_by_name("circular_locks_unrepaired");
  LoopConfig cfg = loop_config("identity");
  LoopReport r = run_loop(fx.topology_text, fx.protocol_text, scripted_adapter({}), cfg);
  CHECK(r.outcome == LoopOutcome::BudgetExhausted);
  CHECK(r.iterations_used == 4);
  REQUIRE(r.iterations.size() == 5);
  for (const auto& it : r.iterations) CHECK(it.verdict == "Deadlock");
  CHECK(r.final_protocol_text == fx.protocol_text);
}

TEST_CASE("loop accounting: iterations never exceed the cap") {
  const Fixture& fx = fixture_by_name("drainage_undrained");
  LoopConfig cfg = loop_config("cap2", 2);
  LoopReport r = run_loop(fx.topology_text, fx.protocol_text, scripted_adapter({}), cfg);
  CHECK(r.outcome == LoopOutcome::BudgetExhausted);
  CHECK(r.iterations_used == 2);
  CHECK(r.iterations.size() == 3);
}

TEST_CASE("adapter output that does not parse counts as adapter failure") {
  const Fixture& fx = fixture_by_name("circular_locks_unrepaired");
  // Matches anything, rewrites to garbage.
  auto garbage = scripted_adapter({{R"(process[\s\S]*$)", "this is not a protocol"}});
  LoopConfig cfg = loop_config("garbage");
  LoopReport r = run_loop(fx.topology_text, fx.protocol_text, garbage, cfg);
  CHECK(r.outcome == LoopOutcome::AdapterFailed);
  // The prior protocol text is retained.
  CHECK(r.final_protocol_text == fx.protocol_text);
  CHECK(slurp(cfg.workdir / "iter_0" / "protocol.txt") == fx.protocol_text);
}

TEST_CASE("an adapter that throws is isolated and retried up to the cap") {
  const Fixture& fx = fixture_by_name("circular_locks_unrepaired");
  int calls = 0;
  RepairAdapter crashy = [&calls](const RepairContext&) -> std::optional<std::string> {
    ++calls;
    throw std::runtime_error("adapter crashed");
  };
  LoopConfig cfg = loop_config("crashy");
  cfg.adapter_retry_cap = 2;
  LoopReport r = run_loop(fx.topology_text, fx.protocol_text, crashy, cfg);
  CHECK(r.outcome == LoopOutcome::AdapterFailed);
  CHECK(calls == 3);  // initial attempt + two retries
}

TEST_CASE("scripted adapter rules validate and empty rules mean identity") {
  CHECK_THROWS_AS(scripted_adapter({{"([unbalanced", "x"}}), std::invalid_argument);
  RepairAdapter identity = scripted_adapter({});
  RepairContext ctx;
  ctx.protocol_text = "anything";
  CHECK(*identity(ctx) == "anything");

  // A non-matching rule is also identity.
  RepairAdapter miss = scripted_adapter({{"zzz_never", "x"}});
  CHECK(*miss(ctx) == "anything");
}

TEST_CASE("the adapter sees the violation history across iterations") {
  const Fixture& fx = fixture_by_name("circular_locks_unrepaired");
  std::vector<size_t> history_sizes;
  RepairAdapter spy = [&](const RepairContext& ctx) -> std::optional<std::string> {
    history_sizes.push_back(ctx.history.size());
    return ctx.protocol_text;
  };
  LoopConfig cfg = loop_config("spy", 2);
  run_loop(fx.topology_text, fx.protocol_text, spy, cfg);
  REQUIRE(history_sizes.size() == 2);
  CHECK(history_sizes[0] == 0);
  CHECK(history_sizes[1] == 1);
}

TEST_CASE("subprocess adapter: cat on the context protocol is the identity") {
  const Fixture& fx = fixture_by_name("circular_locks_unrepaired");
  LoopConfig cfg = loop_config("subcat", 1);
  LoopReport r = run_loop(fx.topology_text, fx.protocol_text,
                          subprocess_adapter("cat context/protocol.txt"), cfg);
  CHECK(r.outcome == LoopOutcome::BudgetExhausted);
  CHECK(r.final_protocol_text == fx.protocol_text);
}

TEST_CASE("subprocess adapter: a command emitting the repaired fixture verifies") {
  const Fixture& bad = fixture_by_name("split_receive_unrepaired");
  const Fixture& good = fixture_by_name("split_receive_repaired");
  LoopConfig cfg = loop_config("subfix");
  fs::create_directories(cfg.workdir);
  std::ofstream(cfg.workdir / "repaired.cpl") << good.protocol_text;
  LoopReport r = run_loop(bad.topology_text, bad.protocol_text,
                          subprocess_adapter("cat repaired.cpl"), cfg);
  CHECK(r.outcome == LoopOutcome::Verified);
  CHECK(r.iterations_used == 1);
}

TEST_CASE("subprocess adapter: nonzero exit is an adapter failure") {
  const Fixture& fx = fixture_by_name("circular_locks_unrepaired");
  LoopConfig cfg = loop_config("subfail");
  cfg.adapter_retry_cap = 1;
  LoopReport r = run_loop(fx.topology_text, fx.protocol_text,
                          subprocess_adapter("exit 1"), cfg);
  CHECK(r.outcome == LoopOutcome::AdapterFailed);
}

TEST_CASE("invalid inputs are rejected up front") {
  const Fixture& fx = fixture_by_name("parallel_build");
  LoopConfig cfg = loop_config("badinput");
  CHECK_THROWS_AS(run_loop(R"({"agents":[{"id":"A"}],"resources":[],
      "channels":[{"id":"c","from":"X","to":"A","labels":["m"]}]})",
                           fx.protocol_text, scripted_adapter({}), cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_loop(fx.topology_text, "not a protocol", scripted_adapter({}), cfg),
                  std::invalid_argument);
  LoopConfig no_workdir;
  CHECK_THROWS_AS(run_loop(fx.topology_text, fx.protocol_text, scripted_adapter({}), no_workdir),
                  std::invalid_argument);
}
