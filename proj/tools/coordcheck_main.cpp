// coordcheck: validate, model-check, simulate, replay, and repair
// multi-agent coordination protocols.
//
// Exit codes: 0 pass/success, 1 violation found, 2 usage or input error,
// 3 resource limit hit, 4 adapter failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "coordcheck/checker.hpp"
#include "coordcheck/fixtures.hpp"
#include "coordcheck/monitor.hpp"
#include "coordcheck/repair.hpp"
#include "coordcheck/simulator.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitExhausted = 3;
constexpr int kExitAdapter = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot read file: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw UsageError("cannot write file: " + path);
  os << content;
}

struct CheckFlags {
  int64_t bound = 3;
  std::vector<std::string> bound_for;  // CH=N
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::optional<uint64_t> max_states;
  std::optional<double> time_limit_s;
  std::string format = "human";
  std::string out_path;
};

void add_check_flags(CLI::App* cmd, CheckFlags& flags, bool with_format = true) {
  cmd->add_option("--bound", flags.bound, "Default per-channel queue depth bound")
      ->default_val(3);
  cmd->add_option("--bound-for", flags.bound_for,
                  "Per-channel bound override, CHANNEL=N (repeatable)");
  cmd->add_option("--workers", flags.workers, "Exploration worker threads");
  cmd->add_option("--max-states", flags.max_states, "Stop after this many distinct states");
  cmd->add_option("--time-limit", flags.time_limit_s, "Wall-clock budget in seconds");
  if (with_format) {
    cmd->add_option("--format", flags.format, "Trace format: human or machine")
        ->check(CLI::IsMember({"human", "machine"}));
    cmd->add_option("--out", flags.out_path, "Write the trace/verdict to this path");
  }
}

coord::CheckConfig to_config(const CheckFlags& flags) {
  coord::CheckConfig cfg;
  cfg.channel_bound = flags.bound;
  cfg.worker_count = flags.workers;
  cfg.state_limit = flags.max_states;
  if (flags.time_limit_s) {
    cfg.time_limit =
        std::chrono::milliseconds(static_cast<int64_t>(*flags.time_limit_s * 1000.0));
  }
  for (const auto& spec : flags.bound_for) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) throw UsageError("--bound-for expects CHANNEL=N: " + spec);
    cfg.per_channel_bounds[spec.substr(0, eq)] = std::stoll(spec.substr(eq + 1));
  }
  return cfg;
}

// Parse + semantic validation + optional binding; throws UsageError with the
// report text when anything fails.
coord::System load_system(const std::string& topo_path, const std::string& proto_path) {
  coord::Topology topo = coord::parse_topology(read_file(topo_path));
  coord::ValidationReport vr = coord::validate_topology(topo);
  if (!vr.ok()) throw UsageError("topology is invalid:\n" + vr.to_string());
  coord::ProtocolProgram program = coord::parse_protocol(read_file(proto_path));
  coord::ValidationReport br = coord::bind_check(program, topo);
  if (!br.ok()) throw UsageError("protocol does not bind to topology:\n" + br.to_string());
  return coord::System(std::move(program), std::move(topo));
}

int outcome_exit(coord::CheckOutcome o) {
  switch (o) {
    case coord::CheckOutcome::Pass: return kExitPass;
    case coord::CheckOutcome::Violation: return kExitViolation;
    case coord::CheckOutcome::ResourceExhausted: return kExitExhausted;
  }
  return kExitUsage;
}

void print_stats(const coord::CheckStats& stats) {
  std::cout << "states: " << stats.distinct_states << "  transitions: " << stats.transitions
            << "  depth: " << stats.max_depth << "  time: " << stats.duration.count() / 1000.0
            << " ms\n";
}

int cmd_validate(const std::string& topo_path, const std::string& proto_path) {
  coord::Topology topo = coord::parse_topology(read_file(topo_path));
  coord::ValidationReport vr = coord::validate_topology(topo);
  std::cout << "topology: " << (vr.ok() ? "ok" : "invalid") << "\n" << vr.to_string();
  bool ok = vr.ok();
  if (!proto_path.empty() && ok) {
    coord::ProtocolProgram program = coord::parse_protocol(read_file(proto_path));
    coord::ValidationReport br = coord::bind_check(program, topo);
    std::cout << "binding: " << (br.ok() ? "ok" : "invalid") << "\n" << br.to_string();
    ok = ok && br.ok();
  }
  return ok ? kExitPass : kExitUsage;
}

int cmd_check(const std::string& topo_path, const std::string& proto_path,
              const CheckFlags& flags) {
  coord::System sys = load_system(topo_path, proto_path);
  coord::CheckConfig cfg = to_config(flags);
  coord::Verdict v = coord::check(sys, cfg);
  std::cout << "outcome: " << coord::to_string(v.outcome);
  if (v.violation_kind) std::cout << " (" << coord::to_string(*v.violation_kind) << ")";
  std::cout << "\n";
  print_stats(v.stats);
  if (v.outcome == coord::CheckOutcome::Violation) {
    auto style = flags.format == "machine" ? coord::TraceStyle::Machine
                                           : coord::TraceStyle::Human;
    std::string rendered = coord::render_trace(sys, v, cfg, style);
    if (flags.out_path.empty()) {
      std::cout << rendered;
    } else {
      write_file(flags.out_path, rendered);
      std::cout << "trace written to " << flags.out_path << "\n";
    }
  }
  return outcome_exit(v.outcome);
}

int cmd_matrix(const std::string& topo_path, const std::string& proto_path,
               const std::string& bounds_csv, CheckFlags flags) {
  std::vector<int64_t> bounds;
  std::stringstream ss(bounds_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) bounds.push_back(std::stoll(item));
  }
  if (bounds.empty()) throw UsageError("--bounds expects a nonempty list like 3,5,7");
  coord::System sys = load_system(topo_path, proto_path);

  std::cout << "bound\toutcome\tkind\tstates\tduration_ms\n";
  bool any_violation = false;
  bool any_exhausted = false;
  for (int64_t b : bounds) {
    CheckFlags f = flags;
    f.bound = b;
    coord::CheckConfig cfg = to_config(f);
    coord::Verdict v = coord::check(sys, cfg);
    std::cout << b << "\t" << coord::to_string(v.outcome) << "\t"
              << (v.violation_kind ? coord::to_string(*v.violation_kind) : "-") << "\t"
              << v.stats.distinct_states << "\t" << v.stats.duration.count() / 1000.0 << "\n";
    any_violation = any_violation || v.outcome == coord::CheckOutcome::Violation;
    any_exhausted = any_exhausted || v.outcome == coord::CheckOutcome::ResourceExhausted;
  }
  if (any_violation) return kExitViolation;
  if (any_exhausted) return kExitExhausted;
  return kExitPass;
}

struct SimFlags {
  uint64_t seed = 0;
  std::string scheduler = "random";
  std::vector<std::string> faults;  // AGENT:LABEL:OCCURRENCE
  double fault_rate = 0.0;
  uint64_t max_steps = 10000;
  uint64_t livelock_window = 512;
  std::string trace_path;  // replay a machine trace as the schedule
  std::string log_out;
};

int cmd_simulate(const std::string& topo_path, const std::string& proto_path,
                 const SimFlags& flags) {
  coord::System sys = load_system(topo_path, proto_path);
  coord::SimConfig cfg;
  cfg.seed = flags.seed;
  cfg.fault_rate = flags.fault_rate;
  cfg.max_steps = flags.max_steps;
  cfg.livelock_window = flags.livelock_window;
  if (flags.scheduler == "random") {
    cfg.scheduler = coord::SchedulerKind::Random;
  } else if (flags.scheduler == "round-robin") {
    cfg.scheduler = coord::SchedulerKind::RoundRobin;
  } else {
    throw UsageError("scheduler must be random or round-robin (or use --trace)");
  }
  if (!flags.trace_path.empty()) {
    coord::MachineTrace trace = coord::parse_machine_trace(read_file(flags.trace_path));
    cfg.scheduler = coord::SchedulerKind::Script;
    cfg.script = coord::script_from_trace(trace);
  }
  for (const auto& spec : flags.faults) {
    auto c1 = spec.find(':');
    auto c2 = spec.rfind(':');
    if (c1 == std::string::npos || c2 == c1) {
      throw UsageError("--fault expects AGENT:LABEL:OCCURRENCE, got " + spec);
    }
    coord::FaultPoint fp;
    fp.agent = spec.substr(0, c1);
    fp.label = spec.substr(c1 + 1, c2 - c1 - 1);
    fp.occurrence = std::stoull(spec.substr(c2 + 1));
    cfg.fault_plan.push_back(std::move(fp));
  }

  coord::SimReport r = coord::simulate(sys, cfg);
  std::cout << "outcome: " << coord::to_string(r.outcome) << "\n";
  std::cout << "steps: " << r.steps_executed << "  faults injected: " << r.injected_faults
            << "  checkpoints: " << r.checkpoints_hit << "/" << r.checkpoints_total << "\n";
  for (const auto& [agent, label] : r.final_labels) {
    std::cout << "  " << agent << " at " << label << "\n";
  }
  if (!flags.log_out.empty()) {
    write_file(flags.log_out, coord::serialize_event_log(r.event_log));
    std::cout << "event log written to " << flags.log_out << " (" << r.event_log.size()
              << " events)\n";
  }
  return r.outcome == coord::SimOutcome::Completed ? kExitPass : kExitViolation;
}

int cmd_replay(const std::string& topo_path, const std::string& log_path) {
  coord::Topology topo = coord::parse_topology(read_file(topo_path));
  coord::ValidationReport vr = coord::validate_topology(topo);
  if (!vr.ok()) throw UsageError("topology is invalid:\n" + vr.to_string());
  auto log = coord::parse_event_log(read_file(log_path));
  coord::ReplayReport r = coord::replay_log(topo, log);
  std::cout << "events: " << log.size() << "  processed: " << r.decisions.size() << "\n";
  if (r.first_rejection) {
    const auto& d = r.decisions[*r.first_rejection];
    std::cout << "first rejection at index " << *r.first_rejection << ": "
              << coord::to_string(*d.reason) << " (" << d.detail << ")\n";
  }
  if (r.first_stall) {
    std::cout << "replay stalled at index " << *r.first_stall << ": "
              << r.decisions[*r.first_stall].detail << "\n";
  }
  if (r.clean()) {
    std::cout << "replay clean: every event accepted\n";
    return kExitPass;
  }
  return kExitViolation;
}

int cmd_repair(const std::string& topo_path, const std::string& proto_path,
               const std::string& adapter_cmd, const std::string& rules_path, bool identity,
               int max_iterations, const std::string& workdir, const CheckFlags& flags) {
  coord::RepairAdapter adapter;
  if (identity) {
    adapter = coord::scripted_adapter({});
  } else if (!rules_path.empty()) {
    // Rules file: alternating pattern / replacement lines separated by a
    // line containing only "---".
    std::istringstream is(read_file(rules_path));
    std::vector<coord::RewriteRule> rules;
    std::string line;
    coord::RewriteRule rule;
    bool in_replacement = false;
    std::string acc;
    auto flush = [&]() {
      if (in_replacement) {
        rule.replacement = acc;
        rules.push_back(rule);
      } else if (!acc.empty()) {
        throw UsageError("rules file ended inside a pattern");
      }
      acc.clear();
    };
    while (std::getline(is, line)) {
      if (line == "---") {
        if (in_replacement) {
          flush();
          in_replacement = false;
        } else {
          rule.pattern = acc;
          acc.clear();
          in_replacement = true;
        }
        continue;
      }
      if (!acc.empty()) acc += "\n";
      acc += line;
    }
    flush();
    adapter = coord::scripted_adapter(rules);
  } else if (!adapter_cmd.empty()) {
    adapter = coord::subprocess_adapter(adapter_cmd);
  } else {
    throw UsageError("choose an adapter: --adapter CMD, --rules FILE, or --identity");
  }

  coord::LoopConfig cfg;
  cfg.check = to_config(flags);
  cfg.max_iterations = max_iterations;
  cfg.workdir = workdir;
  coord::LoopReport report =
      coord::run_loop(read_file(topo_path), read_file(proto_path), adapter, cfg);
  std::cout << "loop outcome: " << coord::to_string(report.outcome) << " after "
            << report.iterations_used << " iteration(s)\n";
  for (const auto& it : report.iterations) {
    std::cout << "  iter " << it.iteration << ": " << it.verdict << " ("
              << it.stats.distinct_states << " states)\n";
  }
  switch (report.outcome) {
    case coord::LoopOutcome::Verified: return kExitPass;
    case coord::LoopOutcome::BudgetExhausted: return kExitAdapter;
    case coord::LoopOutcome::AdapterFailed: return kExitAdapter;
  }
  return kExitUsage;
}

int cmd_fixtures(bool list, const std::string& emit_dir) {
  auto suite = coord::fixture_suite();
  if (list || emit_dir.empty()) {
    std::cout << "name\texpected\tkind\n";
    for (const auto& f : suite) {
      std::cout << f.name << "\t" << coord::to_string(f.expected_outcome) << "\t"
                << (f.expected_kind ? coord::to_string(*f.expected_kind) : "-") << "\n";
    }
  }
  if (!emit_dir.empty()) {
    namespace fs = std::filesystem;
    for (const auto& f : suite) {
      fs::path dir = fs::path(emit_dir) / f.name;
      fs::create_directories(dir);
      write_file((dir / "topology.json").string(), f.topology_text);
      write_file((dir / "protocol.cpl").string(), f.protocol_text);
    }
    std::cout << "wrote " << suite.size() << " fixtures under " << emit_dir << "\n";
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verify, simulate, and repair multi-agent coordination protocols"};
  app.require_subcommand(1);

  std::string topo_path, proto_path, log_path;

  auto* validate = app.add_subcommand("validate", "Validate a topology (and optionally a protocol)");
  validate->add_option("topology", topo_path)->required();
  validate->add_option("protocol", proto_path);

  CheckFlags check_flags;
  auto* chk = app.add_subcommand("check", "Explore the bounded state space and check safety");
  chk->add_option("topology", topo_path)->required();
  chk->add_option("protocol", proto_path)->required();
  add_check_flags(chk, check_flags);

  CheckFlags matrix_flags;
  std::string bounds_csv = "3,5,7";
  auto* matrix = app.add_subcommand("matrix", "Re-check at several queue bounds");
  matrix->add_option("topology", topo_path)->required();
  matrix->add_option("protocol", proto_path)->required();
  matrix->add_option("--bounds", bounds_csv, "Comma-separated bound list")->default_val("3,5,7");
  add_check_flags(matrix, matrix_flags, /*with_format=*/false);

  SimFlags sim_flags;
  auto* sim = app.add_subcommand("simulate", "Run the protocol under the runtime monitor");
  sim->add_option("topology", topo_path)->required();
  sim->add_option("protocol", proto_path)->required();
  sim->add_option("--seed", sim_flags.seed);
  sim->add_option("--scheduler", sim_flags.scheduler)
      ->check(CLI::IsMember({"random", "round-robin"}));
  sim->add_option("--fault", sim_flags.faults, "AGENT:LABEL:OCCURRENCE (repeatable)");
  sim->add_option("--fault-rate", sim_flags.fault_rate);
  sim->add_option("--max-steps", sim_flags.max_steps);
  sim->add_option("--livelock-window", sim_flags.livelock_window);
  sim->add_option("--trace", sim_flags.trace_path, "Replay a machine trace as the schedule");
  sim->add_option("--log-out", sim_flags.log_out, "Write the event log here");

  auto* replay = app.add_subcommand("replay", "Replay an event log against a topology");
  replay->add_option("topology", topo_path)->required();
  replay->add_option("log", log_path)->required();

  CheckFlags repair_flags;
  std::string adapter_cmd, rules_path;
  // COORDCHECK_WORKDIR overrides the default loop working directory.
  const char* env_workdir = std::getenv("COORDCHECK_WORKDIR");
  std::string workdir = env_workdir != nullptr ? env_workdir : "repair_work";
  bool identity = false;
  int max_iterations = 4;
  auto* repair = app.add_subcommand("repair", "Drive the generate/check/repair loop");
  repair->add_option("topology", topo_path)->required();
  repair->add_option("protocol", proto_path)->required();
  repair->add_option("--adapter", adapter_cmd, "Shell command run in the loop workdir");
  repair->add_option("--rules", rules_path, "Scripted rewrite rules file");
  repair->add_flag("--identity", identity, "Use the identity adapter");
  repair->add_option("--max-iterations", max_iterations)->default_val(4);
  repair->add_option("--workdir", workdir, "Loop working directory (default $COORDCHECK_WORKDIR)");
  add_check_flags(repair, repair_flags, /*with_format=*/false);

  bool list_fixtures = false;
  std::string emit_dir;
  auto* fixtures = app.add_subcommand("fixtures", "List or emit the bundled fixtures");
  fixtures->add_flag("--list", list_fixtures);
  fixtures->add_option("--emit", emit_dir, "Write fixture files under this directory");

  try {
    app.parse(argc, argv);
    if (validate->parsed()) return cmd_validate(topo_path, proto_path);
    if (chk->parsed()) return cmd_check(topo_path, proto_path, check_flags);
    if (matrix->parsed()) return cmd_matrix(topo_path, proto_path, bounds_csv, matrix_flags);
    if (sim->parsed()) return cmd_simulate(topo_path, proto_path, sim_flags);
    if (replay->parsed()) return cmd_replay(topo_path, log_path);
    if (repair->parsed()) {
      return cmd_repair(topo_path, proto_path, adapter_cmd, rules_path, identity, max_iterations,
                        workdir, repair_flags);
    }
    if (fixtures->parsed()) return cmd_fixtures(list_fixtures, emit_dir);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const coord::TopologyParseError& e) {
    std::cerr << "topology error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const coord::ProtocolParseError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitUsage;
  }
}
