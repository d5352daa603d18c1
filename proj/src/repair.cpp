#include "coordcheck/repair.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"

namespace coord {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const char* to_string(LoopOutcome o) {
  switch (o) {
    case LoopOutcome::Verified: return "verified";
    case LoopOutcome::BudgetExhausted: return "budget-exhausted";
    case LoopOutcome::AdapterFailed: return "adapter-failed";
  }
  return "?";
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string summary_verdict_text(const Verdict& v) {
  ordered_json doc;
  doc["schema"] = "coordcheck.trace/1";
  doc["outcome"] = to_string(v.outcome);
  ordered_json stats;
  stats["distinct_states"] = v.stats.distinct_states;
  stats["transitions"] = v.stats.transitions;
  stats["max_depth"] = v.stats.max_depth;
  stats["duration_us"] = v.stats.duration.count();
  doc["stats"] = std::move(stats);
  return doc.dump(2) + "\n";
}

std::string verdict_word(const Verdict& v) {
  if (v.outcome == CheckOutcome::Pass) return "pass";
  if (v.outcome == CheckOutcome::ResourceExhausted) return "resource-exhausted";
  return to_string(*v.violation_kind);
}

}  // namespace

LoopReport run_loop(const std::string& topology_text, const std::string& protocol_text,
                    const RepairAdapter& adapter, const LoopConfig& cfg) {
  Topology topo = parse_topology(topology_text);
  ValidationReport topo_report = validate_topology(topo);
  if (!topo_report.ok()) {
    throw std::invalid_argument("invalid topology:\n" + topo_report.to_string());
  }
  if (cfg.workdir.empty()) throw std::invalid_argument("loop needs a working directory");
  fs::create_directories(cfg.workdir);
  const fs::path context_dir = cfg.workdir / "context";

  LoopReport report;
  std::string current = protocol_text;
  std::vector<std::string> history;

  for (int iteration = 0;; ++iteration) {
    ProtocolProgram program;
    try {
      program = parse_protocol(current);
    } catch (const ProtocolParseError& e) {
      if (iteration == 0) {
        throw std::invalid_argument(std::string("initial protocol does not parse: ") + e.what());
      }
      throw;  // unreachable: adapter output is validated before adoption
    }
    System sys(std::move(program), topo);
    Verdict verdict = check(sys, cfg.check);

    const fs::path iter_dir = cfg.workdir / ("iter_" + std::to_string(iteration));
    fs::create_directories(iter_dir);
    write_file(iter_dir / "protocol.txt", current);
    std::string verdict_text = verdict.outcome == CheckOutcome::Violation
                                   ? render_trace(sys, verdict, cfg.check, TraceStyle::Machine)
                                   : summary_verdict_text(verdict);
    write_file(iter_dir / "verdict.txt", verdict_text);
    report.iterations.push_back({iteration, verdict_word(verdict), verdict.stats});

    if (verdict.outcome == CheckOutcome::Pass) {
      report.outcome = LoopOutcome::Verified;
      report.iterations_used = iteration;
      report.final_protocol_text = current;
      return report;
    }
    if (iteration == cfg.max_iterations) {
      report.outcome = LoopOutcome::BudgetExhausted;
      report.iterations_used = iteration;
      report.final_protocol_text = current;
      return report;
    }

    RepairContext ctx;
    ctx.topology_text = topology_text;
    ctx.protocol_text = current;
    ctx.verdict_text = verdict_text;
    ctx.iteration = iteration;
    ctx.history = history;
    ctx.context_dir = context_dir;

    fs::create_directories(context_dir);
    write_file(context_dir / "topology.json", ctx.topology_text);
    write_file(context_dir / "protocol.txt", ctx.protocol_text);
    write_file(context_dir / "verdict.txt", ctx.verdict_text);
    ordered_json hist = ordered_json::array();
    for (const auto& h : history) hist.push_back(h);
    ordered_json meta;
    meta["iteration"] = iteration;
    meta["history"] = std::move(hist);
    write_file(context_dir / "history.json", meta.dump(2) + "\n");

    bool adopted = false;
    for (int attempt = 0; attempt <= cfg.adapter_retry_cap && !adopted; ++attempt) {
      std::optional<std::string> revised;
      try {
        revised = adapter(ctx);
      } catch (const std::exception&) {
        revised = std::nullopt;
      }
      if (!revised) continue;
      try {
        ProtocolProgram candidate = parse_protocol(*revised);
        ValidationReport binding = bind_check(candidate, topo);
        if (!binding.ok()) continue;
      } catch (const ProtocolParseError&) {
        continue;
      }
      current = *revised;
      adopted = true;
    }
    if (!adopted) {
      // The prior protocol stays on disk under iter_<n>/; nothing is lost.
      report.outcome = LoopOutcome::AdapterFailed;
      report.iterations_used = iteration;
      report.final_protocol_text = current;
      return report;
    }
    history.push_back(verdict_word(verdict));
  }
}

RepairAdapter scripted_adapter(const std::vector<RewriteRule>& rules) {
  std::vector<std::pair<std::regex, std::string>> compiled;
  for (const auto& r : rules) {
    try {
      compiled.emplace_back(std::regex(r.pattern), r.replacement);
    } catch (const std::regex_error& e) {
      throw std::invalid_argument("malformed rewrite rule '" + r.pattern + "': " + e.what());
    }
  }
  return [compiled](const RepairContext& ctx) -> std::optional<std::string> {
    for (const auto& [pattern, replacement] : compiled) {
      if (std::regex_search(ctx.protocol_text, pattern)) {
        return std::regex_replace(ctx.protocol_text, pattern, replacement);
      }
    }
    return ctx.protocol_text;  // no match: identity
  };
}

RepairAdapter subprocess_adapter(const std::string& command, std::chrono::seconds timeout) {
  return [command, timeout](const RepairContext& ctx) -> std::optional<std::string> {
    const fs::path workdir = ctx.context_dir.parent_path();
    const fs::path script = ctx.context_dir / "adapter_cmd.sh";
    const fs::path out = ctx.context_dir / "revised_protocol.txt";
    const fs::path err = ctx.context_dir / "adapter_stderr.txt";
    write_file(script, "cd '" + workdir.string() + "'\n" + command + "\n");
    std::string full = "timeout " + std::to_string(timeout.count()) + " /bin/sh '" +
                       script.string() + "' > '" + out.string() + "' 2> '" + err.string() + "'";
    int rc = std::system(full.c_str());
    if (rc != 0) return std::nullopt;
    std::string revised = read_file(out);
    if (revised.empty()) return std::nullopt;
    return revised;
  };
}

}  // namespace coord
