#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coordcheck/checker.hpp"

namespace coord {

// Everything a repair adapter sees for one iteration.
struct RepairContext {
  std::string topology_text;
  std::string protocol_text;
  std::string verdict_text;  // machine trace for violations, summary otherwise
  int iteration = 0;
  std::vector<std::string> history;  // violation kinds of prior iterations
  std::filesystem::path context_dir; // exchange directory with these as files
};

// External transformation from context to revised protocol text.
// nullopt (or a thrown exception) marks the attempt as an adapter failure.
using RepairAdapter = std::function<std::optional<std::string>(const RepairContext&)>;

enum class LoopOutcome { Verified, BudgetExhausted, AdapterFailed };
const char* to_string(LoopOutcome o);

struct IterationRecord {
  int iteration = 0;
  std::string verdict;  // "pass", violation kind, or "resource-exhausted"
  CheckStats stats;
};

struct LoopReport {
  LoopOutcome outcome = LoopOutcome::Verified;
  int iterations_used = 0;  // repair rounds consumed; 0 = verified as given
  std::vector<IterationRecord> iterations;
  std::string final_protocol_text;
};

struct LoopConfig {
  CheckConfig check;
  int max_iterations = 4;    // repair rounds after the initial check
  int adapter_retry_cap = 2; // attempts per iteration before AdapterFailed
  std::filesystem::path workdir;  // every iteration is persisted here
};

// check -> render counterexample -> adapter -> re-check, until Pass, budget,
// or an unrecoverable adapter failure. Persists iter_<n>/protocol.txt and
// iter_<n>/verdict.txt plus the context/ exchange directory under workdir.
// Throws std::invalid_argument for an invalid topology or unparseable initial
// protocol.
LoopReport run_loop(const std::string& topology_text, const std::string& protocol_text,
                    const RepairAdapter& adapter, const LoopConfig& cfg);

struct RewriteRule {
  std::string pattern;      // ECMAScript regex, searched in the protocol text
  std::string replacement;  // regex_replace format string
};

// Deterministic test double: applies the first rule whose pattern matches
// (all occurrences); no match returns the text unchanged. Throws
// std::invalid_argument on a malformed pattern.
RepairAdapter scripted_adapter(const std::vector<RewriteRule>& rules);

// Runs `command` through /bin/sh with the working directory set to the loop
// workdir and stdout captured as the revised protocol. The context files are
// at context/topology.json, context/protocol.txt, context/verdict.txt,
// context/history.json. Nonzero exit or empty output = adapter failure.
RepairAdapter subprocess_adapter(const std::string& command,
                                 std::chrono::seconds timeout = std::chrono::seconds(60));

}  // namespace coord
