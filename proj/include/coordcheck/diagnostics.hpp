#pragma once

#include <string>
#include <vector>

namespace coord {

enum class Severity { Error, Advisory };

// One finding, addressed by a structural path ("channels[3].labels") so
// downstream tooling (the repair loop) can locate it mechanically.
struct Diagnostic {
  Severity severity = Severity::Error;
  std::string path;
  std::string message;
};

struct ValidationReport {
  std::vector<Diagnostic> diagnostics;

  bool ok() const {
    for (const auto& d : diagnostics) {
      if (d.severity == Severity::Error) return false;
    }
    return true;
  }

  size_t error_count() const {
    size_t n = 0;
    for (const auto& d : diagnostics) {
      if (d.severity == Severity::Error) ++n;
    }
    return n;
  }

  void add_error(std::string path, std::string message) {
    diagnostics.push_back({Severity::Error, std::move(path), std::move(message)});
  }
  void add_advisory(std::string path, std::string message) {
    diagnostics.push_back({Severity::Advisory, std::move(path), std::move(message)});
  }

  std::string to_string() const;
};

}  // namespace coord
