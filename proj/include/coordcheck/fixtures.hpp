#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coordcheck/checker.hpp"

namespace coord {

// A curated topology+protocol pair with its expected verdict. The suite is
// the regression bed for the checker, simulator, and repair loop.
struct Fixture {
  std::string name;
  std::string topology_text;
  std::string protocol_text;
  CheckOutcome expected_outcome = CheckOutcome::Pass;
  std::optional<ViolationKind> expected_kind;
  std::string origin;  // the coordination failure pattern this encodes

  System build() const;
};

// Dining philosophers: n agents, n fork locks, no channels. Each philosopher
// eats `meals` times and terminates. The naive variant always takes its own
// fork first; the ordered variant acquires in global fork order.
Fixture philosophers_fixture(int n, bool ordered, int meals = 1);

// All shipped fixtures, in the order they are documented.
std::vector<Fixture> fixture_suite();

const Fixture& fixture_by_name(const std::string& name);

}  // namespace coord
