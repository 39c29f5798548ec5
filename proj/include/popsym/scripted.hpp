#pragma once

#include <optional>
#include <string>

#include "popsym/builtins.hpp"
#include "popsym/schedulers.hpp"

namespace popsym {

/// Hand-built schedule of a builtin family on c0. Parity has none.
Schedule script_for(const Builtin& b, const Configuration& c0);

// Lower bound the scripted schedule is known to meet on c0, checked
// in integer arithmetic.
struct BoundCheck {
  std::string formula;
  double value = 0;
  bool strict = false;  // achieved must exceed value rather than reach it
  bool satisfied = false;
};

/// nullopt when the family has no bound or the predicate is false on c0.
std::optional<BoundCheck> check_bound(const Builtin& b, const Configuration& c0, Count achieved);

}  // namespace popsym
