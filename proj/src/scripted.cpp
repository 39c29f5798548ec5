#include "popsym/scripted.hpp"

#include <algorithm>
#include <cstdlib>

namespace popsym {

Schedule script_for(const Builtin& b, const Configuration& c0) {
  switch (b.family()) {
    case Family::count_to_x: return script_count_to_x(b.x(), c0);
    case Family::positive_lc: return script_positive_lc(b.coefficients(), b.threshold(), c0);
    case Family::majority: return script_majority(c0);
    case Family::k_majority: return script_k_majority(b.k(), c0);
    case Family::parity: break;
  }
  throw UnsupportedCase(b.provenance() + " has no scripted schedule");
}

std::optional<BoundCheck> check_bound(const Builtin& b, const Configuration& c0, Count achieved) {
  const std::int64_t s = achieved;
  const std::int64_t nmin = symmetry_of_config(c0);  // N_min for an initial configuration
  BoundCheck r;
  switch (b.family()) {
    case Family::count_to_x: {
      if (b.expected_output(c0) != 1) return std::nullopt;
      const std::int64_t x = b.x();
      const std::int64_t groups = c0[b.protocol().input_state("1")] / x;
      r.formula = "(2/3)*floor(N1/x) - (x-1)/3";
      r.value = (2.0 * static_cast<double>(groups) - static_cast<double>(x - 1)) / 3.0;
      r.satisfied = 3 * s >= 2 * groups - (x - 1);
      return r;
    }
    case Family::positive_lc: {
      if (b.expected_output(c0) != 1) return std::nullopt;
      // Sum of coefficients over inputs present in c0, capped like the generator.
      std::int64_t sum = 0;
      for (std::size_t i = 0; i < b.coefficients().size(); ++i)
        if (c0[b.protocol().input_state("s" + std::to_string(i + 1))] > 0)
          sum += std::min(b.coefficients()[i], b.threshold());
      const std::int64_t c = b.threshold();
      const std::int64_t fl = nmin * sum / (c + 2 * sum);
      r.formula = "floor(N_min/(c/sum(a)+2)) - 2";
      r.value = static_cast<double>(fl - 2);
      r.strict = true;
      r.satisfied = s > fl - 2;
      return r;
    }
    case Family::majority: {
      const std::int64_t na = c0[b.protocol().input_state("a")], nb = c0[b.protocol().input_state("b")];
      if (na == 0 || nb == 0) return std::nullopt;
      const std::int64_t bound = na == nb ? nmin : std::min(nmin, std::abs(na - nb));
      r.formula = na == nb ? "N_min (tie, no breaking)" : "min(N_min, |Na-Nb|)";
      r.value = static_cast<double>(bound);
      r.satisfied = s >= bound;
      return r;
    }
    case Family::k_majority: {
      r.formula = "k";
      r.value = b.k();
      r.satisfied = s >= std::int64_t{b.k()};
      return r;
    }
    case Family::parity: break;
  }
  return std::nullopt;
}

}  // namespace popsym
