#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "popsym/core.hpp"

namespace popsym {

enum class Family { count_to_x, positive_lc, majority, k_majority, parity };

std::string family_name(Family f);
Family parse_family(const std::string& name);

// A generated protocol together with the facts the analyses need about it:
// the predicate it computes, an analytic output-stability test usable at
// population sizes far beyond exhaustive search, and its alarm state.
class Builtin {
 public:
  static Builtin count_to_x(unsigned x);
  static Builtin positive_lc(std::vector<unsigned> coefficients, unsigned threshold);
  static Builtin majority();
  static Builtin k_majority(unsigned k);
  static Builtin parity();

  Family family() const { return family_; }
  const Protocol& protocol() const { return *protocol_; }
  std::shared_ptr<const Protocol> shared_protocol() const { return protocol_; }
  /// e.g. "count_to_x(x=5)"
  std::string provenance() const;

  unsigned x() const { return threshold_; }
  unsigned threshold() const { return threshold_; }
  unsigned k() const { return k_; }
  const std::vector<unsigned>& coefficients() const { return coefficients_; }

  /// Index (into output_symbols) of the predicate value. Valid for any
  /// configuration reachable from an initial one: every builtin conserves the
  /// quantity its predicate is stated over.
  std::size_t expected_output(const Configuration& c) const;

  /// Output index if c is output-stable, decided analytically.
  std::optional<std::size_t> stable_output(const Configuration& c) const;

  std::optional<StateId> alarm_state() const { return alarm_; }

  /// Signed coefficient per input symbol when the predicate is a linear
  /// threshold; empty for parity.
  std::optional<std::vector<int>> linear_coefficients() const;

  /// Initial configuration from per-input-symbol counts.
  Configuration initial(const std::map<std::string, Count>& per_input) const;

 private:
  Builtin(Family f, Protocol p);

  Family family_;
  std::shared_ptr<const Protocol> protocol_;
  unsigned threshold_ = 0;
  unsigned k_ = 0;
  std::vector<unsigned> coefficients_;
  std::optional<StateId> alarm_;
};

/// Initial configuration of any protocol from per-input-symbol counts.
Configuration initial_configuration(const Protocol& p, const std::map<std::string, Count>& per_input);

}  // namespace popsym
