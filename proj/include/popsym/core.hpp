#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "popsym/errors.hpp"

namespace popsym {

using StateId = std::uint32_t;
using Count = std::uint32_t;

/// Ordered (initiator, responder) pair of states.
struct StatePair {
  StateId initiator = 0;
  StateId responder = 0;

  StatePair mirrored() const { return {responder, initiator}; }
  friend auto operator<=>(const StatePair&, const StatePair&) = default;
};

struct Rule {
  StatePair lhs;
  StatePair rhs;

  bool effective() const { return lhs != rhs; }
  friend bool operator==(const Rule&, const Rule&) = default;
};

struct InputBinding {
  std::string symbol;
  StateId state = 0;
  friend bool operator==(const InputBinding&, const InputBinding&) = default;
};

// A population protocol (X, Y, Q, I, O, delta). Transitions not listed are
// ineffective; delta() is total on Q x Q. Immutable after construction.
class Protocol {
 public:
  Protocol(std::string name, std::vector<std::string> states, std::vector<InputBinding> inputs,
           std::vector<std::string> output_symbols, std::vector<std::size_t> output_of_state,
           const std::vector<Rule>& rules);

  const std::string& name() const { return name_; }
  std::size_t num_states() const { return states_.size(); }
  const std::vector<std::string>& states() const { return states_; }
  const std::string& state_name(StateId q) const { return states_.at(q); }
  std::optional<StateId> find_state(std::string_view name) const;
  StateId state(std::string_view name) const;  // throws SemanticError if unknown

  const std::vector<InputBinding>& inputs() const { return inputs_; }
  StateId input_state(std::string_view symbol) const;
  /// Q0: sorted image of the input map.
  const std::vector<StateId>& initial_states() const { return initial_states_; }

  const std::vector<std::string>& output_symbols() const { return output_symbols_; }
  std::size_t output_index(StateId q) const { return output_of_state_.at(q); }
  const std::string& output_symbol(StateId q) const { return output_symbols_[output_of_state_.at(q)]; }

  StatePair delta(StateId a, StateId b) const { return table_[a * states_.size() + b]; }
  StatePair delta(StatePair p) const { return delta(p.initiator, p.responder); }
  bool is_effective(StateId a, StateId b) const { return delta(a, b) != StatePair{a, b}; }

  /// Effective transitions in (initiator, responder) order.
  std::vector<Rule> effective_rules() const;

 private:
  std::string name_;
  std::vector<std::string> states_;
  std::vector<InputBinding> inputs_;
  std::vector<StateId> initial_states_;
  std::vector<std::string> output_symbols_;
  std::vector<std::size_t> output_of_state_;
  std::vector<StatePair> table_;
};

// Count-per-state snapshot of a population. Population size is at least 1.
class Configuration {
 public:
  explicit Configuration(std::vector<Count> counts);

  static Configuration from_named(const Protocol& p, const std::map<std::string, Count>& named);

  Count operator[](StateId q) const { return counts_[q]; }
  std::size_t num_states() const { return counts_.size(); }
  std::span<const Count> counts() const { return counts_; }
  std::uint64_t population() const { return population_; }
  std::vector<StateId> support() const;

  friend bool operator==(const Configuration& a, const Configuration& b) { return a.counts_ == b.counts_; }
  friend auto operator<=>(const Configuration& a, const Configuration& b) { return a.counts_ <=> b.counts_; }

 private:
  std::vector<Count> counts_;
  std::uint64_t population_ = 0;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const noexcept;
};

struct Application {
  StatePair pair;
  Count multiplicity = 1;
  friend bool operator==(const Application&, const Application&) = default;
};

// One matching's worth of simultaneous interactions, as a multiset of ordered
// state pairs. Stored sorted by pair with duplicates merged.
class ParallelStep {
 public:
  explicit ParallelStep(std::vector<Application> applications);
  static ParallelStep single(StatePair p) { return ParallelStep({{p, 1}}); }

  const std::vector<Application>& applications() const { return applications_; }
  std::uint64_t interactions() const;
  /// Number of participants in each state.
  std::vector<std::uint64_t> demand(std::size_t num_states) const;

  friend bool operator==(const ParallelStep&, const ParallelStep&) = default;

 private:
  std::vector<Application> applications_;
};

/// s(c): smallest count among states present in c.
Count symmetry_of_config(const Configuration& c);

/// Fires every application against c simultaneously.
Configuration apply_step(const Protocol& p, const Configuration& c, const ParallelStep& step);

std::vector<StatePair> enabled_effective_pairs(const Protocol& p, const Configuration& c);

/// Node count per output symbol, keyed by symbol; symbols with zero nodes are omitted.
std::map<std::string, std::uint64_t> output_of_config(const Protocol& p, const Configuration& c);

/// The single output shared by every node, if there is one.
std::optional<std::size_t> unanimous_output(const Protocol& p, const Configuration& c);

class ExecutionTrace {
 public:
  /// Replays steps from c0, validating each one.
  ExecutionTrace(const Protocol& p, Configuration c0, std::vector<ParallelStep> steps);

  const Configuration& initial() const { return configurations_.front(); }
  const Configuration& terminal() const { return configurations_.back(); }
  const std::vector<ParallelStep>& steps() const { return steps_; }
  const std::vector<Configuration>& configurations() const { return configurations_; }
  Count min_symmetry() const { return min_symmetry_; }
  Count symmetry_breaking() const { return symmetry_of_config(initial()) - min_symmetry_; }

 private:
  std::vector<ParallelStep> steps_;
  std::vector<Configuration> configurations_;
  Count min_symmetry_ = 0;
};

std::string format_configuration(const Protocol& p, const Configuration& c);

}  // namespace popsym
