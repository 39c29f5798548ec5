#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "popsym/core.hpp"

namespace popsym {

inline constexpr std::size_t kDefaultNodeBudget = 2'000'000;

/// Every configuration other than c reachable by one valid parallel step of
/// at most max_interactions firings, each paired with one step producing it.
/// Sorted by configuration. max_interactions = 1 gives sequential semantics.
std::vector<std::pair<Configuration, ParallelStep>> successor_steps(const Protocol& p, const Configuration& c,
                                                                    std::uint64_t max_interactions = UINT64_MAX);
std::vector<Configuration> successors(const Protocol& p, const Configuration& c,
                                      std::uint64_t max_interactions = UINT64_MAX);

// Configurations reachable from a root under all valid parallel steps.
// Output-stability of every node is computed once on first request.
class ConfigGraph {
 public:
  ConfigGraph(const Protocol& p, Configuration root, std::size_t node_budget = kDefaultNodeBudget);

  const Protocol& protocol() const { return *p_; }
  std::size_t size() const { return nodes_.size(); }
  const Configuration& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<std::uint32_t>& edges(std::size_t i) const { return edges_[i]; }
  std::optional<std::size_t> index_of(const Configuration& c) const;

  /// Output index when every configuration reachable from node i is unanimous on it.
  std::optional<std::size_t> stable_output(std::size_t i) const;

 private:
  void compute_stability() const;

  const Protocol* p_;
  std::vector<Configuration> nodes_;
  std::vector<std::vector<std::uint32_t>> edges_;
  std::unordered_map<Configuration, std::uint32_t, ConfigurationHash> index_;
  mutable std::optional<std::vector<std::optional<std::size_t>>> stable_;
};

struct StabilityVerdict {
  bool stable = false;
  std::optional<std::size_t> output;
  std::size_t explored = 0;
};

/// Raises AnalysisLimit when the reachable set exceeds the budget.
StabilityVerdict is_output_stable_config(const Protocol& p, const Configuration& c,
                                         std::size_t node_budget = kDefaultNodeBudget);

/// Outputs y for which some output-stable configuration with output y is reachable.
std::set<std::size_t> stabilizable_outputs(const Protocol& p, const Configuration& c0,
                                           std::size_t node_budget = kDefaultNodeBudget);

struct SymmetryReport {
  Configuration initial;
  Count exact_symmetry = 0;
  Count exact_breaking = 0;
  std::size_t expected_output = 0;
  std::vector<ParallelStep> witness;
  Configuration witness_terminal;
  Count witness_min_symmetry = 0;
  std::size_t nodes = 0;
  std::size_t thresholds_tried = 0;
  /// (threshold, a correct stable configuration is reachable within it), descending.
  std::vector<std::pair<Count, bool>> sweep;
};

// Largest k such that a correct output-stable configuration is reachable from
// c0 through configurations of symmetry >= k. Stability itself is judged in
// the unrestricted graph. Without an expected output, every reachable stable
// configuration must agree on one.
SymmetryReport exact_symmetry(const Protocol& p, const Configuration& c0,
                              std::optional<std::size_t> expected_output = std::nullopt,
                              std::size_t node_budget = kDefaultNodeBudget);

struct ParityBoundReport {
  std::vector<std::pair<unsigned, Count>> values;  // (n, exact symmetry)
  Count bound = 0;                                 // 2^{|Q|-1}
  bool holds = true;
};

/// Exact symmetry of the all-input configuration for each n, checked against 2^{|Q|-1}.
ParityBoundReport verify_parity_bound(const Protocol& p, unsigned n_lo, unsigned n_hi,
                                      std::size_t node_budget = kDefaultNodeBudget);

}  // namespace popsym
