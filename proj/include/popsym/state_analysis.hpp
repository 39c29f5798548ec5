#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "popsym/core.hpp"

namespace popsym {

// Binary in-tree witnessing that a state can be produced from initial states.
// Every internal node's label is produced by an interaction between its two
// children's labels (in some orientation); leaves are initial states.
struct ProductionTree {
  struct Node {
    StateId label = 0;
    std::optional<std::pair<std::size_t, std::size_t>> children;
  };
  std::vector<Node> nodes;
  std::size_t root = 0;

  std::size_t depth() const;
  std::size_t leaf_count() const;
  /// Leaf labels, left to right.
  std::vector<StateId> leaves() const;
};

/// Least fixpoint from Q0 under "some rule {b,c} -> {a,.}".
std::vector<StateId> reachable_states(const Protocol& p);

/// Tree built from closure backpointers, with repeated labels on a path
/// collapsed; nullopt if q is unreachable.
std::optional<ProductionTree> production_tree(const Protocol& p, StateId q);

// Replaces the subtree at the highest occurrence of a repeated label on a
// root-leaf path by the subtree at its lowest occurrence, until no path
// repeats a label. Depth is then below |Q|.
ProductionTree collapse_repeated_paths(const ProductionTree& tree);

/// Structural check of the tree against the protocol's rules and Q0.
bool is_valid_production_tree(const Protocol& p, const ProductionTree& tree);

// Sound under-approximation of the reachable output-stable states: for each
// output y, the greatest S within O^-1(y) such that every interaction touching
// a member of S yields at least one member of S.
std::vector<StateId> output_stable_states(const Protocol& p);

/// States q with {x,q} -> (q,q) for every x, in both orientations.
std::vector<StateId> disseminating_states(const Protocol& p);

// Merges the detected reachable output-stable states into the lowest-numbered
// one, q, and rewrites every rule that mentions q to produce (q,q).
// Throws HypothesisViolated when no reachable output-stable state exists.
Protocol disseminating_transform(const Protocol& p);

struct SignLint {
  bool mixed_signs = false;
  std::vector<StateId> reachable_output_stable;
  bool consistent = true;
};

/// Mixed-sign linear predicates admit no reachable output-stable state.
SignLint mixed_sign_stability_check(const Protocol& p, const std::vector<int>& coefficients);

struct StableStateReport {
  std::vector<StateId> reachable;
  std::vector<StateId> output_stable;
  /// Disseminating and reachable.
  std::vector<StateId> disseminating;
  std::map<StateId, ProductionTree> trees;
};

StableStateReport analyze_states(const Protocol& p);

}  // namespace popsym
