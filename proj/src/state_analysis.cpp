#include "popsym/state_analysis.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace popsym {

std::size_t ProductionTree::depth() const {
  std::function<std::size_t(std::size_t)> walk = [&](std::size_t v) -> std::size_t {
    if (!nodes[v].children) return 0;
    return 1 + std::max(walk(nodes[v].children->first), walk(nodes[v].children->second));
  };
  return walk(root);
}

std::vector<StateId> ProductionTree::leaves() const {
  std::vector<StateId> out;
  std::function<void(std::size_t)> walk = [&](std::size_t v) {
    if (!nodes[v].children) {
      out.push_back(nodes[v].label);
      return;
    }
    walk(nodes[v].children->first);
    walk(nodes[v].children->second);
  };
  walk(root);
  return out;
}

std::size_t ProductionTree::leaf_count() const { return leaves().size(); }

namespace {

struct Closure {
  std::vector<bool> reachable;
  std::vector<std::optional<StatePair>> producer;  // children labels, empty for Q0
};

// Jacobi iteration: each round only combines states known at its start, so a
// backpointer always points to strictly earlier rounds.
Closure close(const Protocol& p) {
  const auto q = static_cast<StateId>(p.num_states());
  Closure c{std::vector<bool>(q, false), std::vector<std::optional<StatePair>>(q)};
  for (StateId s : p.initial_states()) c.reachable[s] = true;
  while (true) {
    std::vector<std::pair<StateId, StatePair>> fresh;
    std::vector<bool> claimed = c.reachable;
    for (StateId a = 0; a < q; ++a)
      for (StateId b = 0; b < q; ++b) {
        if (!c.reachable[a] || !c.reachable[b]) continue;
        const StatePair out = p.delta(a, b);
        for (StateId s : {out.initiator, out.responder})
          if (!claimed[s]) {
            claimed[s] = true;
            fresh.push_back({s, {a, b}});
          }
      }
    if (fresh.empty()) break;
    for (auto& [s, from] : fresh) {
      c.reachable[s] = true;
      c.producer[s] = from;
    }
  }
  return c;
}

std::size_t build(const Closure& c, StateId q, ProductionTree& t) {
  const std::size_t id = t.nodes.size();
  t.nodes.push_back({q, std::nullopt});
  if (c.producer[q]) {
    const auto [b, d] = *c.producer[q];
    const std::size_t left = build(c, b, t);
    const std::size_t right = build(c, d, t);
    t.nodes[id].children = {left, right};
  }
  return id;
}

}  // namespace

std::vector<StateId> reachable_states(const Protocol& p) {
  const auto c = close(p);
  std::vector<StateId> out;
  for (StateId s = 0; s < p.num_states(); ++s)
    if (c.reachable[s]) out.push_back(s);
  return out;
}

ProductionTree collapse_repeated_paths(const ProductionTree& tree) {
  ProductionTree out;
  std::function<std::size_t(std::size_t)> copy = [&](std::size_t v) -> std::size_t {
    // Jump to the deepest descendant carrying the same label.
    while (true) {
      std::optional<std::size_t> best;
      std::size_t best_depth = 0;
      std::function<void(std::size_t, std::size_t)> scan = [&](std::size_t u, std::size_t d) {
        if (u != v && tree.nodes[u].label == tree.nodes[v].label && (!best || d > best_depth)) {
          best = u;
          best_depth = d;
        }
        if (tree.nodes[u].children) {
          scan(tree.nodes[u].children->first, d + 1);
          scan(tree.nodes[u].children->second, d + 1);
        }
      };
      scan(v, 0);
      if (!best) break;
      v = *best;
    }
    const std::size_t id = out.nodes.size();
    out.nodes.push_back({tree.nodes[v].label, std::nullopt});
    if (tree.nodes[v].children) {
      const std::size_t l = copy(tree.nodes[v].children->first);
      const std::size_t r = copy(tree.nodes[v].children->second);
      out.nodes[id].children = {l, r};
    }
    return id;
  };
  out.root = copy(tree.root);
  return out;
}

std::optional<ProductionTree> production_tree(const Protocol& p, StateId q) {
  if (q >= p.num_states()) return std::nullopt;
  const auto c = close(p);
  if (!c.reachable[q]) return std::nullopt;
  ProductionTree t;
  t.root = build(c, q, t);
  return collapse_repeated_paths(t);
}

bool is_valid_production_tree(const Protocol& p, const ProductionTree& tree) {
  const auto& q0 = p.initial_states();
  for (const auto& node : tree.nodes) {
    if (!node.children) {
      if (!std::binary_search(q0.begin(), q0.end(), node.label)) return false;
      continue;
    }
    const StateId b = tree.nodes[node.children->first].label;
    const StateId c = tree.nodes[node.children->second].label;
    bool produced = false;
    for (StatePair lhs : {StatePair{b, c}, StatePair{c, b}}) {
      const StatePair out = p.delta(lhs);
      produced = produced || out.initiator == node.label || out.responder == node.label;
    }
    if (!produced) return false;
  }
  return true;
}

std::vector<StateId> output_stable_states(const Protocol& p) {
  const auto q = static_cast<StateId>(p.num_states());
  std::vector<bool> keep(q, false);
  for (std::size_t y = 0; y < p.output_symbols().size(); ++y) {
    std::vector<bool> in(q, false);
    for (StateId s = 0; s < q; ++s) in[s] = p.output_index(s) == y;
    bool changed = true;
    while (changed) {
      changed = false;
      for (StateId s = 0; s < q; ++s) {
        if (!in[s]) continue;
        for (StateId x = 0; x < q && in[s]; ++x)
          for (StatePair lhs : {StatePair{s, x}, StatePair{x, s}}) {
            const StatePair out = p.delta(lhs);
            if (!in[out.initiator] && !in[out.responder]) {
              in[s] = false;
              changed = true;
              break;
            }
          }
      }
    }
    for (StateId s = 0; s < q; ++s) keep[s] = keep[s] || in[s];
  }
  std::vector<StateId> out;
  for (StateId s : reachable_states(p))
    if (keep[s]) out.push_back(s);
  return out;
}

std::vector<StateId> disseminating_states(const Protocol& p) {
  const auto q = static_cast<StateId>(p.num_states());
  std::vector<StateId> out;
  for (StateId s = 0; s < q; ++s) {
    bool ok = true;
    for (StateId x = 0; x < q && ok; ++x)
      ok = p.delta(x, s) == StatePair{s, s} && p.delta(s, x) == StatePair{s, s};
    if (ok) out.push_back(s);
  }
  return out;
}

Protocol disseminating_transform(const Protocol& p) {
  const auto stable = output_stable_states(p);
  if (stable.empty())
    throw HypothesisViolated("protocol '" + p.name() +
                             "' has no reachable output-stable state; the transform requires at least one");
  const StateId keep = stable.front();
  for (StateId s : stable)
    if (p.output_index(s) != p.output_index(keep))
      throw HypothesisViolated("reachable output-stable states '" + p.state_name(keep) + "' and '" +
                               p.state_name(s) + "' disagree on output; no such protocol computes a predicate");

  const auto q = static_cast<StateId>(p.num_states());
  std::vector<StateId> remap(q);
  std::vector<std::string> names;
  std::vector<std::size_t> outputs;
  for (StateId s = 0; s < q; ++s) {
    if (s != keep && std::binary_search(stable.begin(), stable.end(), s)) continue;
    remap[s] = static_cast<StateId>(names.size());
    names.push_back(p.state_name(s));
    outputs.push_back(p.output_index(s));
  }
  for (StateId s : stable) remap[s] = remap[keep];
  const StateId rep = remap[keep];

  std::map<StatePair, StatePair> table;
  for (StateId a = 0; a < q; ++a)
    for (StateId b = 0; b < q; ++b) {
      const StatePair out = p.delta(a, b);
      StatePair lhs{remap[a], remap[b]};
      StatePair rhs{remap[out.initiator], remap[out.responder]};
      if (lhs.initiator == rep || lhs.responder == rep || rhs.initiator == rep || rhs.responder == rep)
        rhs = {rep, rep};
      table.emplace(lhs, rhs);  // merged left-hand sides all rewrite to (rep, rep)
    }
  std::vector<Rule> rules;
  for (auto& [lhs, rhs] : table)
    if (lhs != rhs) rules.push_back({lhs, rhs});
  std::vector<InputBinding> inputs;
  for (const auto& in : p.inputs()) inputs.push_back({in.symbol, remap[in.state]});
  return Protocol(p.name() + "_disseminating", std::move(names), std::move(inputs), p.output_symbols(),
                  std::move(outputs), rules);
}

SignLint mixed_sign_stability_check(const Protocol& p, const std::vector<int>& coefficients) {
  SignLint lint;
  const bool pos = std::any_of(coefficients.begin(), coefficients.end(), [](int a) { return a > 0; });
  const bool neg = std::any_of(coefficients.begin(), coefficients.end(), [](int a) { return a < 0; });
  lint.mixed_signs = pos && neg;
  lint.reachable_output_stable = output_stable_states(p);
  lint.consistent = !lint.mixed_signs || lint.reachable_output_stable.empty();
  return lint;
}

StableStateReport analyze_states(const Protocol& p) {
  StableStateReport r;
  r.reachable = reachable_states(p);
  r.output_stable = output_stable_states(p);
  for (StateId s : disseminating_states(p))
    if (std::binary_search(r.reachable.begin(), r.reachable.end(), s)) r.disseminating.push_back(s);
  for (StateId s : r.reachable) r.trees.emplace(s, *production_tree(p, s));
  return r;
}

}  // namespace popsym
