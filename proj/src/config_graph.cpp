#include "popsym/config_graph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>

namespace popsym {

namespace {

// Ordered pairs whose firing changes the configuration, one representative
// per (reactant multiset, product multiset).
struct Reaction {
  StatePair pair;
  StatePair out;
};

std::vector<Reaction> reactions_enabled(const Protocol& p, const Configuration& c) {
  std::map<std::pair<StatePair, StatePair>, StatePair> seen;
  auto sorted = [](StatePair x) { return x.initiator <= x.responder ? x : x.mirrored(); };
  for (StatePair pr : enabled_effective_pairs(p, c)) {
    const StatePair out = p.delta(pr);
    if (sorted(out) == sorted(pr)) continue;  // swaps roles only
    seen.emplace(std::make_pair(sorted(pr), sorted(out)), pr);
  }
  std::vector<Reaction> out;
  for (auto& [key, pr] : seen) out.push_back({pr, p.delta(pr)});
  return out;
}

void enumerate(const std::vector<Reaction>& rs, std::size_t r, std::int64_t room, std::vector<std::int64_t>& budget,
               std::vector<std::int64_t>& next, std::vector<Application>& apps,
               std::map<Configuration, ParallelStep>& found) {
  if (r == rs.size()) {
    if (apps.empty()) return;
    std::vector<Count> counts(next.begin(), next.end());
    Configuration c(std::move(counts));
    if (!found.contains(c)) found.emplace(std::move(c), ParallelStep(apps));
    return;
  }
  const Reaction& rx = rs[r];
  const StateId a = rx.pair.initiator, b = rx.pair.responder;
  const std::int64_t most = std::min(room, a == b ? budget[a] / 2 : std::min(budget[a], budget[b]));
  enumerate(rs, r + 1, room, budget, next, apps, found);
  for (std::int64_t m = 1; m <= most; ++m) {
    budget[a] -= 1;
    budget[b] -= 1;
    next[a] -= 1;
    next[b] -= 1;
    next[rx.out.initiator] += 1;
    next[rx.out.responder] += 1;
    apps.push_back({rx.pair, static_cast<Count>(m)});
    enumerate(rs, r + 1, room - m, budget, next, apps, found);
    apps.pop_back();
  }
  budget[a] += most;
  budget[b] += most;
  next[a] += most;
  next[b] += most;
  next[rx.out.initiator] -= most;
  next[rx.out.responder] -= most;
}

}  // namespace

std::vector<std::pair<Configuration, ParallelStep>> successor_steps(const Protocol& p, const Configuration& c,
                                                                    std::uint64_t max_interactions) {
  const auto rs = reactions_enabled(p, c);
  std::vector<std::int64_t> budget(c.counts().begin(), c.counts().end());
  std::vector<std::int64_t> next = budget;
  std::vector<Application> apps;
  std::map<Configuration, ParallelStep> found;
  const auto room = static_cast<std::int64_t>(std::min<std::uint64_t>(max_interactions, c.population()));
  enumerate(rs, 0, room, budget, next, apps, found);
  found.erase(c);
  return {std::make_move_iterator(found.begin()), std::make_move_iterator(found.end())};
}

std::vector<Configuration> successors(const Protocol& p, const Configuration& c, std::uint64_t max_interactions) {
  std::vector<Configuration> out;
  for (auto& [next, step] : successor_steps(p, c, max_interactions)) out.push_back(std::move(next));
  return out;
}

ConfigGraph::ConfigGraph(const Protocol& p, Configuration root, std::size_t node_budget) : p_(&p) {
  if (root.num_states() != p.num_states()) throw InvalidInput("configuration does not match protocol");
  index_.emplace(root, 0);
  nodes_.push_back(std::move(root));
  edges_.emplace_back();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Configuration here = nodes_[i];
    for (auto& next : successors(p, here)) {
      auto [it, fresh] = index_.emplace(next, static_cast<std::uint32_t>(nodes_.size()));
      if (fresh) {
        if (nodes_.size() >= node_budget)
          throw AnalysisLimit("more than " + std::to_string(node_budget) + " configurations reachable from " +
                              format_configuration(p, nodes_.front()));
        nodes_.push_back(std::move(next));
        edges_.emplace_back();
      }
      edges_[i].push_back(it->second);
    }
  }
}

std::optional<std::size_t> ConfigGraph::index_of(const Configuration& c) const {
  auto it = index_.find(c);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void ConfigGraph::compute_stability() const {
  const std::size_t n = nodes_.size();
  std::vector<std::vector<std::uint32_t>> reverse(n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : edges_[i]) reverse[j].push_back(static_cast<std::uint32_t>(i));
  std::vector<std::optional<std::size_t>> unanimous(n);
  for (std::size_t i = 0; i < n; ++i) unanimous[i] = unanimous_output(*p_, nodes_[i]);

  std::vector<std::optional<std::size_t>> stable(n);
  for (std::size_t y = 0; y < p_->output_symbols().size(); ++y) {
    // Nodes that can reach a configuration not unanimous on y.
    std::vector<bool> tainted(n, false);
    std::deque<std::uint32_t> queue;
    for (std::size_t i = 0; i < n; ++i)
      if (unanimous[i] != y) {
        tainted[i] = true;
        queue.push_back(static_cast<std::uint32_t>(i));
      }
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      for (auto u : reverse[v])
        if (!tainted[u]) {
          tainted[u] = true;
          queue.push_back(u);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!tainted[i]) stable[i] = y;
  }
  stable_ = std::move(stable);
}

std::optional<std::size_t> ConfigGraph::stable_output(std::size_t i) const {
  if (!stable_) compute_stability();
  return (*stable_)[i];
}

StabilityVerdict is_output_stable_config(const Protocol& p, const Configuration& c, std::size_t node_budget) {
  ConfigGraph g(p, c, node_budget);
  StabilityVerdict v;
  v.output = g.stable_output(0);
  v.stable = v.output.has_value();
  v.explored = g.size();
  return v;
}

std::set<std::size_t> stabilizable_outputs(const Protocol& p, const Configuration& c0, std::size_t node_budget) {
  ConfigGraph g(p, c0, node_budget);
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (auto y = g.stable_output(i)) out.insert(*y);
  return out;
}

SymmetryReport exact_symmetry(const Protocol& p, const Configuration& c0, std::optional<std::size_t> expected_output,
                              std::size_t node_budget) {
  ConfigGraph g(p, c0, node_budget);
  const std::size_t n = g.size();

  std::set<std::size_t> outputs;
  for (std::size_t i = 0; i < n; ++i)
    if (auto y = g.stable_output(i)) outputs.insert(*y);
  if (outputs.empty())
    throw ProtocolFailure("no output-stable configuration is reachable from " + format_configuration(p, c0));
  std::size_t target = 0;
  if (expected_output) {
    target = *expected_output;
    if (!outputs.contains(target))
      throw ProtocolFailure("no stable configuration with output '" + p.output_symbols().at(target) +
                            "' is reachable from " + format_configuration(p, c0));
  } else {
    if (outputs.size() > 1)
      throw ProtocolFailure("stable configurations with different outputs are reachable from " +
                            format_configuration(p, c0) + "; supply the expected output");
    target = *outputs.begin();
  }

  std::vector<Count> sym(n);
  for (std::size_t i = 0; i < n; ++i) sym[i] = symmetry_of_config(g.node(i));

  // BFS from the root inside {s(c) >= k}; returns the parent chain to the
  // first correct stable node found.
  auto search = [&](Count k) -> std::optional<std::vector<std::uint32_t>> {
    std::vector<std::int64_t> parent(n, -2);
    std::deque<std::uint32_t> queue{0};
    parent[0] = -1;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      if (g.stable_output(v) == target) {
        std::vector<std::uint32_t> path;
        for (std::int64_t u = v; u >= 0; u = parent[u]) path.push_back(static_cast<std::uint32_t>(u));
        std::reverse(path.begin(), path.end());
        return path;
      }
      for (auto u : g.edges(v))
        if (parent[u] == -2 && sym[u] >= k) {
          parent[u] = v;
          queue.push_back(u);
        }
    }
    return std::nullopt;
  };

  SymmetryReport report{c0, 0, 0, target, {}, c0, 0, n, 0, {}};
  std::optional<std::vector<std::uint32_t>> path;
  for (Count k = sym[0]; k >= 1; --k) {
    ++report.thresholds_tried;
    auto found = search(k);
    report.sweep.emplace_back(k, found.has_value());
    if (found && !path) {
      path = std::move(found);
      report.exact_symmetry = k;
    } else if (!found && path) {
      throw std::logic_error("threshold reachability is not monotone at k=" + std::to_string(k));
    }
  }
  report.exact_breaking = sym[0] - report.exact_symmetry;

  std::vector<ParallelStep> steps;
  for (std::size_t i = 0; i + 1 < path->size(); ++i) {
    const Configuration& to = g.node((*path)[i + 1]);
    for (auto& [next, step] : successor_steps(p, g.node((*path)[i])))
      if (next == to) {
        steps.push_back(step);
        break;
      }
  }
  ExecutionTrace trace(p, c0, steps);
  report.witness = std::move(steps);
  report.witness_terminal = trace.terminal();
  report.witness_min_symmetry = trace.min_symmetry();
  return report;
}

ParityBoundReport verify_parity_bound(const Protocol& p, unsigned n_lo, unsigned n_hi, std::size_t node_budget) {
  if (p.inputs().size() != 1) throw InvalidInput("parity bound expects a single-input protocol");
  const auto& ys = p.output_symbols();
  auto index_of_symbol = [&](const std::string& s) {
    auto it = std::find(ys.begin(), ys.end(), s);
    if (it == ys.end()) throw InvalidInput("protocol has no output symbol '" + s + "'");
    return static_cast<std::size_t>(it - ys.begin());
  };
  ParityBoundReport r;
  r.bound = Count{1} << (p.num_states() - 1);
  for (unsigned n = n_lo; n <= n_hi; ++n) {
    std::vector<Count> counts(p.num_states(), 0);
    counts[p.inputs().front().state] = n;
    const auto rep = exact_symmetry(p, Configuration(counts), index_of_symbol(n % 2 ? "1" : "0"), node_budget);
    r.values.emplace_back(n, rep.exact_symmetry);
    r.holds = r.holds && rep.exact_symmetry < r.bound;
  }
  return r;
}

}  // namespace popsym
