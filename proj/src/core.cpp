#include "popsym/core.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace popsym {

Protocol::Protocol(std::string name, std::vector<std::string> states, std::vector<InputBinding> inputs,
                   std::vector<std::string> output_symbols, std::vector<std::size_t> output_of_state,
                   const std::vector<Rule>& rules)
    : name_(std::move(name)),
      states_(std::move(states)),
      inputs_(std::move(inputs)),
      output_symbols_(std::move(output_symbols)),
      output_of_state_(std::move(output_of_state)) {
  const std::size_t q = states_.size();
  if (q == 0) throw InvalidInput("protocol '" + name_ + "' has no states");
  if (q > std::numeric_limits<StateId>::max() / q) throw InvalidInput("too many states");
  {
    std::set<std::string_view> seen;
    for (const auto& s : states_)
      if (!seen.insert(s).second) throw SemanticError(s, "duplicate state '" + s + "'");
  }
  if (inputs_.empty()) throw InvalidInput("protocol '" + name_ + "' has no input symbols");
  {
    std::set<std::string_view> seen;
    for (const auto& in : inputs_) {
      if (!seen.insert(in.symbol).second)
        throw SemanticError(in.symbol, "duplicate input symbol '" + in.symbol + "'");
      if (in.state >= q) throw SemanticError(in.symbol, "input '" + in.symbol + "' maps to unknown state");
      initial_states_.push_back(in.state);
    }
  }
  std::sort(initial_states_.begin(), initial_states_.end());
  initial_states_.erase(std::unique(initial_states_.begin(), initial_states_.end()), initial_states_.end());

  if (output_of_state_.size() != q) throw InvalidInput("output map must cover every state");
  for (std::size_t i = 0; i < q; ++i)
    if (output_of_state_[i] >= output_symbols_.size())
      throw SemanticError(states_[i], "state '" + states_[i] + "' maps to unknown output");

  table_.resize(q * q);
  for (StateId a = 0; a < q; ++a)
    for (StateId b = 0; b < q; ++b) table_[a * q + b] = {a, b};
  std::vector<bool> defined(q * q, false);
  for (const Rule& r : rules) {
    for (StateId s : {r.lhs.initiator, r.lhs.responder, r.rhs.initiator, r.rhs.responder})
      if (s >= q) throw SemanticError(std::to_string(s), "rule references unknown state id");
    const std::size_t at = r.lhs.initiator * q + r.lhs.responder;
    if (defined[at])
      throw SemanticError(states_[r.lhs.initiator],
                          "duplicate rule for (" + states_[r.lhs.initiator] + ", " + states_[r.lhs.responder] + ")");
    defined[at] = true;
    table_[at] = r.rhs;
  }
}

std::optional<StateId> Protocol::find_state(std::string_view name) const {
  auto it = std::find(states_.begin(), states_.end(), name);
  if (it == states_.end()) return std::nullopt;
  return static_cast<StateId>(it - states_.begin());
}

StateId Protocol::state(std::string_view name) const {
  if (auto s = find_state(name)) return *s;
  throw SemanticError(std::string(name), "unknown state '" + std::string(name) + "'");
}

StateId Protocol::input_state(std::string_view symbol) const {
  for (const auto& in : inputs_)
    if (in.symbol == symbol) return in.state;
  throw SemanticError(std::string(symbol), "unknown input symbol '" + std::string(symbol) + "'");
}

std::vector<Rule> Protocol::effective_rules() const {
  std::vector<Rule> out;
  const auto q = static_cast<StateId>(states_.size());
  for (StateId a = 0; a < q; ++a)
    for (StateId b = 0; b < q; ++b)
      if (is_effective(a, b)) out.push_back({{a, b}, delta(a, b)});
  return out;
}

Configuration::Configuration(std::vector<Count> counts) : counts_(std::move(counts)) {
  for (Count c : counts_) population_ += c;
  if (population_ == 0) throw InvalidInput("configuration has no nodes");
}

Configuration Configuration::from_named(const Protocol& p, const std::map<std::string, Count>& named) {
  std::vector<Count> counts(p.num_states(), 0);
  for (const auto& [name, count] : named) counts[p.state(name)] += count;
  return Configuration(std::move(counts));
}

std::vector<StateId> Configuration::support() const {
  std::vector<StateId> out;
  for (StateId q = 0; q < counts_.size(); ++q)
    if (counts_[q] > 0) out.push_back(q);
  return out;
}

std::size_t ConfigurationHash::operator()(const Configuration& c) const noexcept {
  // FNV-1a over the counts.
  std::uint64_t h = 1469598103934665603ull;
  for (Count v : c.counts()) {
    h ^= v;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

ParallelStep::ParallelStep(std::vector<Application> applications) {
  std::sort(applications.begin(), applications.end(),
            [](const Application& a, const Application& b) { return a.pair < b.pair; });
  for (const auto& app : applications) {
    if (app.multiplicity == 0) continue;
    if (!applications_.empty() && applications_.back().pair == app.pair)
      applications_.back().multiplicity += app.multiplicity;
    else
      applications_.push_back(app);
  }
  if (applications_.empty()) throw InvalidInput("a parallel step needs at least one interaction");
}

std::uint64_t ParallelStep::interactions() const {
  std::uint64_t total = 0;
  for (const auto& app : applications_) total += app.multiplicity;
  return total;
}

std::vector<std::uint64_t> ParallelStep::demand(std::size_t num_states) const {
  std::vector<std::uint64_t> d(num_states, 0);
  for (const auto& app : applications_) {
    if (app.pair.initiator >= num_states || app.pair.responder >= num_states)
      throw InvalidInput("step references a state outside the protocol");
    d[app.pair.initiator] += app.multiplicity;
    d[app.pair.responder] += app.multiplicity;
  }
  return d;
}

Count symmetry_of_config(const Configuration& c) {
  Count best = 0;
  for (Count v : c.counts())
    if (v > 0 && (best == 0 || v < best)) best = v;
  if (best == 0) throw InvalidInput("symmetry of an empty configuration");
  return best;
}

Configuration apply_step(const Protocol& p, const Configuration& c, const ParallelStep& step) {
  const std::size_t q = p.num_states();
  if (c.num_states() != q) throw InvalidInput("configuration does not match protocol state count");
  const auto demand = step.demand(q);
  for (StateId s = 0; s < q; ++s)
    if (demand[s] > c[s])
      throw DemandError(p.state_name(s), "step needs " + std::to_string(demand[s]) + " nodes in state '" +
                                             p.state_name(s) + "' but only " + std::to_string(c[s]) +
                                             " are present");
  std::vector<std::int64_t> next(c.counts().begin(), c.counts().end());
  for (const auto& app : step.applications()) {
    const StatePair out = p.delta(app.pair);
    const auto m = static_cast<std::int64_t>(app.multiplicity);
    next[app.pair.initiator] -= m;
    next[app.pair.responder] -= m;
    next[out.initiator] += m;
    next[out.responder] += m;
  }
  std::vector<Count> counts(q);
  for (std::size_t i = 0; i < q; ++i) counts[i] = static_cast<Count>(next[i]);
  return Configuration(std::move(counts));
}

std::vector<StatePair> enabled_effective_pairs(const Protocol& p, const Configuration& c) {
  std::vector<StatePair> out;
  for (StateId a : c.support())
    for (StateId b : c.support()) {
      if (a == b && c[a] < 2) continue;
      if (p.is_effective(a, b)) out.push_back({a, b});
    }
  return out;
}

std::map<std::string, std::uint64_t> output_of_config(const Protocol& p, const Configuration& c) {
  std::map<std::string, std::uint64_t> out;
  for (StateId q : c.support()) out[p.output_symbol(q)] += c[q];
  return out;
}

std::optional<std::size_t> unanimous_output(const Protocol& p, const Configuration& c) {
  std::optional<std::size_t> y;
  for (StateId q : c.support()) {
    const std::size_t o = p.output_index(q);
    if (y && *y != o) return std::nullopt;
    y = o;
  }
  return y;
}

ExecutionTrace::ExecutionTrace(const Protocol& p, Configuration c0, std::vector<ParallelStep> steps)
    : steps_(std::move(steps)) {
  configurations_.reserve(steps_.size() + 1);
  configurations_.push_back(std::move(c0));
  min_symmetry_ = symmetry_of_config(configurations_.front());
  for (const auto& s : steps_) {
    configurations_.push_back(apply_step(p, configurations_.back(), s));
    min_symmetry_ = std::min(min_symmetry_, symmetry_of_config(configurations_.back()));
  }
}

std::string format_configuration(const Protocol& p, const Configuration& c) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (StateId q : c.support()) {
    if (!first) os << ", ";
    first = false;
    os << p.state_name(q) << ':' << c[q];
  }
  os << '}';
  return os.str();
}

}  // namespace popsym
