#include "popsym/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace popsym {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
  });
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto at = s.find(sep, start);
    out.push_back(trim(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start)));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

// "<lhs> -> <rhs>" with both sides trimmed.
std::pair<std::string_view, std::string_view> arrow(std::string_view s, std::size_t line) {
  const auto at = s.find("->");
  if (at == std::string_view::npos) throw ParseError(line, "expected '->' in '" + std::string(s) + "'");
  return {trim(s.substr(0, at)), trim(s.substr(at + 2))};
}

std::string_view expect_identifier(std::string_view s, std::size_t line) {
  if (!is_identifier(s)) throw ParseError(line, "expected identifier, got '" + std::string(s) + "'");
  return s;
}

struct RawRule {
  std::string a, b, c, d;
  bool sym = false;
  std::size_t line = 0;
};

}  // namespace

Protocol parse_protocol(std::string_view text) {
  std::optional<std::string> name;
  std::optional<std::vector<std::string>> states;
  std::vector<std::pair<std::string, std::string>> inputs;
  bool saw_inputs = false, saw_outputs = false;
  std::vector<std::pair<std::string, std::string>> explicit_outputs;
  std::optional<std::string> default_output;
  std::vector<RawRule> rules;
  bool in_rules = false;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.starts_with("protocol ") || line == "protocol") {
      if (name) throw ParseError(line_no, "duplicate 'protocol' line");
      auto w = words(line);
      if (w.size() != 2) throw ParseError(line_no, "expected 'protocol <name>'");
      name = std::string(expect_identifier(w[1], line_no));
      in_rules = false;
    } else if (line.starts_with("states:")) {
      if (states) throw ParseError(line_no, "duplicate 'states:' line");
      states.emplace();
      for (auto s : split(line.substr(7), ',')) states->emplace_back(expect_identifier(s, line_no));
      in_rules = false;
    } else if (line.starts_with("inputs:")) {
      if (saw_inputs) throw ParseError(line_no, "duplicate 'inputs:' line");
      saw_inputs = true;
      for (auto entry : split(line.substr(7), ',')) {
        auto [sym, st] = arrow(entry, line_no);
        inputs.emplace_back(expect_identifier(sym, line_no), expect_identifier(st, line_no));
      }
      in_rules = false;
    } else if (line.starts_with("outputs:")) {
      if (saw_outputs) throw ParseError(line_no, "duplicate 'outputs:' line");
      saw_outputs = true;
      auto parts = split(line.substr(8), ';');
      if (parts.size() > 2) throw ParseError(line_no, "at most one ';' allowed in outputs");
      if (!parts[0].empty())
        for (auto entry : split(parts[0], ',')) {
          auto [st, sym] = arrow(entry, line_no);
          explicit_outputs.emplace_back(expect_identifier(st, line_no), expect_identifier(sym, line_no));
        }
      if (parts.size() == 2) {
        auto [kw, sym] = arrow(parts[1], line_no);
        if (kw != "default") throw ParseError(line_no, "expected 'default -> <symbol>'");
        default_output = std::string(expect_identifier(sym, line_no));
      }
      in_rules = false;
    } else if (line == "rules:") {
      in_rules = true;
    } else if (in_rules) {
      RawRule r;
      r.line = line_no;
      std::string_view body = line;
      if (body.starts_with("sym:")) {
        r.sym = true;
        body = trim(body.substr(4));
      }
      auto [lhs, rhs] = arrow(body, line_no);
      auto l = words(lhs);
      auto rr = words(rhs);
      if (l.size() != 2 || rr.size() != 2) throw ParseError(line_no, "rule must be '<a> <b> -> <c> <d>'");
      r.a = expect_identifier(l[0], line_no);
      r.b = expect_identifier(l[1], line_no);
      r.c = expect_identifier(rr[0], line_no);
      r.d = expect_identifier(rr[1], line_no);
      rules.push_back(std::move(r));
    } else {
      throw ParseError(line_no, "unrecognized line '" + std::string(line) + "'");
    }
  }

  if (!name) throw ParseError(line_no, "missing 'protocol <name>' line");
  if (!saw_inputs || inputs.empty()) throw ParseError(line_no, "missing 'inputs:' line");
  if (!saw_outputs) throw ParseError(line_no, "missing 'outputs:' line");
  if (!states) {
    // Without a states line, the inputs and outputs lines declare the states.
    states.emplace();
    auto declare = [&](const std::string& s) {
      if (std::find(states->begin(), states->end(), s) == states->end()) states->push_back(s);
    };
    for (auto& [sym, st] : inputs) declare(st);
    for (auto& [st, sym] : explicit_outputs) declare(st);
  }
  if (states->empty()) throw ParseError(line_no, "'states:' line is empty");

  std::map<std::string, StateId> index;
  for (StateId i = 0; i < states->size(); ++i)
    if (!index.emplace((*states)[i], i).second)
      throw SemanticError((*states)[i], "duplicate state '" + (*states)[i] + "'");
  auto lookup = [&](const std::string& s) {
    auto it = index.find(s);
    if (it == index.end()) throw SemanticError(s, "undeclared state '" + s + "'");
    return it->second;
  };

  std::vector<InputBinding> bindings;
  for (auto& [sym, st] : inputs) bindings.push_back({sym, lookup(st)});

  std::set<std::string> symbols;
  for (auto& [st, sym] : explicit_outputs) symbols.insert(sym);
  if (default_output) symbols.insert(*default_output);
  std::vector<std::string> output_symbols(symbols.begin(), symbols.end());
  auto symbol_index = [&](const std::string& s) {
    return static_cast<std::size_t>(std::lower_bound(output_symbols.begin(), output_symbols.end(), s) -
                                    output_symbols.begin());
  };
  std::vector<std::optional<std::size_t>> out_of(states->size());
  for (auto& [st, sym] : explicit_outputs) {
    const StateId q = lookup(st);
    if (out_of[q]) throw SemanticError(st, "state '" + st + "' has two outputs");
    out_of[q] = symbol_index(sym);
  }
  std::vector<std::size_t> output_of_state(states->size());
  for (StateId q = 0; q < states->size(); ++q) {
    if (out_of[q]) {
      output_of_state[q] = *out_of[q];
    } else if (default_output) {
      output_of_state[q] = symbol_index(*default_output);
    } else {
      throw SemanticError((*states)[q], "state '" + (*states)[q] + "' has no output and no default is given");
    }
  }

  std::vector<Rule> table;
  std::map<StatePair, std::size_t> seen;
  auto add = [&](StatePair lhs, StatePair rhs, std::size_t line) {
    if (auto [it, fresh] = seen.emplace(lhs, line); !fresh)
      throw SemanticError((*states)[lhs.initiator], "line " + std::to_string(line) + ": duplicate rule for (" +
                                                        (*states)[lhs.initiator] + ", " +
                                                        (*states)[lhs.responder] + "), first given on line " +
                                                        std::to_string(it->second));
    table.push_back({lhs, rhs});
  };
  for (const auto& r : rules) {
    const StatePair lhs{lookup(r.a), lookup(r.b)};
    const StatePair rhs{lookup(r.c), lookup(r.d)};
    add(lhs, rhs, r.line);
    if (r.sym && lhs.initiator != lhs.responder) add(lhs.mirrored(), rhs.mirrored(), r.line);
  }
  return Protocol(*name, *states, std::move(bindings), std::move(output_symbols), std::move(output_of_state), table);
}

std::string serialize_protocol(const Protocol& p) {
  std::ostringstream os;
  os << "protocol " << p.name() << '\n';
  os << "states: ";
  for (std::size_t i = 0; i < p.num_states(); ++i) os << (i ? ", " : "") << p.states()[i];
  os << "\ninputs: ";
  for (std::size_t i = 0; i < p.inputs().size(); ++i)
    os << (i ? ", " : "") << p.inputs()[i].symbol << " -> " << p.state_name(p.inputs()[i].state);

  // Default is an unused symbol when exactly one exists (so the alphabet
  // survives a round trip), otherwise the most common one.
  std::vector<std::size_t> uses(p.output_symbols().size(), 0);
  for (StateId q = 0; q < p.num_states(); ++q) ++uses[p.output_index(q)];
  std::size_t default_symbol = 0;
  if (std::count(uses.begin(), uses.end(), 0) == 1) {
    default_symbol = static_cast<std::size_t>(std::find(uses.begin(), uses.end(), 0) - uses.begin());
  } else {
    default_symbol = static_cast<std::size_t>(std::max_element(uses.begin(), uses.end()) - uses.begin());
  }
  os << "\noutputs: ";
  bool first = true;
  for (StateId q = 0; q < p.num_states(); ++q) {
    if (p.output_index(q) == default_symbol) continue;
    os << (first ? "" : ", ") << p.state_name(q) << " -> " << p.output_symbol(q);
    first = false;
  }
  os << (first ? "" : " ") << "; default -> " << p.output_symbols()[default_symbol] << "\nrules:\n";

  const auto rules = p.effective_rules();
  std::set<StatePair> emitted;
  for (const Rule& r : rules) {
    if (emitted.contains(r.lhs)) continue;
    const StatePair m = r.lhs.mirrored();
    const bool sym = m != r.lhs && p.delta(m) == r.rhs.mirrored();
    os << "  " << (sym ? "sym: " : "") << p.state_name(r.lhs.initiator) << ' ' << p.state_name(r.lhs.responder)
       << " -> " << p.state_name(r.rhs.initiator) << ' ' << p.state_name(r.rhs.responder) << '\n';
    emitted.insert(r.lhs);
    if (sym) emitted.insert(m);
  }
  return os.str();
}

std::string tuple_state_name(std::string_view role, int value) {
  std::string out(role);
  out += '_';
  if (value < 0) out += 'm';
  out += std::to_string(value < 0 ? -value : value);
  return out;
}

namespace {

// Shared body of Count-to-x and the positive threshold protocol.
Protocol threshold_protocol(std::string name, unsigned threshold, std::vector<InputBinding> inputs) {
  std::vector<std::string> states;
  for (unsigned i = 0; i <= threshold; ++i) states.push_back("q" + std::to_string(i));
  std::vector<std::size_t> outputs(states.size(), 0);
  outputs[threshold] = 1;
  std::vector<Rule> rules;
  for (StateId i = 0; i <= threshold; ++i)
    for (StateId j = 0; j <= threshold; ++j) {
      const StatePair rhs = i + j < threshold ? StatePair{i + j, 0} : StatePair{threshold, threshold};
      if (rhs != StatePair{i, j}) rules.push_back({{i, j}, rhs});
    }
  return Protocol(std::move(name), std::move(states), std::move(inputs), {"0", "1"}, std::move(outputs), rules);
}

}  // namespace

Protocol gen_count_to_x(unsigned x) {
  if (x < 1) throw InvalidInput("count-to-x needs x >= 1");
  return threshold_protocol("count_to_" + std::to_string(x), x, {{"0", 0}, {"1", 1}});
}

Protocol gen_positive_linear_combination(const std::vector<unsigned>& coefficients, unsigned threshold) {
  if (coefficients.empty()) throw InvalidInput("positive linear combination needs at least one coefficient");
  std::vector<InputBinding> inputs;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (coefficients[i] == 0) throw InvalidInput("coefficients must be >= 1");
    inputs.push_back({"s" + std::to_string(i + 1), std::min(coefficients[i], threshold)});
  }
  return threshold_protocol("positive_lc", threshold, std::move(inputs));
}

Protocol gen_majority() {
  // l_1, l_m1, f_1, f_m1
  std::vector<std::string> states{"l_1", "l_m1", "f_1", "f_m1"};
  constexpr StateId l1 = 0, lm1 = 1, f1 = 2, fm1 = 3;
  std::vector<Rule> rules{
      {{l1, lm1}, {fm1, fm1}}, {{lm1, l1}, {fm1, fm1}},  // opposite leaders cancel
      {{l1, fm1}, {l1, f1}},   {{lm1, f1}, {lm1, fm1}},  // followers copy the leader bit
      {{fm1, l1}, {f1, l1}},   {{f1, lm1}, {fm1, lm1}},
      {{fm1, f1}, {fm1, fm1}}, {{f1, fm1}, {fm1, fm1}},  // -1 wins among followers
  };
  return Protocol("majority", std::move(states), {{"a", l1}, {"b", lm1}}, {"0", "1"}, {1, 0, 1, 0}, rules);
}

Protocol gen_k_majority(unsigned k) {
  if (k < 1) throw InvalidInput("k-majority needs k >= 1");
  const int K = static_cast<int>(k);
  std::vector<std::string> states;
  std::vector<std::size_t> outputs;
  for (const char* role : {"l", "f"})
    for (int v = -K; v <= K; ++v) {
      states.push_back(tuple_state_name(role, v));
      outputs.push_back(v > 0 ? 1 : 0);
    }
  auto leader = [K](int v) { return static_cast<StateId>(v + K); };
  auto follower = [K](int v) { return static_cast<StateId>(3 * K + 1 + v); };
  std::vector<Rule> rules;
  auto add = [&](StatePair lhs, StatePair rhs) {
    if (lhs != rhs) rules.push_back({lhs, rhs});
  };
  for (int i = -K; i <= K; ++i)
    for (int j = -K; j <= K; ++j) {
      const StatePair lhs{leader(i), leader(j)};
      if (i + j == 0) {
        add(lhs, {follower(0), follower(0)});
      } else if (i * j < 0) {
        add(lhs, {leader(i + j), follower(i + j > 0 ? 1 : 0)});
      }
    }
  for (int i = -K; i <= K; ++i)
    for (int j = -K; j <= K; ++j) {
      const StateId l = leader(i), f = follower(j);
      if (i >= 2) {
        add({l, f}, {leader(i - 1), leader(1)});
        add({f, l}, {leader(1), leader(i - 1)});
      } else if (i <= -2) {
        add({l, f}, {leader(i + 1), leader(-1)});
        add({f, l}, {leader(-1), leader(i + 1)});
      } else {
        add({l, f}, {l, follower(i)});
        add({f, l}, {follower(i), l});
      }
    }
  add({follower(0), follower(1)}, {follower(0), follower(0)});
  add({follower(1), follower(0)}, {follower(0), follower(0)});
  return Protocol("k_majority_" + std::to_string(k), std::move(states), {{"a", leader(K)}, {"b", leader(-K)}},
                  {"0", "1"}, std::move(outputs), rules);
}

Protocol gen_parity_leader() {
  std::vector<std::string> states{"L0", "L1", "F0", "F1"};
  auto L = [](unsigned b) { return static_cast<StateId>(b); };
  auto F = [](unsigned b) { return static_cast<StateId>(2 + b); };
  std::vector<Rule> rules;
  for (unsigned i = 0; i < 2; ++i)
    for (unsigned j = 0; j < 2; ++j) {
      const unsigned x = (i + j) % 2;
      rules.push_back({{L(i), L(j)}, {L(x), F(x)}});
      if (i != j) {
        rules.push_back({{L(i), F(j)}, {L(i), F(i)}});
        rules.push_back({{F(j), L(i)}, {F(i), L(i)}});
      }
    }
  return Protocol("parity", std::move(states), {{"1", L(1)}}, {"0", "1"}, {0, 1, 0, 1}, rules);
}

}  // namespace popsym
