#include "popsym/builtins.hpp"

#include <numeric>

#include "popsym/dsl.hpp"

namespace popsym {

std::string family_name(Family f) {
  switch (f) {
    case Family::count_to_x: return "count_to_x";
    case Family::positive_lc: return "positive_lc";
    case Family::majority: return "majority";
    case Family::k_majority: return "k_majority";
    case Family::parity: return "parity";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  for (Family f : {Family::count_to_x, Family::positive_lc, Family::majority, Family::k_majority, Family::parity})
    if (family_name(f) == name) return f;
  throw InvalidInput("unknown builtin '" + name + "'");
}

Builtin::Builtin(Family f, Protocol p) : family_(f), protocol_(std::make_shared<const Protocol>(std::move(p))) {}

Builtin Builtin::count_to_x(unsigned x) {
  Builtin b(Family::count_to_x, gen_count_to_x(x));
  b.threshold_ = x;
  b.coefficients_ = {1};
  b.alarm_ = x;
  return b;
}

Builtin Builtin::positive_lc(std::vector<unsigned> coefficients, unsigned threshold) {
  Builtin b(Family::positive_lc, gen_positive_linear_combination(coefficients, threshold));
  b.threshold_ = threshold;
  b.coefficients_ = std::move(coefficients);
  b.alarm_ = threshold;
  return b;
}

Builtin Builtin::majority() {
  Builtin b(Family::majority, gen_majority());
  b.k_ = 1;
  return b;
}

Builtin Builtin::k_majority(unsigned k) {
  Builtin b(Family::k_majority, gen_k_majority(k));
  b.k_ = k;
  return b;
}

Builtin Builtin::parity() { return Builtin(Family::parity, gen_parity_leader()); }

std::string Builtin::provenance() const {
  switch (family_) {
    case Family::count_to_x: return "count_to_x(x=" + std::to_string(threshold_) + ")";
    case Family::positive_lc: {
      std::string a;
      for (std::size_t i = 0; i < coefficients_.size(); ++i) a += (i ? "," : "") + std::to_string(coefficients_[i]);
      return "positive_lc(a=" + a + ";c=" + std::to_string(threshold_) + ")";
    }
    case Family::majority: return "majority()";
    case Family::k_majority: return "k_majority(k=" + std::to_string(k_) + ")";
    case Family::parity: return "parity()";
  }
  return {};
}

namespace {

// Sum of i * c[q_i] over the threshold protocols' states.
std::uint64_t weighted_sum(const Configuration& c) {
  std::uint64_t s = 0;
  for (StateId q = 0; q < c.num_states(); ++q) s += static_cast<std::uint64_t>(q) * c[q];
  return s;
}

// Sum of leader values for the (k-)majority encodings, where leaders occupy
// ids 0..2K with value id-K. Majority's l_1/l_m1 are handled separately.
std::int64_t leader_sum_k(const Configuration& c, unsigned k) {
  const int K = static_cast<int>(k);
  std::int64_t s = 0;
  for (int v = -K; v <= K; ++v) s += static_cast<std::int64_t>(v) * c[static_cast<StateId>(v + K)];
  return s;
}

}  // namespace

std::size_t Builtin::expected_output(const Configuration& c) const {
  switch (family_) {
    case Family::count_to_x:
    case Family::positive_lc:
      if (c[*alarm_] > 0) return 1;
      return weighted_sum(c) >= threshold_ ? 1 : 0;
    case Family::majority:
      return static_cast<std::int64_t>(c[0]) - static_cast<std::int64_t>(c[1]) > 0 ? 1 : 0;
    case Family::k_majority:
      return leader_sum_k(c, k_) > 0 ? 1 : 0;
    case Family::parity:
      return c.population() % 2 == 1 ? 1 : 0;
  }
  return 0;
}

std::optional<std::size_t> Builtin::stable_output(const Configuration& c) const {
  const Protocol& p = *protocol_;
  switch (family_) {
    case Family::count_to_x:
    case Family::positive_lc: {
      // Alarm everywhere, or alarm absent and unreachable by conservation.
      if (c[*alarm_] == c.population()) return 1;
      if (c[*alarm_] == 0 && weighted_sum(c) < threshold_) return 0;
      return std::nullopt;
    }
    case Family::majority:
    case Family::k_majority:
      // Unanimous configurations are closed under every rule of both protocols.
      return unanimous_output(p, c);
    case Family::parity: {
      auto y = unanimous_output(p, c);
      if (!y) return std::nullopt;
      // Two odd leaders merge into an even pair, flipping the output.
      const Count leaders = c[0] + c[1];
      if (*y == 1 && leaders > 1) return std::nullopt;
      return y;
    }
  }
  return std::nullopt;
}

std::optional<std::vector<int>> Builtin::linear_coefficients() const {
  switch (family_) {
    case Family::count_to_x: return std::vector<int>{0, 1};
    case Family::positive_lc: {
      std::vector<int> out;
      for (unsigned a : coefficients_) out.push_back(static_cast<int>(a));
      return out;
    }
    case Family::majority:
    case Family::k_majority: return std::vector<int>{1, -1};
    case Family::parity: return std::nullopt;
  }
  return std::nullopt;
}

Configuration Builtin::initial(const std::map<std::string, Count>& per_input) const {
  return initial_configuration(*protocol_, per_input);
}

Configuration initial_configuration(const Protocol& p, const std::map<std::string, Count>& per_input) {
  std::vector<Count> counts(p.num_states(), 0);
  for (const auto& [symbol, n] : per_input) counts[p.input_state(symbol)] += n;
  return Configuration(std::move(counts));
}

}  // namespace popsym
