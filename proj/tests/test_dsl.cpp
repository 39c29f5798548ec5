#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "popsym/builtins.hpp"
#include "popsym/dsl.hpp"
#include "oracles.hpp"

using namespace popsym;

namespace {

StatePair fire(const Protocol& p, const char* a, const char* b) { return p.delta(p.state(a), p.state(b)); }
StatePair pair(const Protocol& p, const char* a, const char* b) { return {p.state(a), p.state(b)}; }

void check_same(const Protocol& a, const Protocol& b) {
  CHECK(a.name() == b.name());
  CHECK(a.states() == b.states());
  CHECK(a.inputs() == b.inputs());
  CHECK(a.output_symbols() == b.output_symbols());
  for (StateId q = 0; q < a.num_states(); ++q) CHECK(a.output_index(q) == b.output_index(q));
  CHECK(a.effective_rules() == b.effective_rules());
}

// Effective ordered rules of Count-to-x straight from the rule schema.
std::size_t schema_rule_count(unsigned x) {
  std::size_t n = 0;
  for (unsigned i = 0; i <= x; ++i)
    for (unsigned j = 0; j <= x; ++j) {
      const unsigned a = i + j < x ? i + j : x, b = i + j < x ? 0 : x;
      if (a != i || b != j) ++n;
    }
  return n;
}

}  // namespace

TEST_CASE("serialized Count-to-2 parses back to three states") {
  const Protocol p = parse_protocol(serialize_protocol(gen_count_to_x(2)));
  CHECK(p.states() == std::vector<std::string>{"q0", "q1", "q2"});
  CHECK(fire(p, "q1", "q1") == pair(p, "q2", "q2"));
}

TEST_CASE("parser errors carry a line number or a symbol") {
  const char* undeclared = "protocol t\nstates: a, b\ninputs: x -> a\noutputs: ; default -> 0\nrules:\n  a c -> b b\n";
  try {
    parse_protocol(undeclared);
    FAIL("expected SemanticError");
  } catch (const SemanticError& e) {
    CHECK(e.symbol() == "c");
  }
  const char* syntax = "protocol t\nstates: a\ninputs: x -> a\noutputs: ; default -> 0\nrules:\n  a a b\n";
  try {
    parse_protocol(syntax);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 6);
  }
  const char* dup = "protocol t\nstates: a, b\ninputs: x -> a\noutputs: ; default -> 0\nrules:\n"
                    "  a b -> b b\n  sym: b a -> a a\n";
  CHECK_THROWS_AS(parse_protocol(dup), SemanticError);
  CHECK_THROWS_AS(parse_protocol("protocol t\nstates: a\noutputs: a -> 1\n"), ParseError);
  CHECK_THROWS_AS(parse_protocol("protocol t\nstates: a, b\ninputs: x -> a\noutputs: a -> 1\n"), SemanticError);
}

TEST_CASE("empty rule section is a legal constant protocol") {
  const Protocol p = parse_protocol("protocol const  # comment\nstates: a\ninputs: x -> a\noutputs: a -> 1\nrules:\n");
  CHECK(p.effective_rules().empty());
  CHECK(!p.is_effective(0, 0));
}

TEST_CASE("states line may be omitted") {
  const Protocol p = parse_protocol(
      "protocol t\ninputs: x -> a\noutputs: a -> 0, b -> 1\nrules:\n  sym: a a -> b b\n");
  CHECK(p.states() == std::vector<std::string>{"a", "b"});
  CHECK(fire(p, "a", "a") == pair(p, "b", "b"));
}

TEST_CASE("sym prefix emits the mirrored rule") {
  const Protocol p = parse_protocol(
      "protocol t\nstates: a, b, c\ninputs: x -> a\noutputs: ; default -> 0\nrules:\n  sym: a b -> c a\n");
  CHECK(fire(p, "a", "b") == pair(p, "c", "a"));
  CHECK(fire(p, "b", "a") == pair(p, "a", "c"));
  CHECK(p.effective_rules().size() == 2);
}

TEST_CASE("Count-to-x generator") {
  for (unsigned x = 1; x <= 7; ++x) {
    const Protocol p = gen_count_to_x(x);
    CHECK(p.num_states() == x + 1);
    CHECK(p.effective_rules().size() == schema_rule_count(x));
    CHECK(oracle::effective_rule_count(p) == schema_rule_count(x));
  }
  // x=5: 30 effective ordered rules; 24 of them among pairs with both indices nonzero.
  const Protocol p5 = gen_count_to_x(5);
  std::size_t nonzero = 0;
  for (const Rule& r : p5.effective_rules()) nonzero += r.lhs.initiator != 0 && r.lhs.responder != 0;
  CHECK(p5.effective_rules().size() == 30);
  CHECK(nonzero == 24);

  const Protocol p1 = gen_count_to_x(1);
  for (const char* other : {"q0", "q1"}) {
    CHECK(fire(p1, "q1", other) == pair(p1, "q1", "q1"));
    CHECK(fire(p1, other, "q1") == pair(p1, "q1", "q1"));
  }
  CHECK(fire(gen_count_to_x(2), "q1", "q1") == pair(gen_count_to_x(2), "q2", "q2"));
  CHECK_THROWS_AS(gen_count_to_x(0), InvalidInput);
}

TEST_CASE("positive linear combination generator") {
  for (unsigned x = 1; x <= 6; ++x) {
    const Protocol a = gen_count_to_x(x);
    const Protocol b = gen_positive_linear_combination({1}, x);
    CHECK(a.states() == b.states());
    CHECK(a.effective_rules() == b.effective_rules());
  }
  const Protocol p = gen_positive_linear_combination({1, 2}, 4);
  CHECK(p.state_name(p.input_state("s1")) == "q1");
  CHECK(p.state_name(p.input_state("s2")) == "q2");
  CHECK(fire(p, "q2", "q2") == pair(p, "q4", "q4"));
  CHECK(fire(p, "q1", "q2") == pair(p, "q3", "q0"));

  const Protocol zero = gen_positive_linear_combination({1}, 0);
  CHECK(zero.num_states() == 1);
  CHECK(zero.output_symbol(0) == "1");

  const Protocol big = gen_positive_linear_combination({7}, 3);
  CHECK(big.state_name(big.input_state("s1")) == "q3");
  CHECK_THROWS_AS(gen_positive_linear_combination({1, 0}, 3), InvalidInput);
}

TEST_CASE("majority generator") {
  const Protocol p = gen_majority();
  CHECK(p.num_states() == 4);
  CHECK(fire(p, "l_1", "l_m1") == pair(p, "f_m1", "f_m1"));
  CHECK(fire(p, "f_1", "f_m1") == pair(p, "f_m1", "f_m1"));
  CHECK(!p.is_effective(p.state("l_1"), p.state("l_1")));
  CHECK(fire(p, "l_1", "f_m1") == pair(p, "l_1", "f_1"));
  CHECK(fire(p, "f_1", "l_m1") == pair(p, "f_m1", "l_m1"));
  CHECK(p.output_symbol(p.state("f_1")) == "1");
  CHECK(p.output_symbol(p.state("l_m1")) == "0");
}

TEST_CASE("k-majority generator") {
  const Protocol p = gen_k_majority(2);
  CHECK(p.num_states() == 10);
  CHECK(fire(p, "l_2", "f_0") == pair(p, "l_1", "l_1"));
  CHECK(fire(p, "l_1", "l_m2") == pair(p, "l_m1", "f_0"));
  CHECK(p.state_name(p.input_state("a")) == "l_2");
  CHECK(p.state_name(p.input_state("b")) == "l_m2");
  CHECK(p.output_symbol(p.state("f_0")) == "0");
  CHECK(p.output_symbol(p.state("l_1")) == "1");

  // k=1: no leader ever splits; a leader meeting a follower only copies its sign.
  const Protocol one = gen_k_majority(1);
  for (const Rule& r : one.effective_rules()) {
    const bool leader_a = one.state_name(r.lhs.initiator)[0] == 'l';
    const bool leader_b = one.state_name(r.lhs.responder)[0] == 'l';
    if (leader_a && !leader_b) CHECK(r.rhs.initiator == r.lhs.initiator);
    if (leader_b && !leader_a) CHECK(r.rhs.responder == r.lhs.responder);
  }
  CHECK_THROWS_AS(gen_k_majority(0), InvalidInput);
  CHECK(tuple_state_name("l", -1) == "l_m1");
  CHECK(tuple_state_name("f", 0) == "f_0");
}

TEST_CASE("parity generator") {
  const Protocol p = gen_parity_leader();
  CHECK(p.states() == std::vector<std::string>{"L0", "L1", "F0", "F1"});
  CHECK(fire(p, "L1", "L1") == pair(p, "L0", "F0"));
  CHECK(fire(p, "L1", "F0") == pair(p, "L1", "F1"));
  CHECK(fire(p, "F0", "L1") == pair(p, "F1", "L1"));
  CHECK(!p.is_effective(p.state("F0"), p.state("F1")));
  CHECK(p.output_symbol(p.state("L1")) == "1");
  CHECK(p.output_symbol(p.state("F0")) == "0");
}

TEST_CASE("round trip preserves builtins") {
  for (const Protocol& p : {gen_count_to_x(1), gen_count_to_x(5), gen_positive_linear_combination({1, 2, 3}, 6),
                            gen_majority(), gen_k_majority(3), gen_parity_leader()})
    check_same(p, parse_protocol(serialize_protocol(p)));
}

TEST_CASE("round trip preserves random protocols") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const unsigned q = 1 + gen() % 6;
    const unsigned ys = 1 + gen() % 3;
    std::vector<std::string> states, symbols;
    for (unsigned i = 0; i < q; ++i) states.push_back("s" + std::to_string(i));
    for (unsigned i = 0; i < ys; ++i) symbols.push_back("y" + std::to_string(i));
    std::vector<std::size_t> out(q);
    for (auto& o : out) o = gen() % ys;
    // Keep every symbol in use so the alphabet is recoverable.
    for (unsigned i = 0; i < ys && i < q; ++i) out[i] = i;
    if (ys > q) symbols.resize(q);
    std::vector<Rule> rules;
    for (StateId a = 0; a < q; ++a)
      for (StateId b = 0; b < q; ++b)
        if (gen() % 3 == 0) rules.push_back({{a, b}, {StateId(gen() % q), StateId(gen() % q)}});
    std::vector<InputBinding> inputs{{"x", StateId(gen() % q)}};
    if (q > 1) inputs.push_back({"z", StateId(gen() % q)});
    const Protocol p("rand" + std::to_string(trial), states, inputs, symbols, out, rules);
    check_same(p, parse_protocol(serialize_protocol(p)));
  }
}
