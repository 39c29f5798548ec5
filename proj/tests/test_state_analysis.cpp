#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "popsym/builtins.hpp"
#include "popsym/config_graph.hpp"
#include "popsym/dsl.hpp"
#include "popsym/state_analysis.hpp"

using namespace popsym;

namespace {

std::vector<std::string> names(const Protocol& p, const std::vector<StateId>& qs) {
  std::vector<std::string> out;
  for (StateId q : qs) out.push_back(p.state_name(q));
  return out;
}

// Plain fixpoint over unordered rules, no backpointers.
std::set<StateId> closure(const Protocol& p) {
  std::set<StateId> r(p.initial_states().begin(), p.initial_states().end());
  bool grew = true;
  while (grew) {
    grew = false;
    for (StateId a : std::set<StateId>(r))
      for (StateId b : std::set<StateId>(r)) {
        const auto o = p.delta(a, b);
        grew |= r.insert(o.initiator).second;
        grew |= r.insert(o.responder).second;
      }
  }
  return r;
}

std::vector<Protocol> builtins() {
  return {gen_count_to_x(1), gen_count_to_x(5), gen_positive_linear_combination({1, 2}, 4),
          gen_positive_linear_combination({2, 3}, 7), gen_majority(), gen_k_majority(2), gen_k_majority(3),
          gen_parity_leader()};
}

// a,b gather into one of two absorbing alarms; both output 1.
const char* kTwoAlarms = R"(protocol two_alarms
states: a, b, y1, y2
inputs: s -> a, t -> b
outputs: y1 -> 1, y2 -> 1 ; default -> 0
rules:
  a a -> y1 a
  b b -> y2 b
  sym: y1 a -> y1 y1
  sym: y1 b -> y1 y1
  sym: y2 a -> y2 y2
  sym: y2 b -> y2 y2
)";

}  // namespace

TEST_CASE("disseminating states of the threshold protocols") {
  const Protocol c5 = gen_count_to_x(5);
  CHECK(names(c5, disseminating_states(c5)) == std::vector<std::string>{"q5"});
  CHECK(names(c5, output_stable_states(c5)) == std::vector<std::string>{"q5"});
  const Protocol lc = gen_positive_linear_combination({1, 2}, 6);
  CHECK(names(lc, disseminating_states(lc)) == std::vector<std::string>{"q6"});
  CHECK(names(lc, output_stable_states(lc)) == std::vector<std::string>{"q6"});
}

TEST_CASE("mixed-sign and parity protocols have no output-stable state") {
  for (const Protocol& p : {gen_majority(), gen_k_majority(1), gen_k_majority(2), gen_k_majority(3),
                            gen_parity_leader()}) {
    CHECK(output_stable_states(p).empty());
    CHECK(disseminating_states(p).empty());
  }
  const auto lint = mixed_sign_stability_check(gen_majority(), {1, -1});
  CHECK(lint.mixed_signs);
  CHECK(lint.consistent);
  CHECK(!mixed_sign_stability_check(gen_count_to_x(3), {0, 1}).mixed_signs);
}

TEST_CASE("reachable states match a plain closure") {
  for (const Protocol& p : builtins()) {
    const auto r = reachable_states(p);
    CHECK(std::set<StateId>(r.begin(), r.end()) == closure(p));
  }
  // q0 of Count-to-x is the input-0 state; unreachable states appear in a
  // protocol with an orphan.
  const Protocol orphan = parse_protocol("protocol o\nstates: a, z\ninputs: x -> a\noutputs: ; default -> 0\n");
  CHECK(names(orphan, reachable_states(orphan)) == std::vector<std::string>{"a"});
  CHECK(!production_tree(orphan, orphan.state("z")));
}

TEST_CASE("production trees are valid and shallow") {
  for (const Protocol& p : builtins()) {
    for (StateId q : reachable_states(p)) {
      const auto t = production_tree(p, q);
      REQUIRE(t);
      CHECK(is_valid_production_tree(p, *t));
      CHECK(t->nodes[t->root].label == q);
      CHECK(t->depth() <= p.num_states());
      CHECK(t->leaf_count() <= (std::size_t{1} << (p.num_states() - 1)));
      // no label repeats along a root-leaf path
      std::function<bool(std::size_t, std::set<StateId>)> simple = [&](std::size_t v, std::set<StateId> seen) {
        if (!seen.insert(t->nodes[v].label).second) return false;
        if (!t->nodes[v].children) return true;
        return simple(t->nodes[v].children->first, seen) && simple(t->nodes[v].children->second, seen);
      };
      CHECK(simple(t->root, {}));
    }
  }
  const Protocol c5 = gen_count_to_x(5);
  const auto t = *production_tree(c5, c5.state("q4"));
  for (StateId leaf : t.leaves()) CHECK((leaf == c5.state("q0") || leaf == c5.state("q1")));
}

TEST_CASE("collapsing keeps the lowest occurrence of a repeated label") {
  // q2 <- (q1, q1), but wrap it in a chain q2 <- (q2, q0) to force a repeat.
  const Protocol p = gen_count_to_x(5);
  const StateId q0 = p.state("q0"), q1 = p.state("q1"), q2 = p.state("q2");
  ProductionTree t;
  t.nodes = {{q2, std::pair<std::size_t, std::size_t>{1, 2}}, {q2, std::pair<std::size_t, std::size_t>{3, 4}},
             {q0, std::nullopt}, {q1, std::nullopt}, {q1, std::nullopt}};
  t.root = 0;
  CHECK(is_valid_production_tree(p, t));
  const auto c = collapse_repeated_paths(t);
  CHECK(c.depth() == 1);
  CHECK(c.leaf_count() == 2);
  CHECK(is_valid_production_tree(p, c));
}

TEST_CASE("disseminating transform merges output-stable states") {
  const Protocol p = parse_protocol(kTwoAlarms);
  CHECK(names(p, output_stable_states(p)) == std::vector<std::string>{"y1", "y2"});
  CHECK(disseminating_states(p).empty());
  const Protocol t = disseminating_transform(p);
  CHECK(t.name() == "two_alarms_disseminating");
  CHECK(t.states() == std::vector<std::string>{"a", "b", "y1"});
  const StateId y = t.state("y1");
  CHECK(names(t, disseminating_states(t)) == std::vector<std::string>{"y1"});
  for (StateId x = 0; x < t.num_states(); ++x) {
    CHECK(t.delta(x, y) == StatePair{y, y});
    CHECK(t.delta(y, x) == StatePair{y, y});
  }
  // b b used to make y2; now it makes the merged alarm directly.
  CHECK(t.delta(t.state("b"), t.state("b")) == StatePair{y, y});
  CHECK(t.delta(t.state("a"), t.state("b")) == StatePair{t.state("a"), t.state("b")});

  // Same predicate on small inputs: the alarm wins whenever two equal inputs meet.
  for (Count na = 0; na <= 3; ++na)
    for (Count nb = 0; nb <= 3; ++nb) {
      if (na + nb < 2) continue;
      const auto before = stabilizable_outputs(p, initial_configuration(p, {{"s", na}, {"t", nb}}));
      const auto after = stabilizable_outputs(t, initial_configuration(t, {{"s", na}, {"t", nb}}));
      CHECK(before == after);
    }
}

TEST_CASE("transform refuses protocols outside its hypothesis") {
  CHECK_THROWS_AS(disseminating_transform(gen_majority()), HypothesisViolated);
  const Protocol split = parse_protocol(
      "protocol split\nstates: z0, z1\ninputs: a -> z0, b -> z1\noutputs: z0 -> 0, z1 -> 1\n");
  CHECK_THROWS_AS(disseminating_transform(split), HypothesisViolated);
  // Count-to-x already has one disseminating alarm; the transform keeps it.
  const Protocol c3 = gen_count_to_x(3);
  const Protocol t = disseminating_transform(c3);
  CHECK(t.effective_rules() == c3.effective_rules());
}

TEST_CASE("analyze_states bundles the analyses") {
  const Protocol p = gen_count_to_x(3);
  const auto r = analyze_states(p);
  CHECK(r.reachable.size() == 4);
  CHECK(names(p, r.disseminating) == std::vector<std::string>{"q3"});
  CHECK(r.trees.size() == 4);
}
