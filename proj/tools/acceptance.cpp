// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any
// selected criterion fails.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "popsym/builtins.hpp"
#include "popsym/config_graph.hpp"
#include "popsym/experiments.hpp"
#include "popsym/scripted.hpp"
#include "popsym/state_analysis.hpp"

using namespace popsym;
using json = nlohmann::ordered_json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  json artifact;  // compared across repeated runs
};

// Collects failures; the first few go into the detail line.
struct Failures {
  std::vector<std::string> msgs;
  std::size_t count = 0;
  void add(std::string m) {
    if (++count <= 3) msgs.push_back(std::move(m));
  }
  void finish(Outcome& o, const std::string& ok_detail) const {
    o.pass = count == 0;
    if (o.pass) {
      o.detail = ok_detail;
      return;
    }
    o.detail = std::to_string(count) + " failure(s): ";
    for (std::size_t i = 0; i < msgs.size(); ++i) o.detail += (i ? "; " : "") + msgs[i];
  }
};

std::string cfg(const Configuration& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.num_states(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
  return s + ")";
}

Outcome c1_symmetry_examples() {
  Outcome o;
  Failures f;
  const std::vector<std::pair<std::vector<Count>, Count>> cases{
      {{0, 4, 12, 0, 52}, 4}, {{1, 5, 0}, 1}, {{7, 0, 0, 0}, 7}};
  for (auto& [counts, want] : cases) {
    const Count got = symmetry_of_config(Configuration(counts));
    o.artifact.push_back(got);
    if (got != want) f.add(cfg(Configuration(counts)) + " gave " + std::to_string(got));
  }
  f.finish(o, "(0,4,12,0,52)->4, (1,5,0)->1, (7,0,0,0)->7");
  return o;
}

Outcome c2_count_to_x() {
  Outcome o;
  Failures f;
  Count at_5_100 = 0;
  for (unsigned x : {2u, 3u, 5u})
    for (Count n1 : {20, 50, 100, 101}) {
      const Builtin b = Builtin::count_to_x(x);
      const Configuration c0 = b.initial({{"1", n1}});
      const Schedule s = script_for(b, c0);
      const ExecutionTrace t(b.protocol(), c0, s.steps);
      const Count got = t.min_symmetry();
      const std::int64_t g = n1 / x;
      // got >= (2/3)g - (x-1)/3, times 3.
      const bool bound = 3 * static_cast<std::int64_t>(got) >= 2 * g - (static_cast<std::int64_t>(x) - 1);
      const bool stable = b.stable_output(t.terminal()) == std::optional(b.expected_output(c0));
      if (!bound) f.add("x=" + std::to_string(x) + " N1=" + std::to_string(n1) + " achieved " + std::to_string(got));
      if (!stable) f.add("x=" + std::to_string(x) + " N1=" + std::to_string(n1) + " not stable");
      if (got != s.achieved_min_symmetry) f.add("replay disagrees at x=" + std::to_string(x));
      if (x == 5 && n1 == 100) at_5_100 = got;
      o.artifact.push_back({x, n1, got, s.steps.size()});
    }
  if (at_5_100 != 13) f.add("x=5 N1=100 achieved " + std::to_string(at_5_100) + ", expected 13");
  f.finish(o, "12 instances meet the bound; x=5 N1=100 achieves 13");
  return o;
}

Outcome c3_positive_lc() {
  Outcome o;
  Failures f;
  auto run = [&](unsigned c, Count m, bool graph) {
    const Builtin b = Builtin::positive_lc({1, 2}, c);
    const Configuration c0 = b.initial({{"s1", m}, {"s2", m}});
    const Schedule s = script_for(b, c0);
    const ExecutionTrace t(b.protocol(), c0, s.steps);
    const Count got = t.min_symmetry();
    // got > floor(m / (c/3 + 2)) - 2 with sum a = 3
    const std::int64_t bound = static_cast<std::int64_t>(3 * m / (c + 6)) - 2;
    const std::string tag = "c=" + std::to_string(c) + " N_min=" + std::to_string(m);
    if (static_cast<std::int64_t>(got) <= bound) f.add(tag + " achieved " + std::to_string(got));
    const auto y = b.stable_output(t.terminal());
    if (y != std::optional(b.expected_output(c0))) f.add(tag + " terminal not stable on the predicate value");
    if (graph) {
      const auto v = is_output_stable_config(b.protocol(), t.terminal());
      if (v.output != y) f.add(tag + " config graph disagrees");
    }
    o.artifact.push_back({c, m, got, bound, graph});
  };
  for (unsigned c : {4u, 6u})
    for (Count m : {10, 25}) run(c, m, false);
  // the grid has n >= 20; the graph cross-check uses the n <= 10 instances
  for (unsigned c : {4u, 6u})
    for (Count m = 1; m <= 5; ++m) run(c, m, true);
  f.finish(o, "4 grid instances meet the strict bound; 10 small instances cross-checked by config graph");
  return o;
}

Outcome c4_majority() {
  Outcome o;
  Failures f;
  const Builtin b = Builtin::majority();
  for (auto [na, nb] : std::vector<std::pair<Count, Count>>{{5, 5}, {5, 3}, {6, 2}, {3, 5}}) {
    const Configuration c0 = b.initial({{"a", na}, {"b", nb}});
    const std::string tag = std::to_string(na) + "/" + std::to_string(nb);
    const Schedule s = script_for(b, c0);
    const ExecutionTrace t(b.protocol(), c0, s.steps);
    const Count nmin = std::min(na, nb);
    const Count want = na == nb ? nmin : std::min(nmin, na > nb ? na - nb : nb - na);
    if (t.min_symmetry() < want) f.add(tag + " scripted " + std::to_string(t.min_symmetry()));
    if (b.stable_output(t.terminal()) != std::optional(b.expected_output(c0))) f.add(tag + " script not stable");
    unsigned ok = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const auto r = run_until(b.protocol(), c0, SchedulerKind::random_maximum_matching, seed,
                               [&](const Configuration& c) -> std::optional<Terminal> {
                                 if (b.stable_output(c)) return Terminal::stable;
                                 return std::nullopt;
                               });
      if (r.record.terminal == Terminal::stable && b.stable_output(r.last) == std::optional(b.expected_output(c0)))
        ++ok;
    }
    if (ok != 100) f.add(tag + " only " + std::to_string(ok) + "/100 seeded runs correct");
    o.artifact.push_back({na, nb, t.min_symmetry(), ok});
  }
  f.finish(o, "4 instances meet min{N_min,|Na-Nb|}; 400/400 seeded runs stabilize correctly");
  return o;
}

Outcome c5_k_majority() {
  Outcome o;
  Failures f;
  for (unsigned k : {2u, 3u}) {
    const Builtin b = Builtin::k_majority(k);
    const Count n = 2 * k * (k + 1) + 1;
    const Configuration c0 = b.initial({{"a", n / 2 + 1}, {"b", n / 2}});
    const Schedule s = script_for(b, c0);
    const ExecutionTrace t(b.protocol(), c0, s.steps);
    const std::string tag = "k=" + std::to_string(k);
    // replay: each configuration conserves n and the leader sum
    auto leader_sum = [&](const Configuration& c) {
      std::int64_t sum = 0;
      for (int v = -static_cast<int>(k); v <= static_cast<int>(k); ++v) sum += v * static_cast<std::int64_t>(c[v + k]);
      return sum;
    };
    bool conserved = true;
    for (const auto& c : t.configurations())
      conserved = conserved && c.population() == n && leader_sum(c) == static_cast<std::int64_t>(k);
    if (!conserved) f.add(tag + " replay broke conservation");
    if (t.terminal() != s.terminal) f.add(tag + " replay terminal differs");
    if (t.min_symmetry() < k) f.add(tag + " achieved " + std::to_string(t.min_symmetry()));
    if (b.stable_output(t.terminal()) != std::optional<std::size_t>{1}) f.add(tag + " does not end stable on 1");
    if (unanimous_output(b.protocol(), t.terminal()) != std::optional<std::size_t>{1}) f.add(tag + " output not 1");
    o.artifact.push_back({k, n, t.min_symmetry(), t.steps().size()});
  }
  f.finish(o, "k=2 (n=13) and k=3 (n=25) achieve >= k and end stable with output 1");
  return o;
}

Outcome c6_parity() {
  Outcome o;
  Failures f;
  const Builtin b = Builtin::parity();
  const auto r = verify_parity_bound(b.protocol(), 2, 10);
  if (r.bound != 8) f.add("bound " + std::to_string(r.bound));
  for (auto [n, v] : r.values) {
    if (v >= 8) f.add("n=" + std::to_string(n) + " exact " + std::to_string(v));
    o.artifact.push_back({n, v});
  }
  auto at = [&](unsigned n) {
    for (auto [m, v] : r.values)
      if (m == n) return v;
    return Count{0};
  };
  if (at(4) != 2) f.add("n=4 gives " + std::to_string(at(4)));
  if (at(5) != 1) f.add("n=5 gives " + std::to_string(at(5)));
  // independent widest-path search on the node-level graph
  for (unsigned n : {4u, 5u}) {
    const auto want = oracle::exact_symmetry(b.protocol(), {0, n, 0, 0}, n % 2 ? 1 : 0);
    if (want != at(n)) f.add("oracle disagrees at n=" + std::to_string(n));
  }
  if (!r.holds) f.add("bound does not hold");
  f.finish(o, "all exact values < 8 for n=2..10; n=4 -> 2, n=5 -> 1");
  return o;
}

std::vector<Builtin> small_builtins() {
  return {Builtin::count_to_x(3), Builtin::count_to_x(5), Builtin::positive_lc({1, 2}, 4), Builtin::majority(),
          Builtin::k_majority(2), Builtin::parity()};
}

Outcome c7_oracle_equivalence() {
  Outcome o;
  Failures f;
  std::size_t configs = 0;
  for (const Builtin& b : small_builtins()) {
    const Protocol& p = b.protocol();
    for (Count n = 1; n <= 6; ++n)
      for (const auto& init : oracle::compositions(p.num_states(), p.initial_states(), n)) {
        // every configuration reachable sequentially from this initial one
        std::set<oracle::Counts> seen{init};
        std::vector<oracle::Counts> todo{init};
        while (!todo.empty()) {
          const auto c = todo.back();
          todo.pop_back();
          ++configs;
          const auto want = oracle::sequential_successors(p, c);
          std::set<oracle::Counts> got;
          for (const auto& s : successors(p, Configuration(c), 1)) got.emplace(s.counts().begin(), s.counts().end());
          if (got != want) f.add(b.provenance() + " at " + cfg(Configuration(c)));
          for (const auto& s : want)
            if (seen.insert(s).second) todo.push_back(s);
        }
      }
  }
  o.artifact = configs;
  f.finish(o, std::to_string(configs) + " configurations over 6 builtin instances, zero discrepancies");
  return o;
}

Outcome c8_exact_vs_scripted() {
  Outcome o;
  Failures f;
  std::size_t checked = 0;
  auto check = [&](const Builtin& b, const std::map<std::string, Count>& in) {
    const Configuration c0 = b.initial(in);
    if (c0.population() > 12) return;
    std::optional<Schedule> s;
    try {
      s = script_for(b, c0);
    } catch (const UnsupportedCase&) {
      return;
    }
    const auto e = exact_symmetry(b.protocol(), c0, b.expected_output(c0));
    ++checked;
    if (e.exact_symmetry < s->achieved_min_symmetry)
      f.add(b.provenance() + " " + cfg(c0) + " exact " + std::to_string(e.exact_symmetry) + " < scripted " +
            std::to_string(s->achieved_min_symmetry));
    o.artifact.push_back({b.provenance(), cfg(c0), e.exact_symmetry, s->achieved_min_symmetry});
  };
  for (unsigned x : {2u, 3u, 5u})
    for (Count n0 = 0; n0 <= 12; ++n0)
      for (Count n1 = 0; n0 + n1 <= 12; ++n1)
        if (n0 + n1 >= 1) check(Builtin::count_to_x(x), {{"0", n0}, {"1", n1}});
  for (unsigned c : {4u, 6u})
    for (Count a = 0; a <= 12; ++a)
      for (Count d = 0; a + d <= 12; ++d)
        if (a + d >= 1) check(Builtin::positive_lc({1, 2}, c), {{"s1", a}, {"s2", d}});
  for (Count na = 0; na <= 12; ++na)
    for (Count nb = 0; na + nb <= 12; ++nb)
      if (na + nb >= 1) check(Builtin::majority(), {{"a", na}, {"b", nb}});
  for (unsigned k : {1u, 2u})
    for (Count na = 0; na <= 12; ++na)
      for (Count nb = 0; na + nb <= 12; ++nb)
        if (na + nb >= 1) check(Builtin::k_majority(k), {{"a", na}, {"b", nb}});
  f.finish(o, std::to_string(checked) + " scripted instances with n <= 12, exact >= scripted on all");
  return o;
}

Outcome c9_state_analysis() {
  Outcome o;
  Failures f;
  auto names = [](const Protocol& p, const std::vector<StateId>& qs) {
    std::vector<std::string> out;
    for (StateId q : qs) out.push_back(p.state_name(q));
    return out;
  };
  for (unsigned x : {1u, 2u, 3u, 5u, 8u}) {
    const Builtin b = Builtin::count_to_x(x);
    const auto d = names(b.protocol(), disseminating_states(b.protocol()));
    if (d != std::vector<std::string>{"q" + std::to_string(x)}) f.add(b.provenance() + " disseminating wrong");
    o.artifact.push_back({b.provenance(), d});
  }
  for (unsigned c : {4u, 6u}) {
    const Builtin b = Builtin::positive_lc({1, 2}, c);
    const auto d = names(b.protocol(), disseminating_states(b.protocol()));
    if (d != std::vector<std::string>{"q" + std::to_string(c)}) f.add(b.provenance() + " disseminating wrong");
    o.artifact.push_back({b.provenance(), d});
  }
  for (const Builtin& b : {Builtin::majority(), Builtin::k_majority(1), Builtin::k_majority(2), Builtin::k_majority(3),
                           Builtin::parity()}) {
    const auto os = output_stable_states(b.protocol());
    if (!os.empty()) f.add(b.provenance() + " has output-stable states");
    if (auto coeffs = b.linear_coefficients()) {
      const auto lint = mixed_sign_stability_check(b.protocol(), *coeffs);
      if (!lint.mixed_signs || !lint.consistent) f.add(b.provenance() + " mixed-sign lint inconsistent");
    }
    o.artifact.push_back({b.provenance(), names(b.protocol(), os)});
  }
  std::size_t trees = 0;
  for (const Builtin& b : {Builtin::count_to_x(5), Builtin::count_to_x(8), Builtin::positive_lc({1, 2}, 6),
                           Builtin::positive_lc({2, 3, 5}, 9), Builtin::majority(), Builtin::k_majority(3),
                           Builtin::parity()}) {
    const auto rep = analyze_states(b.protocol());
    for (const auto& [q, t] : rep.trees) {
      ++trees;
      if (t.depth() > b.protocol().num_states()) f.add(b.provenance() + " tree too deep");
      if (!is_valid_production_tree(b.protocol(), t)) f.add(b.provenance() + " invalid tree");
    }
  }
  o.artifact.push_back(trees);
  f.finish(o, "disseminating sets, empty output-stable sets, " + std::to_string(trees) + " trees within depth |Q|");
  return o;
}

Outcome c10_sweep(unsigned threads) {
  Outcome o;
  ExperimentSpec spec;
  for (Count n = 100; n <= 2000; n += 100) spec.sizes.push_back(n);
  spec.repetitions = 20;
  spec.base_seed = 1;
  spec.threads = threads;
  const auto res = run_sweep(spec);
  const auto stab = mean_curve(res.aggregate, Mode::until_stability);
  const auto alarm = mean_curve(res.aggregate, Mode::until_alarm_majority);
  const GrowthFit g = growth_fit(stab);
  unsigned caps = 0;
  for (const auto& r : res.aggregate) caps += r.cap_hits;
  bool dominates = stab.size() == alarm.size();
  std::size_t strict = 0;
  for (std::size_t i = 0; dominates && i < stab.size(); ++i) {
    dominates = alarm[i].second >= stab[i].second;
    strict += alarm[i].second > stab[i].second;
  }
  const bool a_ok = g.spearman > 0.9 && g.preferred == "log";
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "(a) %s: spearman %.3f (need > 0.9), preferred %s, log sse %.3f vs sqrt sse %.3f; "
                "(b) %s: alarm mean >= stability mean at %zu/%zu sizes (strictly at %zu); cap hits %u",
                a_ok ? "pass" : "FAIL", g.spearman, g.preferred.c_str(), g.log_fit.sse, g.sqrt_fit.sse,
                dominates ? "pass" : "FAIL", dominates ? stab.size() : std::size_t{0}, stab.size(), strict, caps);
  o.pass = a_ok && dominates && caps == 0;
  o.detail = buf;
  o.artifact = {{"records", records_csv(res.records)},
                {"aggregate", aggregate_csv(res.aggregate)},
                {"fit", json::parse(growth_fit_json(g))}};
  return o;
}

struct Criterion {
  int id;
  std::string name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for popsym"};
  std::vector<int> only, skip;
  unsigned threads = 0;
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_option("--skip", skip, "Skip these criteria")->delimiter(',');
  app.add_option("--threads", threads, "Worker threads for the sweep (0 = all cores)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "symmetry metric examples", 1, c1_symmetry_examples},
      {2, "count_to_x scripted bound", 5, c2_count_to_x},
      {3, "positive_lc scripted bound", 5, c3_positive_lc},
      {4, "majority schedule and seeded runs", 30, c4_majority},
      {5, "k-symmetry majority schedule", 5, c5_k_majority},
      {6, "parity impossibility bound", 60, c6_parity},
      {7, "oracle equivalence n <= 6", 0, c7_oracle_equivalence},
      {8, "exact >= scripted for n <= 12", 0, c8_exact_vs_scripted},
      {9, "state analysis", 0, c9_state_analysis},
      {10, "count_to_5 observed symmetry sweep", 600, [threads] { return c10_sweep(threads); }},
  };
  auto selected = [&](int id) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) return false;
    return std::find(skip.begin(), skip.end(), id) == skip.end();
  };

  bool all_pass = true;
  std::map<int, std::string> first_artifacts;
  auto report = [&](int id, const std::string& name, bool pass, const std::string& detail, double secs) {
    std::printf("criterion %2d %s: %s (%.2fs) %s\n", id, pass ? "PASS" : "FAIL", name.c_str(), secs, detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && pass;
  };
  for (const auto& c : all) {
    if (!selected(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      o.pass = false;
      o.detail += "; over the " + std::to_string(static_cast<int>(c.limit_s)) + "s limit";
    }
    if (c.id >= 2) first_artifacts[c.id] = o.artifact.dump();
    report(c.id, c.name, o.pass, o.detail, secs);
  }

  if (selected(11)) {
    // Second pass of criteria 2-10 with the same seeds; artifacts must match byte for byte.
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> differ;
    std::size_t bytes = 0;
    for (const auto& c : all) {
      if (c.id < 2) continue;
      Outcome o;
      try {
        o = c.run();
      } catch (const std::exception& e) {
        o.artifact = std::string("threw: ") + e.what();
      }
      const std::string again = o.artifact.dump();
      bytes += again.size();
      auto it = first_artifacts.find(c.id);
      const std::string first = it != first_artifacts.end() ? it->second : [&] {
        Outcome p = c.run();
        return p.artifact.dump();
      }();
      if (first != again) differ.push_back(std::to_string(c.id));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string detail = differ.empty() ? "criteria 2-10 artifacts byte-identical on rerun (" + std::to_string(bytes) +
                                              " bytes)"
                                        : "artifacts differ for criteria";
    for (const auto& d : differ) detail += " " + d;
    report(11, "determinism", differ.empty(), detail, secs);
  }
  return all_pass ? 0 : 1;
}
