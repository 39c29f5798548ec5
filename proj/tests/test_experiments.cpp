#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "popsym/experiments.hpp"

using namespace popsym;

namespace {

Configuration ones(const Builtin& b, Count n) { return b.initial({{"1", n}}); }

// Plain two-parameter least squares, written out for the check.
std::pair<double, double> ls(const std::vector<double>& f, const std::vector<double>& y) {
  const double m = static_cast<double>(f.size());
  double sf = 0, sy = 0, sff = 0, sfy = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    sf += f[i];
    sy += y[i];
    sff += f[i] * f[i];
    sfy += f[i] * y[i];
  }
  const double a = (m * sfy - sf * sy) / (m * sff - sf * sf);
  return {a, (sy - a * sf) / m};
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++equal;
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("count_to_5 with five nodes reaches an alarm majority") {
  const Builtin b = Builtin::count_to_x(5);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = run_once(b, ones(b, 5), SchedulerKind::random_maximum_matching, seed, Mode::until_alarm_majority);
    CHECK(r.terminal == Terminal::alarm_majority);
    CHECK(r.observed_min_symmetry >= 1);
    CHECK(r.observed_min_symmetry <= 5);
  }
}

TEST_CASE("count_to_5 with four nodes stabilizes without an alarm") {
  const Builtin b = Builtin::count_to_x(5);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto res = run_until(b.protocol(), ones(b, 4), SchedulerKind::random_maximum_matching, seed,
                               [&](const Configuration& c) -> std::optional<Terminal> {
                                 if (b.stable_output(c)) return Terminal::stable;
                                 return std::nullopt;
                               });
    CHECK(res.record.terminal == Terminal::stable);
    CHECK(res.last[5] == 0);
    CHECK(b.stable_output(res.last) == std::optional<std::size_t>{0});
    const auto r = run_once(b, ones(b, 4), SchedulerKind::random_maximum_matching, seed, Mode::until_stability);
    CHECK(r.terminal == Terminal::stable);
  }
}

TEST_CASE("runs replay identically from a seed") {
  const Builtin b = Builtin::count_to_x(5);
  for (Mode m : {Mode::until_alarm_majority, Mode::until_stability}) {
    const auto r1 = run_once(b, ones(b, 300), SchedulerKind::random_maximum_matching, 42, m);
    const auto r2 = run_once(b, ones(b, 300), SchedulerKind::random_maximum_matching, 42, m);
    CHECK(r1.steps == r2.steps);
    CHECK(r1.observed_min_symmetry == r2.observed_min_symmetry);
    CHECK(r1.terminal == r2.terminal);
  }
}

TEST_CASE("step cap is reported as a terminal verdict") {
  const Builtin b = Builtin::count_to_x(5);
  const auto r = run_once(b, ones(b, 500), SchedulerKind::random_maximum_matching, 3, Mode::until_stability, 2);
  CHECK(r.terminal == Terminal::step_cap);
  CHECK(r.steps == 2);
}

TEST_CASE("weighted sum is conserved until the first alarm") {
  const Builtin b = Builtin::count_to_x(5);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Count n = 97;
    bool held = true;
    run_until(b.protocol(), ones(b, n), SchedulerKind::random_maximum_matching, seed,
              [&](const Configuration& c) -> std::optional<Terminal> {
                if (c[5] > 0) return Terminal::alarm_majority;
                Count w = 0;
                for (StateId i = 1; i < 5; ++i) w += i * c[i];
                held = held && w == n;
                return std::nullopt;
              });
    CHECK(held);
  }
}

TEST_CASE("alarm-majority minimum dominates the stability minimum per seed") {
  const Builtin b = Builtin::count_to_x(5);
  for (Count n : {50, 120, 333})
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto a = run_once(b, ones(b, n), SchedulerKind::random_maximum_matching, seed, Mode::until_alarm_majority);
      const auto s = run_once(b, ones(b, n), SchedulerKind::random_maximum_matching, seed, Mode::until_stability);
      CHECK(a.terminal == Terminal::alarm_majority);
      CHECK(s.terminal == Terminal::stable);
      CHECK(s.observed_min_symmetry <= a.observed_min_symmetry);
      CHECK(s.steps >= a.steps);
    }
}

TEST_CASE("random maximum matching runs stabilize to the predicate value") {
  struct Case {
    Builtin b;
    std::map<std::string, Count> in;
  };
  const std::vector<Case> cases{
      {Builtin::count_to_x(5), {{"1", 23}, {"0", 9}}},
      {Builtin::count_to_x(5), {{"1", 4}, {"0", 9}}},
      {Builtin::positive_lc({1, 2}, 6), {{"s1", 3}, {"s2", 2}}},
      {Builtin::positive_lc({1, 2}, 6), {{"s1", 1}, {"s2", 2}}},
      {Builtin::majority(), {{"a", 6}, {"b", 2}}},
      {Builtin::majority(), {{"a", 3}, {"b", 5}}},
      {Builtin::majority(), {{"a", 4}, {"b", 4}}},
      {Builtin::k_majority(2), {{"a", 9}, {"b", 4}}},
      {Builtin::k_majority(2), {{"a", 4}, {"b", 7}}},
      {Builtin::parity(), {{"1", 7}}},
      {Builtin::parity(), {{"1", 8}}},
  };
  for (const auto& cs : cases) {
    const Configuration c0 = cs.b.initial(cs.in);
    const auto want = cs.b.expected_output(c0);
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const auto res = run_until(cs.b.protocol(), c0, SchedulerKind::random_maximum_matching, seed,
                                 [&](const Configuration& c) -> std::optional<Terminal> {
                                   if (cs.b.stable_output(c)) return Terminal::stable;
                                   return std::nullopt;
                                 });
      INFO(cs.b.provenance(), " seed ", seed);
      REQUIRE(res.record.terminal == Terminal::stable);
      CHECK(cs.b.stable_output(res.last) == std::optional<std::size_t>{want});
    }
  }
}

TEST_CASE("sweep shape and seeding") {
  ExperimentSpec spec;
  for (Count n = 100; n <= 1000; n += 100) spec.sizes.push_back(n);
  spec.repetitions = 20;
  spec.modes = {Mode::until_stability};
  const auto res = run_sweep(spec);
  CHECK(res.records.size() == 200);
  CHECK(res.aggregate.size() == 10);
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    const auto& r = res.records[i];
    CHECK(r.n == spec.sizes[i / 20]);
    CHECK(r.repetition == i % 20);
    CHECK(r.seed == run_seed(spec, i / 20, r.repetition));
    CHECK(r.observed_min_symmetry >= 1);
    CHECK(r.observed_min_symmetry <= r.n);
  }
  CHECK(run_seed(spec, 0, 0) == spec.base_seed);
}

TEST_CASE("aggregate uses the sample deviation and leaves out capped runs") {
  std::vector<RunRecord> recs;
  for (unsigned i = 0; i < 4; ++i)
    recs.push_back({"p", 10, i, i, Mode::until_stability, 5, static_cast<Count>(2 + 2 * i), Terminal::stable});
  recs.push_back({"p", 10, 4, 4, Mode::until_stability, 9, 1, Terminal::step_cap});
  const auto rows = aggregate(recs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean_symmetry == doctest::Approx(5.0));
  CHECK(rows[0].stddev == doctest::Approx(std::sqrt(20.0 / 3.0)));
  CHECK(rows[0].reps == 4);
  CHECK(rows[0].cap_hits == 1);
}

TEST_CASE("csv headers") {
  ExperimentSpec spec;
  spec.sizes = {10, 20};
  spec.repetitions = 2;
  const auto res = run_sweep(spec);
  const auto rec = records_csv(res.records);
  const auto agg = aggregate_csv(res.aggregate);
  CHECK(rec.substr(0, rec.find('\n')) == "protocol,n,repetition,seed,mode,steps,observed_min_symmetry,terminal");
  CHECK(agg.substr(0, agg.find('\n')) == "protocol,n,mode,mean_symmetry,stddev,reps");
  CHECK(std::count(rec.begin(), rec.end(), '\n') == 1 + 8);
  CHECK(std::count(agg.begin(), agg.end(), '\n') == 1 + 4);
}

TEST_CASE("csv output does not depend on the thread count") {
  ExperimentSpec spec;
  spec.sizes = {60, 130, 200};
  spec.repetitions = 7;
  spec.threads = 1;
  const auto one = run_sweep(spec);
  spec.threads = 5;
  const auto five = run_sweep(spec);
  CHECK(records_csv(one.records) == records_csv(five.records));
  CHECK(aggregate_csv(one.aggregate) == aggregate_csv(five.aggregate));
}

TEST_CASE("experiment settings validation") {
  ExperimentSpec spec;
  spec.sizes = {1};
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
  spec.sizes = {10};
  spec.repetitions = 0;
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
  spec.repetitions = 1;
  spec.step_cap = 0;
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
  spec.step_cap = 1;
  CHECK_NOTHROW(spec.validate());
  spec.builtin = Builtin::parity();
  spec.modes = {Mode::until_alarm_majority};
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
}

TEST_CASE("growth fit on synthetic curves") {
  std::vector<std::pair<double, double>> logs, roots;
  for (double n = 100; n <= 2000; n += 100) {
    logs.emplace_back(n, 3 * std::log(n) + 1);
    roots.emplace_back(n, 0.5 * std::sqrt(n) - 2);
  }
  const auto fl = growth_fit(logs);
  CHECK(fl.preferred == "log");
  CHECK(fl.log_fit.a == doctest::Approx(3.0));
  CHECK(fl.log_fit.b == doctest::Approx(1.0));
  for (double r : fl.log_fit.residuals) CHECK(std::abs(r) < 1e-9);
  CHECK(fl.spearman == doctest::Approx(1.0));
  const auto fr = growth_fit(roots);
  CHECK(fr.preferred == "sqrt");
  CHECK(fr.sqrt_fit.sse < 1e-12);
  CHECK_FALSE(fr.degenerate);
}

TEST_CASE("growth fit matches a direct least squares") {
  std::vector<std::pair<double, double>> pts{{100, 3.1}, {200, 2.7}, {300, 4.4}, {400, 4.0}, {500, 5.9}, {600, 5.2}};
  std::vector<double> lf, sf, y;
  for (auto [n, v] : pts) {
    lf.push_back(std::log(n));
    sf.push_back(std::sqrt(n));
    y.push_back(v);
  }
  const auto f = growth_fit(pts);
  const auto [la, lb] = ls(lf, y);
  const auto [sa, sb] = ls(sf, y);
  CHECK(f.log_fit.a == doctest::Approx(la));
  CHECK(f.log_fit.b == doctest::Approx(lb));
  CHECK(f.sqrt_fit.a == doctest::Approx(sa));
  CHECK(f.sqrt_fit.b == doctest::Approx(sb));
  double lsse = 0, ssse = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    lsse += std::pow(y[i] - la * lf[i] - lb, 2);
    ssse += std::pow(y[i] - sa * sf[i] - sb, 2);
  }
  CHECK(f.log_fit.sse == doctest::Approx(lsse));
  CHECK(f.sqrt_fit.sse == doctest::Approx(ssse));
  CHECK(f.preferred == (lsse < ssse ? "log" : "sqrt"));
}

TEST_CASE("degenerate data and short input") {
  std::vector<std::pair<double, double>> flat;
  for (double n = 10; n <= 60; n += 10) flat.emplace_back(n, 4.0);
  const auto f = growth_fit(flat);
  CHECK(f.degenerate);
  CHECK(f.preferred == "none");
  flat.resize(4);
  CHECK_THROWS_AS(growth_fit(flat), InvalidInput);
}

TEST_CASE("spearman with ties against a rank oracle") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<double> y{2, 1, 2, 5, 4, 4, 9, 3};
  CHECK(spearman(x, y) == doctest::Approx(pearson(ranks(x), ranks(y))));
  const std::vector<double> rev{8, 7, 6, 5, 4, 3, 2, 1};
  CHECK(spearman(x, rev) == doctest::Approx(-1.0));
}
