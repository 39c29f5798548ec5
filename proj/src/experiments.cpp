#include "popsym/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "popsym/errors.hpp"

namespace popsym {

std::string mode_name(Mode m) {
  return m == Mode::until_alarm_majority ? "until_alarm_majority" : "until_stability";
}

Mode parse_mode(const std::string& s) {
  if (s == "until_alarm_majority") return Mode::until_alarm_majority;
  if (s == "until_stability") return Mode::until_stability;
  throw InvalidInput("unknown mode '" + s + "' (until_alarm_majority | until_stability)");
}

std::string terminal_name(Terminal t) {
  switch (t) {
    case Terminal::stable: return "stable";
    case Terminal::alarm_majority: return "alarm-majority";
    case Terminal::step_cap: return "step-cap";
  }
  return "?";
}

RunResult run_until(const Protocol& p, const Configuration& c0, SchedulerKind kind, std::uint64_t seed,
                    const StopRule& stop, std::uint64_t cap) {
  if (c0.num_states() != p.num_states()) throw InvalidInput("configuration does not match protocol");
  if (cap < 1) throw InvalidInput("step cap must be at least 1");
  RunResult out{{}, c0};
  RunRecord& r = out.record;
  r.protocol = p.name();
  r.n = static_cast<Count>(c0.population());
  r.seed = seed;
  RandomScheduler sched(kind, seed);
  Configuration& c = out.last;
  r.observed_min_symmetry = symmetry_of_config(c);
  while (true) {
    if (auto t = stop(c)) {
      r.terminal = *t;
      break;
    }
    if (r.steps == cap) {
      r.terminal = Terminal::step_cap;
      break;
    }
    c = apply_step(p, c, sched.next(c));
    ++r.steps;
    r.observed_min_symmetry = std::min(r.observed_min_symmetry, symmetry_of_config(c));
  }
  return out;
}

RunRecord run_once(const Builtin& b, const Configuration& c0, SchedulerKind kind, std::uint64_t seed, Mode mode,
                   std::uint64_t cap) {
  std::optional<StateId> alarm = b.alarm_state();
  if (mode == Mode::until_alarm_majority && !alarm)
    throw InvalidInput(b.provenance() + " has no alarm state; until_alarm_majority does not apply");
  const std::uint64_t n = c0.population();
  StopRule stop = [&](const Configuration& c) -> std::optional<Terminal> {
    if (mode == Mode::until_alarm_majority) {
      if (2 * std::uint64_t{c[*alarm]} > n) return Terminal::alarm_majority;
    } else if (b.stable_output(c)) {
      return Terminal::stable;
    }
    return std::nullopt;
  };
  RunRecord r = run_until(b.protocol(), c0, kind, seed, stop, cap).record;
  r.protocol = b.provenance();
  r.mode = mode;
  return r;
}

void ExperimentSpec::validate() const {
  if (sizes.empty()) throw InvalidInput("experiment needs at least one population size");
  for (Count n : sizes)
    if (n < 2) throw InvalidInput("population sizes must be at least 2");
  if (repetitions < 1) throw InvalidInput("repetitions must be at least 1");
  if (step_cap < 1) throw InvalidInput("step cap must be at least 1");
  if (modes.empty()) throw InvalidInput("experiment needs at least one mode");
  builtin.protocol().input_state(input_symbol);
  for (Mode m : modes)
    if (m == Mode::until_alarm_majority && !builtin.alarm_state())
      throw InvalidInput(builtin.provenance() + " has no alarm state; until_alarm_majority does not apply");
}

std::uint64_t run_seed(const ExperimentSpec& s, std::size_t size_index, unsigned rep) {
  return s.base_seed + size_index * s.repetitions + rep;
}

SweepResult run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  struct Task {
    std::size_t size_index;
    unsigned rep;
    Mode mode;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < spec.sizes.size(); ++i)
    for (unsigned rep = 0; rep < spec.repetitions; ++rep)
      for (Mode m : spec.modes) tasks.push_back({i, rep, m});

  std::vector<RunRecord> out(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      try {
        const Task& task = tasks[t];
        const Count n = spec.sizes[task.size_index];
        const auto c0 = spec.builtin.initial({{spec.input_symbol, n}});
        out[t] = run_once(spec.builtin, c0, spec.scheduler, run_seed(spec, task.size_index, task.rep), task.mode,
                          spec.step_cap);
        out[t].repetition = task.rep;
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = tasks.size();
      }
    }
  };
  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  SweepResult res;
  res.records = std::move(out);
  res.aggregate = aggregate(res.records);
  return res;
}

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records) {
  std::vector<AggregateRow> rows;
  std::vector<std::vector<double>> values;
  for (const auto& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& a) {
      return a.n == r.n && a.mode == r.mode && a.protocol == r.protocol;
    });
    if (it == rows.end()) {
      rows.push_back({r.protocol, r.n, r.mode, 0, 0, 0, 0});
      values.emplace_back();
      it = rows.end() - 1;
    }
    const std::size_t i = static_cast<std::size_t>(it - rows.begin());
    if (r.terminal == Terminal::step_cap)
      ++it->cap_hits;
    else
      values[i].push_back(r.observed_min_symmetry);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& v = values[i];
    rows[i].reps = static_cast<unsigned>(v.size());
    if (v.empty()) continue;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    rows[i].mean_symmetry = mean;
    rows[i].stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  std::stable_sort(rows.begin(), rows.end(), [](const AggregateRow& a, const AggregateRow& b) {
    return std::tie(a.protocol, a.n, a.mode) < std::tie(b.protocol, b.n, b.mode);
  });
  return rows;
}

std::vector<std::pair<double, double>> mean_curve(const std::vector<AggregateRow>& rows, Mode mode) {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : rows)
    if (r.mode == mode && r.reps > 0) out.emplace_back(r.n, r.mean_symmetry);
  return out;
}

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Provenance strings contain commas ("positive_lc(a=1,2,c=4)").
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string records_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << "protocol,n,repetition,seed,mode,steps,observed_min_symmetry,terminal\n";
  for (const auto& r : records)
    os << csv_field(r.protocol) << ',' << r.n << ',' << r.repetition << ',' << r.seed << ',' << mode_name(r.mode) << ','
       << r.steps << ',' << r.observed_min_symmetry << ',' << terminal_name(r.terminal) << '\n';
  return os.str();
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream os;
  os << "protocol,n,mode,mean_symmetry,stddev,reps\n";
  for (const auto& r : rows)
    os << csv_field(r.protocol) << ',' << r.n << ',' << mode_name(r.mode) << ',' << fixed(r.mean_symmetry) << ','
       << fixed(r.stddev) << ',' << r.reps << '\n';
  return os.str();
}

namespace {

ShapeFit fit_shape(const std::string& shape, const std::vector<std::pair<double, double>>& pts, double (*f)(double)) {
  ShapeFit fit;
  fit.shape = shape;
  const double m = static_cast<double>(pts.size());
  double sx = 0, sy = 0;
  for (auto [n, y] : pts) {
    sx += f(n);
    sy += y;
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto [n, y] : pts) {
    sxx += (f(n) - mx) * (f(n) - mx);
    sxy += (f(n) - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  fit.a = sxx > 0 ? sxy / sxx : 0;
  fit.b = my - fit.a * mx;
  for (auto [n, y] : pts) {
    const double e = y - (fit.a * f(n) + fit.b);
    fit.residuals.push_back(e);
    fit.sse += e * e;
  }
  fit.r2 = syy > 0 ? 1 - fit.sse / syy : 0;
  return fit;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("spearman needs two equal-length series of length >= 2");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double m = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / m;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / m;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0;
  return sxy / std::sqrt(sxx * syy);
}

GrowthFit growth_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 5) throw InvalidInput("growth fit needs at least 5 sizes");
  for (auto [n, y] : points)
    if (n <= 0) throw InvalidInput("growth fit needs positive sizes");
  GrowthFit g;
  g.log_fit = fit_shape("log", points, [](double n) { return std::log(n); });
  g.sqrt_fit = fit_shape("sqrt", points, [](double n) { return std::sqrt(n); });
  const double y0 = points.front().second;
  g.degenerate = std::all_of(points.begin(), points.end(), [&](auto pt) { return pt.second == y0; });
  g.preferred = g.degenerate ? "none" : (g.log_fit.sse <= g.sqrt_fit.sse ? "log" : "sqrt");
  std::vector<double> xs, ys;
  for (auto [n, y] : points) {
    xs.push_back(n);
    ys.push_back(y);
  }
  g.spearman = spearman(xs, ys);
  return g;
}

std::string growth_fit_json(const GrowthFit& f) {
  auto shape = [](const ShapeFit& s) {
    return nlohmann::ordered_json{{"a", s.a}, {"b", s.b}, {"sse", s.sse}, {"r2", s.r2}, {"residuals", s.residuals}};
  };
  nlohmann::ordered_json j{{"log", shape(f.log_fit)},
                           {"sqrt", shape(f.sqrt_fit)},
                           {"preferred", f.preferred},
                           {"degenerate", f.degenerate},
                           {"spearman", f.spearman}};
  return j.dump(2);
}

}  // namespace popsym
