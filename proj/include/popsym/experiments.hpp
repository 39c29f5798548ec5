#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "popsym/builtins.hpp"
#include "popsym/schedulers.hpp"

namespace popsym {

enum class Mode { until_alarm_majority, until_stability };
std::string mode_name(Mode m);
Mode parse_mode(const std::string& s);

enum class Terminal { stable, alarm_majority, step_cap };
std::string terminal_name(Terminal t);

inline constexpr std::uint64_t kDefaultStepCap = 10'000'000;
inline constexpr unsigned kDefaultRepetitions = 30;

struct RunRecord {
  std::string protocol;
  Count n = 0;
  unsigned repetition = 0;
  std::uint64_t seed = 0;
  Mode mode = Mode::until_stability;
  std::uint64_t steps = 0;
  Count observed_min_symmetry = 0;
  Terminal terminal = Terminal::step_cap;
};

// Stopping rule evaluated on c0 and after every step.
using StopRule = std::function<std::optional<Terminal>(const Configuration&)>;

struct RunResult {
  RunRecord record;
  Configuration last;
};

/// Random-scheduler run of any protocol; record.protocol is the protocol name.
RunResult run_until(const Protocol& p, const Configuration& c0, SchedulerKind kind, std::uint64_t seed,
                    const StopRule& stop, std::uint64_t cap = kDefaultStepCap);

/// Runs a random scheduler from c0 until the mode's stopping condition holds
/// or cap steps have been taken. The minimum includes c0 and the stopping
/// configuration.
RunRecord run_once(const Builtin& b, const Configuration& c0, SchedulerKind kind, std::uint64_t seed, Mode mode,
                   std::uint64_t cap = kDefaultStepCap);

struct ExperimentSpec {
  Builtin builtin = Builtin::count_to_x(5);
  /// Every node starts with this input symbol.
  std::string input_symbol = "1";
  std::vector<Count> sizes;
  unsigned repetitions = kDefaultRepetitions;
  SchedulerKind scheduler = SchedulerKind::random_maximum_matching;
  std::uint64_t base_seed = 1;
  std::vector<Mode> modes{Mode::until_alarm_majority, Mode::until_stability};
  std::uint64_t step_cap = kDefaultStepCap;
  /// 0 picks hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

/// Seed of repetition rep at the size_index-th size; shared by all modes.
std::uint64_t run_seed(const ExperimentSpec& s, std::size_t size_index, unsigned rep);

struct AggregateRow {
  std::string protocol;
  Count n = 0;
  Mode mode = Mode::until_stability;
  double mean_symmetry = 0;
  double stddev = 0;
  /// Runs averaged; step-cap runs are left out and counted separately.
  unsigned reps = 0;
  unsigned cap_hits = 0;
};

struct SweepResult {
  std::vector<RunRecord> records;  // ordered by (n, repetition, mode)
  std::vector<AggregateRow> aggregate;  // ordered by (n, mode)
};

SweepResult run_sweep(const ExperimentSpec& spec);
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records);

/// Rows of one mode as (n, mean) points.
std::vector<std::pair<double, double>> mean_curve(const std::vector<AggregateRow>& rows, Mode mode);

std::string records_csv(const std::vector<RunRecord>& records);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

struct ShapeFit {
  std::string shape;  // "log" or "sqrt"
  double a = 0, b = 0;
  double sse = 0;
  double r2 = 0;
  std::vector<double> residuals;
};

struct GrowthFit {
  ShapeFit log_fit;
  ShapeFit sqrt_fit;
  std::string preferred;  // shape with the smaller squared error
  bool degenerate = false;  // constant data, both shapes fit equally
  double spearman = 0;
};

/// Least squares of y against a*log n + b and a*sqrt n + b. Needs >= 5 points.
GrowthFit growth_fit(const std::vector<std::pair<double, double>>& points);

/// Rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

std::string growth_fit_json(const GrowthFit& f);

}  // namespace popsym
