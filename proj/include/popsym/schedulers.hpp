#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "popsym/core.hpp"

namespace popsym {

// 64-bit Mersenne Twister with a portable bounded draw, so a seed gives the
// same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

enum class SchedulerKind { sequential_random, random_maximum_matching, random_maximal_matching };

std::string scheduler_name(SchedulerKind k);
SchedulerKind parse_scheduler(const std::string& name);  // seq | maxmatch | maximal

/// One ordered node pair, uniform over the n(n-1) ordered pairs of distinct nodes.
ParallelStep next_step_sequential(const Configuration& c, Rng& rng);

/// floor(n/2) disjoint pairs: a uniform permutation of the nodes paired off in
/// consecutive slots, so uniform over maximum matchings with uniform orientation.
ParallelStep next_step_random_maximum_matching(const Configuration& c, Rng& rng);

// On the complete graph every maximal matching is maximum, so this draws from
// the same distribution. Kept as its own kind for non-complete graphs.
ParallelStep next_step_random_maximal_matching(const Configuration& c, Rng& rng);

// Owns its random stream; one instance per simulation run.
class RandomScheduler {
 public:
  RandomScheduler(SchedulerKind kind, std::uint64_t seed) : kind_(kind), rng_(seed) {}
  SchedulerKind kind() const { return kind_; }
  ParallelStep next(const Configuration& c);

 private:
  SchedulerKind kind_;
  Rng rng_;
};

// Precomputed symmetry-preserving execution from c0 to an output-stable
// configuration. achieved_min_symmetry is measured by replaying the steps.
struct Schedule {
  std::string name;
  Configuration initial;
  std::vector<ParallelStep> steps;
  Configuration terminal;
  Count achieved_min_symmetry = 0;
  std::map<std::string, std::string> notes;
};

// Group gathering in lockstep, then the alarm seeding step and its one-step
// eliminations. c0 must be supported on {q0, q1}.
Schedule script_count_to_x(unsigned x, const Configuration& c0);

// Two-phase gathering/dissemination schedule for the positive threshold
// protocol; c0 must be supported on its initial states.
Schedule script_positive_lc(const std::vector<unsigned>& coefficients, unsigned threshold, const Configuration& c0);

// c0 supported on {l_1, l_m1}.
Schedule script_majority(const Configuration& c0);

// Supported shapes: Na = Nb, or |Na - Nb| = 1 with n >= 2k(k+1). Anything else
// raises UnsupportedCase.
Schedule script_k_majority(unsigned k, const Configuration& c0);

}  // namespace popsym
