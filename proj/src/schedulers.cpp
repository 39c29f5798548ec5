#include "popsym/schedulers.hpp"

#include <algorithm>
#include <limits>
#include <optional>

#include "popsym/dsl.hpp"

namespace popsym {

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw InvalidInput("empty range");
  // Rejection sampling: discard the low partial bucket.
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % bound;
  }
}

std::string scheduler_name(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::sequential_random: return "seq";
    case SchedulerKind::random_maximum_matching: return "maxmatch";
    case SchedulerKind::random_maximal_matching: return "maximal";
  }
  return "?";
}

SchedulerKind parse_scheduler(const std::string& name) {
  if (name == "seq") return SchedulerKind::sequential_random;
  if (name == "maxmatch") return SchedulerKind::random_maximum_matching;
  if (name == "maximal") return SchedulerKind::random_maximal_matching;
  throw InvalidInput("unknown scheduler '" + name + "'");
}

namespace {

StateId state_of_node(const Configuration& c, std::uint64_t node) {
  for (StateId q = 0; q < c.num_states(); ++q) {
    if (node < c[q]) return q;
    node -= c[q];
  }
  throw InvalidInput("node index out of range");
}

void require_pairable(const Configuration& c) {
  if (c.population() < 2) throw InvalidInput("a step needs at least 2 nodes");
}

}  // namespace

ParallelStep next_step_sequential(const Configuration& c, Rng& rng) {
  require_pairable(c);
  const std::uint64_t n = c.population();
  const std::uint64_t u = rng.below(n);
  std::uint64_t v = rng.below(n - 1);
  if (v >= u) ++v;
  return ParallelStep::single({state_of_node(c, u), state_of_node(c, v)});
}

ParallelStep next_step_random_maximum_matching(const Configuration& c, Rng& rng) {
  require_pairable(c);
  std::vector<StateId> slots;
  slots.reserve(c.population());
  for (StateId q = 0; q < c.num_states(); ++q) slots.insert(slots.end(), c[q], q);
  for (std::size_t i = slots.size() - 1; i > 0; --i) std::swap(slots[i], slots[rng.below(i + 1)]);
  std::vector<Application> apps;
  apps.reserve(slots.size() / 2);
  for (std::size_t i = 0; i + 1 < slots.size(); i += 2) apps.push_back({{slots[i], slots[i + 1]}, 1});
  return ParallelStep(std::move(apps));
}

ParallelStep next_step_random_maximal_matching(const Configuration& c, Rng& rng) {
  return next_step_random_maximum_matching(c, rng);
}

ParallelStep RandomScheduler::next(const Configuration& c) {
  switch (kind_) {
    case SchedulerKind::sequential_random: return next_step_sequential(c, rng_);
    case SchedulerKind::random_maximum_matching: return next_step_random_maximum_matching(c, rng_);
    case SchedulerKind::random_maximal_matching: return next_step_random_maximal_matching(c, rng_);
  }
  throw InvalidInput("unknown scheduler kind");
}

namespace {

// Accumulates validated steps against a running configuration.
class ScriptBuilder {
 public:
  ScriptBuilder(const Protocol& p, Configuration c0) : p_(p), initial_(c0), current_(std::move(c0)) {}

  Count count(StateId q) const { return current_[q]; }
  const Configuration& current() const { return current_; }

  void step(std::vector<Application> apps) {
    std::erase_if(apps, [](const Application& a) { return a.multiplicity == 0; });
    if (apps.empty()) return;
    ParallelStep s(std::move(apps));
    current_ = apply_step(p_, current_, s);
    steps_.push_back(std::move(s));
  }
  void step(StatePair pair, Count times) { step(std::vector<Application>{{pair, times}}); }

  // Sequential infection by d of each other state in turn until d is at least
  // as numerous, then one wipe-out step. Requires (d, s) -> (d, d).
  void disseminate(StateId d, std::vector<StateId> order = {}) {
    for (StateId q = 0; q < p_.num_states(); ++q)
      if (std::find(order.begin(), order.end(), q) == order.end()) order.push_back(q);
    for (StateId s : order) {
      if (s == d || count(s) == 0) continue;
      if (p_.delta(d, s) != StatePair{d, d})
        throw InvalidInput("state '" + p_.state_name(d) + "' does not infect '" + p_.state_name(s) + "'");
      while (count(d) < count(s)) step({d, s}, 1);
      step({d, s}, count(s));
    }
  }

  Schedule finish(std::string name) && {
    ExecutionTrace trace(p_, initial_, steps_);
    Schedule out{std::move(name), initial_, std::move(steps_), trace.terminal(), trace.min_symmetry(), {}};
    return out;
  }

 private:
  const Protocol& p_;
  Configuration initial_;
  Configuration current_;
  std::vector<ParallelStep> steps_;
};

void require_support(const Protocol& p, const Configuration& c0, const std::vector<StateId>& allowed) {
  if (c0.num_states() != p.num_states())
    throw InvalidInput("configuration has " + std::to_string(c0.num_states()) + " states, protocol has " +
                       std::to_string(p.num_states()));
  for (StateId q : c0.support())
    if (std::find(allowed.begin(), allowed.end(), q) == allowed.end())
      throw InvalidInput("state '" + p.state_name(q) + "' is not allowed in the initial configuration");
}

Count ceil_div(Count a, Count b) { return (a + b - 1) / b; }

}  // namespace

Schedule script_count_to_x(unsigned x, const Configuration& c0) {
  const Protocol p = gen_count_to_x(x);
  require_support(p, c0, {0, 1});
  ScriptBuilder b(p, c0);
  const Count n1 = c0[1];
  const StateId alarm = x;

  if (x == 1) {
    // q1 is already the alarm; infect the q0s without dropping below N_min.
    if (n1 > 0) b.disseminate(alarm);
    return std::move(b).finish("count_to_x");
  }
  if (n1 < x) return std::move(b).finish("count_to_x");  // sum < x: c0 is stable

  if (x == 2) {
    // q1 doubles as q_{x-1}. Pair everything when N1 is even; otherwise seed
    // ceil(N1/4) alarm pairs so the alarms outnumber the remaining q1s.
    if (n1 % 2 == 0) {
      b.step({1, 1}, n1 / 2);
    } else {
      b.step({1, 1}, ceil_div(n1, 4));
      b.step({1, alarm}, b.count(1));
    }
    b.disseminate(alarm);
    return std::move(b).finish("count_to_x");
  }

  const Count groups = n1 / x;
  const Count residue = n1 % x;
  // One accumulator per group walks q1 -> q2 -> ... -> q_{x-1}.
  for (StateId i = 1; i + 1 < x; ++i) b.step({i, 1}, groups);
  // Least y with 3y >= groups + residue, but rounding up can leave too few
  // q_{x-1}; also try a few smaller y and keep the best replay.
  const Count y0 = std::min(groups, ceil_div(groups + residue, 3));
  std::optional<Schedule> best;
  Count y = y0;
  for (Count cand = y0 > 3 ? y0 - 3 : 1; cand <= y0; ++cand) {
    ScriptBuilder trial = b;
    trial.step({1, x - 1}, cand);
    trial.disseminate(alarm, {1, x - 1});
    auto s = std::move(trial).finish("count_to_x");
    if (!best || s.achieved_min_symmetry > best->achieved_min_symmetry) {
      best = std::move(s);
      y = cand;
    }
  }
  auto s = std::move(*best);
  s.notes["groups"] = std::to_string(groups);
  s.notes["residue"] = std::to_string(residue);
  s.notes["alarm_pairs"] = std::to_string(y);
  return s;
}

Schedule script_positive_lc(const std::vector<unsigned>& coefficients, unsigned threshold,
                            const Configuration& c0) {
  const Protocol p = gen_positive_linear_combination(coefficients, threshold);
  require_support(p, c0, p.initial_states());
  ScriptBuilder b(p, c0);
  const StateId alarm = threshold;

  std::uint64_t weighted = 0;
  for (StateId q = 0; q < c0.num_states(); ++q) weighted += static_cast<std::uint64_t>(q) * c0[q];

  if (c0[alarm] > 0) {
    b.disseminate(alarm);
    return std::move(b).finish("positive_lc");
  }
  if (weighted < threshold) return std::move(b).finish("positive_lc");  // q_c unreachable

  const std::vector<StateId> present = c0.support();
  Count weight = 0;
  for (StateId q : present) weight += q;
  const Count copies = ceil_div(threshold, weight);  // x in the group construction
  StateId min_state = present.front();
  for (StateId q : present)
    if (c0[q] < c0[min_state]) min_state = q;
  const Count nmin = c0[min_state];
  const Count rmin = nmin % copies;
  Count kept = ceil_div(nmin + rmin, copies + 1) - 1;
  kept = std::min(kept, nmin / copies);

  // Group members in absorption order: the accumulator is the first copy of
  // the lowest present state.
  std::vector<StateId> members;
  if (kept > 0) {
    for (StateId q : present) members.insert(members.end(), copies, q);
  } else {
    for (StateId q : present) members.insert(members.end(), c0[q], q);
  }
  const Count lanes = kept > 0 ? kept : 1;
  StateId acc = members.front();
  for (std::size_t i = 1; i < members.size(); ++i) {
    const StateId m = members[i];
    b.step({acc, m}, lanes);
    if (acc + m >= threshold) break;
    acc += m;
  }
  b.disseminate(alarm);
  auto s = std::move(b).finish("positive_lc");
  s.notes["groups"] = std::to_string(kept);
  s.notes["copies_per_state"] = std::to_string(copies);
  if (kept == 0) s.notes["degenerate_single_group"] = "true";
  return s;
}

Schedule script_majority(const Configuration& c0) {
  const Protocol p = gen_majority();
  constexpr StateId l1 = 0, lm1 = 1, fm1 = 3;
  require_support(p, c0, {l1, lm1});
  ScriptBuilder b(p, c0);
  const Count na = c0[l1], nb = c0[lm1];
  if (na == 0 || nb == 0) return std::move(b).finish("majority");

  const Count m = std::min(na, nb);
  const Count d = na > nb ? na - nb : nb - na;
  b.step({l1, lm1}, m);
  // A tie leaves only (f,-1); a b-majority leaves (l,-1) and (f,-1): both stable.
  if (na <= nb) return std::move(b).finish("majority");

  if (d >= m) {
    b.step({l1, fm1}, m);
    b.step({l1, fm1}, m);
  } else {
    b.step({l1, fm1}, d);
    while (b.count(fm1) > d) b.step({l1, fm1}, 1);
    b.step({l1, fm1}, d);
  }
  return std::move(b).finish("majority");
}

Schedule script_k_majority(unsigned k, const Configuration& c0) {
  const Protocol p = gen_k_majority(k);
  const int K = static_cast<int>(k);
  auto leader = [K](int v) { return static_cast<StateId>(v + K); };
  auto follower = [K](int v) { return static_cast<StateId>(3 * K + 1 + v); };
  require_support(p, c0, {leader(K), leader(-K)});
  ScriptBuilder b(p, c0);
  const Count na = c0[leader(K)], nb = c0[leader(-K)];
  const std::uint64_t n = c0.population();

  if (na == nb) {
    b.step({leader(K), leader(-K)}, na);
    return std::move(b).finish("k_majority");
  }
  const Count diff = na > nb ? na - nb : nb - na;
  const std::uint64_t needed = 2ull * k * (k + 1);
  if (diff != 1 || n < needed)
    throw UnsupportedCase("k_majority schedule covers Na = Nb or |Na - Nb| = 1 with n >= " +
                          std::to_string(needed) + "; got Na=" + std::to_string(na) + ", Nb=" + std::to_string(nb));

  const int s = na > nb ? 1 : -1;  // sign of the majority
  const StateId major = leader(s * K), minor = leader(-s * K);
  const Count nminor = std::min(na, nb);

  b.step({major, minor}, ceil_div(k, 2));
  // Keep k+1 majority and k minority leaders; cancel the rest.
  b.step({major, minor}, nminor - ceil_div(k, 2) - k);
  // Lockstep unfolding of every leader's count into unit leaders.
  for (int v = K; v >= 2; --v)
    b.step({{{leader(s * v), follower(0)}, k + 1}, {{leader(-s * v), follower(0)}, k}});
  b.step({leader(1), leader(-1)}, k * k);
  if (s < 0) return std::move(b).finish("k_majority");

  // k unit leaders remain; spread output 1 over the (f,0)s.
  b.step({leader(1), follower(0)}, k);
  while (b.count(follower(0)) > k) b.step({leader(1), follower(0)}, 1);
  b.step({leader(1), follower(0)}, k);
  return std::move(b).finish("k_majority");
}

}  // namespace popsym
