#pragma once

#include <cmath>
#include <span>
#include <utility>

#include "bsp/types.hpp"

namespace bsp {

enum class ConstraintForm { Cumulative, Multiplicative };

enum class ConstraintOperator { ProbSafe, NegCVaR, InfoGain, ReachGoalProb };

/// Inner/outer constraint description: operator phi, per-belief (or
/// cumulative) threshold delta, outer confidence epsilon, and the
/// chance-constraint depth scaling switch.
struct ConstraintSpec {
  ConstraintForm form = ConstraintForm::Multiplicative;
  ConstraintOperator op = ConstraintOperator::ProbSafe;
  double alpha = 0.95;       // CVaR level, NegCVaR only
  double goal_radius = 0.5;  // goal-region radius, ReachGoalProb only
  double delta = 0.0;
  double epsilon = 0.0;
  bool sc = false;

  void validate() const {
    if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("ConstraintSpec: epsilon must be in [0,1]");
    if (form == ConstraintForm::Multiplicative && op == ConstraintOperator::ProbSafe &&
        (delta < 0.0 || delta > 1.0))
      throw ConfigError("ConstraintSpec: delta must be in [0,1] for multiplicative ProbSafe");
    if (op == ConstraintOperator::NegCVaR && (!(alpha > 0.0) || alpha > 1.0))
      throw ConfigError("ConstraintSpec: CVaR alpha must be in (0,1]");
  }
};

/// Inner constraint c over one lace of phi values. Cumulative form compares
/// the sum with strict > (non-strict >= for the reach-goal variant);
/// multiplicative requires phi >= delta at every belief.
inline int inner_constraint(std::span<const double> phi_values, const ConstraintSpec& spec) {
  if (phi_values.empty()) throw ConfigError("inner_constraint: empty lace");
  if (spec.form == ConstraintForm::Multiplicative) {
    for (double phi : phi_values)
      if (!(phi >= spec.delta)) return 0;
    return 1;
  }
  double sum = 0.0;
  for (double phi : phi_values) sum += phi;
  if (spec.op == ConstraintOperator::ReachGoalProb) return sum >= spec.delta ? 1 : 0;
  return sum > spec.delta ? 1 : 0;
}

/// Lace bookkeeping for the adaptive outer-constraint evaluation: m total
/// laces, n expanded so far, `successes` of them with c = 1.
struct AdaptiveCounter {
  int m = 0;
  int n = 0;
  int successes = 0;

  explicit AdaptiveCounter(int total = 0) : m(total) {
    if (total < 1) throw ConfigError("AdaptiveCounter: m must be >= 1");
  }

  void add(bool c) {
    if (n >= m) throw IncompleteExpansion("AdaptiveCounter: more laces than m");
    ++n;
    if (c) ++successes;
  }

  double lower_bound() const { return static_cast<double>(successes) / m; }
  double upper_bound() const { return static_cast<double>(m - n + successes) / m; }
};

/// Sample approximation of the outer constraint once all m laces are in.
inline double outer_estimate(const AdaptiveCounter& c) {
  if (c.n != c.m) throw IncompleteExpansion("outer_estimate: expansion incomplete");
  return static_cast<double>(c.successes) / c.m;
}

/// n_accept = ceil(m(1-eps)) successes certify acceptance; rejection
/// triggers at failure number floor(m*eps) + 1. Guarded against the usual
/// floating-point off-by-one at exact multiples.
inline std::pair<int, int> accept_reject_counters(int m, double epsilon) {
  if (m < 1) throw ConfigError("accept_reject_counters: m must be >= 1");
  if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("accept_reject_counters: bad epsilon");
  const double guard = 1e-9;
  const int n_accept = static_cast<int>(std::ceil(m * (1.0 - epsilon) - guard));
  const int n_reject = static_cast<int>(std::floor(m * epsilon + guard));
  return {std::max(0, n_accept), std::max(0, n_reject)};
}

enum class AdaptiveDecision { Accept, Reject, Continue };

/// Exact adaptive accept/reject: Accept iff LB >= 1-eps, Reject iff
/// UB < 1-eps. Evaluated in integer form through the counters so the two
/// formulations can never disagree.
inline AdaptiveDecision adaptive_decision(const AdaptiveCounter& c, double epsilon) {
  const auto [n_accept, n_reject] = accept_reject_counters(c.m, epsilon);
  if (c.successes >= n_accept) return AdaptiveDecision::Accept;
  if (c.n - c.successes >= n_reject + 1) return AdaptiveDecision::Reject;
  return AdaptiveDecision::Continue;
}

/// Necessary-and-sufficient pruning test for the multiplicative form at
/// eps = 0: prune exactly when phi(b_child) < delta.
inline bool pc_prune_check(double phi_child, double delta) { return phi_child < delta; }

/// Depth scaling for the chance constraint: with sc on, a subtree with d of
/// L steps remaining faces delta^(d/L), so per-step requirements compose to
/// delta at the root.
inline double scaled_delta(double delta, int depth_remaining, int L, bool sc) {
  if (depth_remaining < 1 || depth_remaining > L) throw ConfigError("scaled_delta: bad depth");
  if (!sc) return delta;
  return std::pow(delta, static_cast<double>(depth_remaining) / static_cast<double>(L));
}

}  // namespace bsp
