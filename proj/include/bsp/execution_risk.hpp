#pragma once

#include <span>

#include "bsp/types.hpp"

namespace bsp {

/// One step of the execution-risk recursion:
///   er(b) = r_b + (1 - r_b) * sum_j w_j * er(b_j),
/// with er = 1 by convention when r_b = 1 and er = r_b at leaves (no
/// children). Weights must be normalized.
inline double execution_risk(double node_risk, std::span<const double> child_weights,
                             std::span<const double> child_risks) {
  if (child_weights.size() != child_risks.size())
    throw ConfigError("execution_risk: weight/risk size mismatch");
  if (node_risk >= 1.0) return 1.0;
  double future = 0.0;
  for (std::size_t j = 0; j < child_weights.size(); ++j)
    future += child_weights[j] * child_risks[j];
  return node_risk + (1.0 - node_risk) * future;
}

/// Upper bound on r_b of child i implied by feasibility er <= Delta of the
/// parent (necessary condition only; survivors still need the up-sweep
/// verification):
///   r_b(b_i) <= (1/w_i) * ((Delta - r_b)/(1 - r_b) - sum_{j != i} w_j r_b(b_j)).
inline double cc_prune_bound(std::size_t child_index, std::span<const double> weights,
                             std::span<const double> child_risks, double parent_risk,
                             double Delta) {
  if (weights.size() != child_risks.size() || child_index >= weights.size())
    throw ConfigError("cc_prune_bound: bad arguments");
  if (parent_risk >= 1.0 || !(weights[child_index] > 0.0))
    throw ConfigError("cc_prune_bound: undefined for parent risk 1 or zero weight (prune directly)");
  double others = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (j != child_index) others += weights[j] * child_risks[j];
  return ((Delta - parent_risk) / (1.0 - parent_risk) - others) / weights[child_index];
}

}  // namespace bsp
