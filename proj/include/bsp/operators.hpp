#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <vector>

#include "bsp/belief.hpp"
#include "bsp/model.hpp"
#include "bsp/obstacle.hpp"

namespace bsp {

/// Mixture density floor for the entropy estimator; hits are counted so
/// callers can notice clamping.
inline constexpr double kEntropyDensityFloor = 1e-300;

inline std::atomic<long>& entropy_floor_hits() {
  static std::atomic<long> hits{0};
  return hits;
}

/// VaR_alpha: smallest sample value xi with P(zeta <= xi) >= 1 - alpha.
/// CVaR_alpha: weighted mean of the tail {zeta >= VaR_alpha}.
struct TailRisk {
  double var = 0.0;
  double cvar = 0.0;
};

inline TailRisk weighted_tail_risk(std::vector<std::pair<double, double>> samples, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("tail risk: alpha must be in (0,1]");
  std::sort(samples.begin(), samples.end());
  const double level = 1.0 - alpha;
  double cum = 0.0;
  double var = samples.back().first;
  for (const auto& [value, weight] : samples) {
    cum += weight;
    if (cum >= level) {
      var = value;
      break;
    }
  }
  double tail_mass = 0.0, tail_sum = 0.0;
  for (const auto& [value, weight] : samples) {
    if (value >= var) {
      tail_mass += weight;
      tail_sum += weight * value;
    }
  }
  return {var, tail_mass > 0 ? tail_sum / tail_mass : 0.0};
}

/// CVaR of the obstacle penetration depth dist(x, Y) = max(0, r^o - ||x - x^o||),
/// zero exactly when the whole belief is safe.
inline double cvar_deviation(const ParticleBelief& b, const Obstacle& o, double alpha) {
  std::vector<std::pair<double, double>> zeta(static_cast<std::size_t>(b.count()));
  for (int i = 0; i < b.count(); ++i)
    zeta[static_cast<std::size_t>(i)] = {penetration_depth(b.states.col(i), o), b.weights[i]};
  return weighted_tail_risk(std::move(zeta), alpha).cvar;
}

/// Differential-entropy estimate via the transition-kernel mixture at the
/// null action: H(b) ~ -sum_i w_i log sum_j w_j p_T(x_i | x_j, 0).
template <class Model>
double entropy_estimate(const ParticleBelief& b, const Model& model) {
  const ActionVec null_action = ActionVec::Zero(b.dim());
  const int n = b.count();
  Eigen::VectorXd logk(n);
  double h = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      logk[j] = model.transition_logdensity(b.states.col(i), b.states.col(j), null_action);
    const double mx = logk.maxCoeff();
    double mix = std::isfinite(mx) ? (b.weights.array() * (logk.array() - mx).exp()).sum() *
                     std::exp(mx)
                                   : 0.0;
    if (!(mix >= kEntropyDensityFloor)) {
      mix = kEntropyDensityFloor;
      entropy_floor_hits().fetch_add(1, std::memory_order_relaxed);
    }
    h -= b.weights[i] * std::log(mix);
  }
  return h;
}

/// IG(b, a, z', b') = H(b) - H(b'). The action and observation identify the
/// update that produced b'; the mixture estimator itself only needs the two
/// particle sets.
template <class Model>
double info_gain(const ParticleBelief& b, const ActionVec& /*a*/, const ObservationVec& /*z*/,
                 const ParticleBelief& b_next, const Model& model) {
  return entropy_estimate(b, model) - entropy_estimate(b_next, model);
}

/// Weighted mean squared distance to the goal; equals tr(Sigma) + ||mu - g||^2
/// in expectation.
inline double mean_sq_goal_distance(const ParticleBelief& b, const Eigen::Vector2d& goal) {
  double s = 0.0;
  for (int i = 0; i < b.count(); ++i)
    s += b.weights[i] * (b.states.col(i).head<2>() - goal).squaredNorm();
  return s;
}

/// rho(b): weighted mean of the state reward (negative squared distance to
/// the goal, or to the target for tracking).
inline double state_reward(const ParticleBelief& b, const ScenarioModel& model) {
  return model.rho(b);
}

/// P(x in X^goal | b) for a disk goal region.
inline double reach_goal_prob(const ParticleBelief& b, const Eigen::Vector2d& goal, double radius) {
  double p = 0.0;
  for (int i = 0; i < b.count(); ++i)
    if ((b.states.col(i).head<2>() - goal).norm() <= radius) p += b.weights[i];
  return p;
}

}  // namespace bsp
