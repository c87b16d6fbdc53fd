#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "bsp/belief.hpp"
#include "bsp/model.hpp"

namespace bsp {

namespace detail {

/// Log mixture density log sum_i w_i * p_Z(z | x'_i), optionally masking
/// particles by their parent safety indicator. Returns -inf for zero mass.
template <class Model>
double mixture_obs_logdensity(const ObservationVec& z, const Eigen::VectorXd& parent_weights,
                              const Eigen::MatrixXd& propagated_states,
                              const std::vector<char>* safe_mask, const Model& model) {
  const int n = static_cast<int>(propagated_states.cols());
  double mx = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd logd(n);
  for (int i = 0; i < n; ++i) {
    if (safe_mask && !(*safe_mask)[static_cast<std::size_t>(i)]) {
      logd[i] = -std::numeric_limits<double>::infinity();
      continue;
    }
    logd[i] = model.observation_logdensity(z, propagated_states.col(i));
    mx = std::max(mx, logd[i]);
  }
  if (!std::isfinite(mx)) return -std::numeric_limits<double>::infinity();
  double mass = 0.0, s = 0.0;
  for (int i = 0; i < n; ++i) {
    if (safe_mask && !(*safe_mask)[static_cast<std::size_t>(i)]) continue;
    mass += parent_weights[i];
    s += parent_weights[i] * std::exp(logd[i] - mx);
  }
  if (!(s > 0.0) || !(mass > 0.0)) return -std::numeric_limits<double>::infinity();
  return std::log(s / mass) + mx;
}

/// Normalized importance weights with the safe-prior law of (bar_parents,
/// bar_propagated) in the numerator and the sampling law of (full_parents,
/// full_propagated) in the denominator. The single-belief entry point below
/// is the special case where both chains coincide.
template <class Model>
Eigen::VectorXd importance_weights_two(std::span<const ObservationVec> z_samples,
                                       const ParticleBelief& bar_parents,
                                       const ParticleBelief& bar_propagated,
                                       const ParticleBelief& full_parents,
                                       const ParticleBelief& full_propagated,
                                       const Model& model) {
  const int n = bar_parents.count();
  std::vector<char> safe(static_cast<std::size_t>(n));
  bool any_safe = false;
  for (int i = 0; i < n; ++i) {
    safe[static_cast<std::size_t>(i)] = model.state_safe(bar_parents.states.col(i)) ? 1 : 0;
    any_safe |= safe[static_cast<std::size_t>(i)] != 0;
  }
  if (!any_safe) throw AllUnsafe("importance weights: every parent particle is unsafe");

  const std::size_t m = z_samples.size();
  Eigen::VectorXd w(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    const double num = mixture_obs_logdensity(z_samples[j], bar_parents.weights,
                                              bar_propagated.states, &safe, model);
    const double den = mixture_obs_logdensity(z_samples[j], full_parents.weights,
                                              full_propagated.states, nullptr, model);
    w[static_cast<Eigen::Index>(j)] =
        (std::isfinite(num) && std::isfinite(den)) ? std::exp(num - den) : 0.0;
  }
  const double s = w.sum();
  if (!(s > 0.0)) throw DegenerateBelief("importance weights: zero total mass");
  return w / s;
}

}  // namespace detail

/// Self-normalized importance weights turning samples of the full-belief
/// observation law P(z | b, a) into the safe-prior law
/// P(z | b, 1{x safe}, a). Parents supply the safety indicators; the
/// propagated belief the likelihood mixture. Weights sum to 1.
template <class Model>
Eigen::VectorXd importance_weights(std::span<const ObservationVec> z_samples,
                                   const ParticleBelief& parents,
                                   const ParticleBelief& propagated, const Model& model) {
  return detail::importance_weights_two(z_samples, parents, propagated, parents, propagated,
                                        model);
}

/// P(z | b, a) of the propagated particle mixture; exposed for the
/// absolute-continuity checks and the IS test rigs.
template <class Model>
double full_obs_logdensity(const ObservationVec& z, const ParticleBelief& parents,
                           const ParticleBelief& propagated, const Model& model) {
  return detail::mixture_obs_logdensity(z, parents.weights, propagated.states, nullptr, model);
}

/// P(z | b, 1{x safe}, a) of the propagated particle mixture.
template <class Model>
double safe_prior_obs_logdensity(const ObservationVec& z, const ParticleBelief& parents,
                                 const ParticleBelief& propagated, const Model& model) {
  const int n = parents.count();
  std::vector<char> safe(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    safe[static_cast<std::size_t>(i)] = model.state_safe(parents.states.col(i)) ? 1 : 0;
  return detail::mixture_obs_logdensity(z, parents.weights, propagated.states, &safe, model);
}

}  // namespace bsp
