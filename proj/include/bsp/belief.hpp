#pragma once

#include <cmath>
#include <utility>

#include "bsp/random.hpp"
#include "bsp/types.hpp"

namespace bsp {

/// Weighted particle set. Beliefs are values: every operation returns a new
/// belief and leaves its input untouched.
struct ParticleBelief {
  Eigen::MatrixXd states;   // dim x count, one particle per column
  Eigen::VectorXd weights;  // nonnegative, normalized to sum 1

  int count() const { return static_cast<int>(states.cols()); }
  int dim() const { return static_cast<int>(states.rows()); }

  Eigen::VectorXd mean() const { return states * weights; }

  Eigen::MatrixXd covariance() const {
    const Eigen::VectorXd mu = mean();
    Eigen::MatrixXd centered = states.colwise() - mu;
    return centered * weights.asDiagonal() * centered.transpose();
  }

  void normalize() {
    const double s = weights.sum();
    if (!(s > 0) || !std::isfinite(s)) throw DegenerateBelief("belief weights sum to zero");
    weights /= s;
  }

  static ParticleBelief equal_weights(Eigen::MatrixXd states_in) {
    ParticleBelief b;
    b.states = std::move(states_in);
    b.weights = Eigen::VectorXd::Constant(b.states.cols(), 1.0 / static_cast<double>(b.states.cols()));
    return b;
  }
};

/// Belief after nullifying unsafe mass. survival_mass is the pre-renormalization
/// safe mass, i.e. 1 - r_b of the input.
struct SafeProjectionResult {
  ParticleBelief belief;
  double survival_mass = 1.0;
};

/// Systematic resampling to `target` equal-weight particles using a single
/// uniform offset.
inline ParticleBelief systematic_resample(const ParticleBelief& b, int target, RandomStream& rng) {
  const double u0 = rng.uniform01();
  ParticleBelief out;
  out.states.resize(b.dim(), target);
  out.weights = Eigen::VectorXd::Constant(target, 1.0 / static_cast<double>(target));
  double cum = b.weights[0];
  int i = 0;
  for (int j = 0; j < target; ++j) {
    const double u = (u0 + j) / static_cast<double>(target);
    while (u > cum && i + 1 < b.count()) cum += b.weights[++i];
    out.states.col(j) = b.states.col(i);
  }
  return out;
}

inline ParticleBelief systematic_resample(const ParticleBelief& b, RandomStream& rng) {
  return systematic_resample(b, b.count(), rng);
}

/// Propagated belief: each particle pushed through the transition model,
/// weights untouched. Models may provide transition_sample_inplace to skip
/// the per-particle temporaries.
template <class Model>
ParticleBelief propagate(const ParticleBelief& b, const ActionVec& a, const Model& model,
                         RandomStream& rng) {
  ParticleBelief out;
  out.states.resize(b.dim(), b.count());
  out.weights = b.weights;
  for (int i = 0; i < b.count(); ++i) {
    if constexpr (requires {
                    model.transition_sample_inplace(b.states.col(i), a, rng, out.states.col(i));
                  }) {
      model.transition_sample_inplace(b.states.col(i), a, rng, out.states.col(i));
    } else {
      out.states.col(i) = model.transition_sample(b.states.col(i), a, rng);
    }
  }
  return out;
}

/// Bayes reweighting of an already-propagated belief by the observation
/// likelihood. No resampling; exposes the raw posterior weights.
template <class Model>
ParticleBelief bayes_reweight(const ParticleBelief& propagated, const ObservationVec& z,
                              const Model& model) {
  ParticleBelief out;
  out.states = propagated.states;
  Eigen::VectorXd logw(propagated.count());
  for (int i = 0; i < propagated.count(); ++i)
    logw[i] = model.observation_logdensity(z, propagated.states.col(i));
  const double mx = logw.maxCoeff();
  if (!std::isfinite(mx)) throw DegenerateBelief("all observation likelihoods vanished");
  out.weights = propagated.weights.array() * (logw.array() - mx).exp();
  out.normalize();
  return out;
}

/// Particle-filter belief update psi(b, a, z): propagate, reweight by the
/// observation likelihood, normalize, resample back to equal weights.
template <class Model>
ParticleBelief pf_update(const ParticleBelief& b, const ActionVec& a, const ObservationVec& z,
                         const Model& model, RandomStream& rng) {
  ParticleBelief prop = propagate(b, a, model, rng);
  ParticleBelief post = bayes_reweight(prop, z, model);
  return systematic_resample(post, rng);
}

/// Weighted probability mass on safe states under a predicate x -> bool.
template <class SafePred>
double prob_safe_if(const ParticleBelief& b, SafePred&& safe) {
  double p = 0.0;
  for (int i = 0; i < b.count(); ++i)
    if (safe(b.states.col(i))) p += b.weights[i];
  return p;
}

/// Nullify unsafe mass, renormalize and resample to the input particle
/// count. Identity (no resampling) when every particle is already safe.
template <class SafePred>
SafeProjectionResult safe_projection_if(const ParticleBelief& b, SafePred&& safe,
                                        RandomStream& rng) {
  Eigen::VectorXd masked = b.weights;
  bool any_unsafe = false;
  for (int i = 0; i < b.count(); ++i) {
    if (!safe(b.states.col(i))) {
      masked[i] = 0.0;
      any_unsafe = true;
    }
  }
  if (!any_unsafe) return {b, 1.0};
  const double survival = masked.sum();
  if (!(survival > 0)) throw AllUnsafe("belief cannot be made safe: every particle is unsafe");
  ParticleBelief safe_b;
  safe_b.states = b.states;
  safe_b.weights = masked / survival;
  return {systematic_resample(safe_b, rng), survival};
}

}  // namespace bsp
