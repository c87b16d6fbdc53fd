#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <vector>

#include "bsp/belief.hpp"
#include "bsp/obstacle.hpp"
#include "bsp/random.hpp"
#include "bsp/scenario.hpp"

namespace bsp {

/// Minimal surface the planners need from a world model. The benchmark
/// scenarios satisfy it through ScenarioModel; test rigs provide their own
/// implementations (discrete chains, 1-D Gaussians).
template <class M>
concept BeliefModel = requires(const M m, const StateVec& x, const ActionVec& a,
                               const ObservationVec& z, const ParticleBelief& b,
                               RandomStream& rng) {
  { m.num_actions() } -> std::convertible_to<int>;
  { m.action(0, 0) } -> std::convertible_to<ActionVec>;
  { m.transition_sample(x, a, rng) } -> std::convertible_to<StateVec>;
  { m.observation_sample(x, rng) } -> std::convertible_to<ObservationVec>;
  { m.observation_logdensity(z, x) } -> std::convertible_to<double>;
  { m.state_safe(x) } -> std::convertible_to<bool>;
  { m.rho(b) } -> std::convertible_to<double>;
};

inline double prob_safe(const ParticleBelief& b, const Obstacle& o) {
  return prob_safe_if(b, [&](const auto& x) { return in_safe_space(x, o); });
}

template <BeliefModel M>
double prob_safe(const ParticleBelief& b, const M& model) {
  return prob_safe_if(b, [&](const auto& x) { return model.state_safe(x); });
}

inline SafeProjectionResult safe_projection(const ParticleBelief& b, const Obstacle& o,
                                            RandomStream& rng) {
  return safe_projection_if(b, [&](const auto& x) { return in_safe_space(x, o); }, rng);
}

template <BeliefModel M>
SafeProjectionResult safe_projection(const ParticleBelief& b, const M& model, RandomStream& rng) {
  return safe_projection_if(b, [&](const auto& x) { return model.state_safe(x); }, rng);
}

namespace detail {

inline double iso_gaussian_logdensity(double sq_norm, int dim, double variance) {
  return -0.5 * (dim * std::log(2.0 * std::numbers::pi * variance) + sq_norm / variance);
}

}  // namespace detail

/// Continuous-space model for the two benchmark problems: Gaussian motion
/// x' = x + a + eta, beacon-distance-scaled observation noise, and the
/// squared-distance state reward averaged over the belief.
class ScenarioModel {
 public:
  explicit ScenarioModel(Scenario scenario) : sc_(std::move(scenario)) {
    sc_.validate();
    build_actions();
  }

  const Scenario& scenario() const { return sc_; }
  ScenarioKind kind() const { return sc_.kind; }
  int state_dim() const { return sc_.state_dim(); }
  int obs_dim() const { return sc_.obs_dim(); }
  const std::vector<Obstacle>& obstacles() const { return sc_.obstacles; }
  const Eigen::Vector2d& goal() const { return sc_.goal; }
  const NoiseParams& noise() const { return sc_.noise; }

  /// Script phase of the tracking target at planning time k (advanced by the
  /// simulation loop each executed step). No effect for navigation.
  void set_script_phase(int phase) { script_phase_ = phase; }
  int script_phase() const { return script_phase_; }

  int num_actions() const { return 9; }
  int null_action_index() const { return 8; }

  /// Full action vector for primitive `idx` at `depth` steps ahead of the
  /// current script phase; tracking appends the scripted target move.
  ActionVec action(int idx, int depth) const {
    if (idx < 0 || idx >= num_actions()) throw ConfigError("action index out of range");
    if (sc_.kind == ScenarioKind::Navigation) return primitives_[idx];
    ActionVec a(4);
    a.head<2>() = primitives_[idx].head<2>();
    const auto& script = sc_.target_script;
    a.tail<2>() = script[static_cast<std::size_t>(script_phase_ + depth) % script.size()];
    return a;
  }

  StateVec transition_sample(const StateVec& x, const ActionVec& a, RandomStream& rng) const {
    if (x.size() != state_dim() || a.size() != state_dim())
      throw ConfigError("transition_sample: dimension mismatch");
    StateVec out(x.size());
    transition_sample_inplace(x, a, rng, out);
    return out;
  }

  template <class In, class Out>
  void transition_sample_inplace(const In& x, const ActionVec& a, RandomStream& rng,
                                 Out&& out) const {
    const double sigma_w = std::sqrt(sc_.noise.sigma_w_sq);
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = x[i] + a[i] + sigma_w * rng.normal();
  }

  double transition_logdensity(const StateVec& next, const StateVec& x, const ActionVec& a) const {
    return detail::iso_gaussian_logdensity((next - x - a).squaredNorm(),
                                           static_cast<int>(next.size()), sc_.noise.sigma_w_sq);
  }

  ObservationVec observation_sample(const StateVec& x, RandomStream& rng) const {
    if (x.size() != state_dim()) throw ConfigError("observation_sample: dimension mismatch");
    ObservationVec z(obs_dim());
    const double sb = std::sqrt(beacon_variance(x.head<2>()));
    z[0] = x[0] + sb * rng.normal();
    z[1] = x[1] + sb * rng.normal();
    if (sc_.kind == ScenarioKind::Tracking) {
      const double sr = std::sqrt(relative_variance(x));
      z[2] = (x[0] - x[2]) + sr * rng.normal();
      z[3] = (x[1] - x[3]) + sr * rng.normal();
    }
    return z;
  }

  double observation_logdensity(const ObservationVec& z, const StateVec& x) const {
    if (z.size() != obs_dim() || x.size() != state_dim())
      throw ConfigError("observation_logdensity: dimension mismatch");
    double ld = detail::iso_gaussian_logdensity((z.head<2>() - x.head<2>()).squaredNorm(), 2,
                                                beacon_variance(x.head<2>()));
    if (sc_.kind == ScenarioKind::Tracking)
      ld += detail::iso_gaussian_logdensity(
          (z.tail<2>() - (x.head<2>() - x.tail<2>())).squaredNorm(), 2, relative_variance(x));
    return ld;
  }

  /// The target is excluded on purpose: it flies above obstacles.
  bool state_safe(const StateVec& x) const {
    for (const auto& o : sc_.obstacles)
      if (!in_safe_space(x, o)) return false;
    return true;
  }

  double rho(const ParticleBelief& b) const {
    double r = 0.0;
    if (sc_.kind == ScenarioKind::Navigation) {
      for (int i = 0; i < b.count(); ++i)
        r -= b.weights[i] * (b.states.col(i).head<2>() - sc_.goal).squaredNorm();
    } else {
      for (int i = 0; i < b.count(); ++i)
        r -= b.weights[i] * (b.states.col(i).head<2>() - b.states.col(i).tail<2>()).squaredNorm();
    }
    return r;
  }

  /// Distance-scaled beacon covariance: sigma_w^2 * min_i d_i outside r_min,
  /// the sigma_v^2 floor inside.
  double beacon_variance(const Eigen::Vector2d& agent) const {
    double dmin_sq = std::numeric_limits<double>::infinity();
    for (const auto& bpos : sc_.beacons)
      dmin_sq = std::min(dmin_sq, (agent - bpos).squaredNorm());
    const double dmin = std::sqrt(dmin_sq);
    return dmin >= sc_.noise.r_min ? sc_.noise.sigma_w_sq * dmin : sc_.noise.sigma_v_sq;
  }

  double relative_variance(const StateVec& x) const {
    const double d = (x.head<2>() - x.tail<2>()).norm();
    return d >= sc_.noise.r_min ? sc_.noise.sigma_w_sq * d : sc_.noise.sigma_v_sq;
  }

 private:
  void build_actions() {
    const double s = std::numbers::sqrt2 / 2.0;
    const double dirs[9][2] = {{1, 0}, {s, s},   {0, 1},  {-s, s}, {-1, 0},
                               {-s, -s}, {0, -1}, {s, -s}, {0, 0}};
    for (int i = 0; i < 9; ++i) {
      primitives_[i] = Eigen::Vector2d(dirs[i][0], dirs[i][1]);
    }
  }

  Scenario sc_;
  int script_phase_ = 0;
  Eigen::Vector2d primitives_[9];
};

static_assert(BeliefModel<ScenarioModel>);

/// Initial belief: m_x draws from the Gaussian prior.
inline ParticleBelief sample_prior(const Scenario& sc, int m_x, RandomStream& rng) {
  if (m_x < 1) throw ConfigError("sample_prior: m_x must be >= 1");
  Eigen::LLT<Eigen::MatrixXd> llt(sc.prior_cov);
  const Eigen::MatrixXd chol = llt.matrixL();
  Eigen::MatrixXd states(sc.state_dim(), m_x);
  for (int i = 0; i < m_x; ++i)
    states.col(i) = sc.prior_mean + chol * rng.normal_vec(sc.state_dim());
  return ParticleBelief::equal_weights(std::move(states));
}

}  // namespace bsp
