#pragma once

#include <cmath>
#include <vector>

#include "bsp/obstacle.hpp"
#include "bsp/types.hpp"

namespace bsp {

enum class ScenarioKind { Navigation, Tracking };

struct NoiseParams {
  double sigma_w_sq = 0.1;   // motion noise variance per axis
  double sigma_v_sq = 0.01;  // observation floor variance inside r_min
  double r_min = 0.01;       // distance below which the floor kicks in
  double gamma = 0.99;       // discount

  void validate() const {
    if (!(sigma_w_sq > 0) || !(sigma_v_sq > 0) || !(r_min > 0))
      throw ConfigError("NoiseParams: variances and r_min must be positive");
    if (!(gamma > 0) || gamma > 1.0) throw ConfigError("NoiseParams: gamma must be in (0,1]");
  }
};

/// World description for the two benchmark problems: beacon field,
/// obstacles, goal (navigation) or scripted target (tracking), noise
/// parameters and the initial belief / ground truth.
struct Scenario {
  ScenarioKind kind = ScenarioKind::Navigation;
  std::vector<Eigen::Vector2d> beacons;
  std::vector<Obstacle> obstacles;
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();          // navigation only
  std::vector<Eigen::Vector2d> target_script;              // tracking only, cyclic
  NoiseParams noise;
  Eigen::VectorXd prior_mean;
  Eigen::MatrixXd prior_cov;
  Eigen::VectorXd ground_truth_init;

  int state_dim() const { return kind == ScenarioKind::Navigation ? 2 : 4; }
  int obs_dim() const { return state_dim(); }

  void validate() const {
    noise.validate();
    if (beacons.empty()) throw ConfigError("Scenario: at least one beacon required");
    for (const auto& o : obstacles)
      if (!(o.radius > 0)) throw ConfigError("Scenario: obstacle radius must be positive");
    const int d = state_dim();
    if (prior_mean.size() != d || ground_truth_init.size() != d)
      throw ConfigError("Scenario: prior mean / ground truth dimension mismatch");
    if (prior_cov.rows() != d || prior_cov.cols() != d)
      throw ConfigError("Scenario: prior covariance dimension mismatch");
    if (!prior_cov.isApprox(prior_cov.transpose(), 1e-12))
      throw ConfigError("Scenario: prior covariance must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(prior_cov);
    if (llt.info() != Eigen::Success)
      throw ConfigError("Scenario: prior covariance must be positive definite");
    if (kind == ScenarioKind::Tracking && target_script.empty())
      throw ConfigError("Scenario: tracking needs a target script");
  }
};

}  // namespace bsp
