#pragma once

#include <algorithm>
#include <cmath>

#include "bsp/types.hpp"

namespace bsp {

enum class ObstacleShape { Disk, Square };

/// Static obstacle. Disk uses the 2-norm, Square the inf-norm; the safe
/// space is the complement of the obstacle union.
struct Obstacle {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 1.0;
  ObstacleShape shape = ObstacleShape::Disk;
};

inline double obstacle_norm(const Obstacle& o, const Eigen::Vector2d& v) {
  return o.shape == ObstacleShape::Disk ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

/// True iff the agent-position block of x lies strictly outside the
/// obstacle. The boundary counts as collision.
inline bool in_safe_space(const StateVec& x, const Obstacle& o) {
  if (x.size() < 2) throw ConfigError("in_safe_space: state needs a 2-D agent block");
  return obstacle_norm(o, x.head<2>() - o.center) > o.radius;
}

/// Penetration depth of the agent position into the obstacle: zero exactly
/// on the safe set, r^o - ||x - x^o|| inside.
inline double penetration_depth(const StateVec& x, const Obstacle& o) {
  if (x.size() < 2) throw ConfigError("penetration_depth: state needs a 2-D agent block");
  return std::max(0.0, o.radius - obstacle_norm(o, x.head<2>() - o.center));
}

}  // namespace bsp
