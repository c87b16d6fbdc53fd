#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bsp {

// World-distance vectors. Navigation states are 2-D, tracking states are
// 4-D (agent block followed by target block). Observations are 2-D or 4-D
// (beacon reading, plus relative reading for tracking).
using StateVec = Eigen::VectorXd;
using ActionVec = Eigen::VectorXd;
using ObservationVec = Eigen::VectorXd;

/// Invalid configuration or argument (dimension mismatch, bad flag value).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Particle filter update where every likelihood vanished.
struct DegenerateBelief : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every particle of a belief lies in unsafe space (r_b = 1).
struct AllUnsafe : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// outer_estimate asked for before all laces were expanded.
struct IncompleteExpansion : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace bsp
