#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace bsp {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Key into the deterministic stream tree. Child keys are derived by hashing,
/// so any (seed, structural path) pair names the same stream on every run,
/// independent of how much randomness sibling branches consumed.
struct StreamKey {
  std::uint64_t v = 0;

  constexpr StreamKey child(std::uint64_t tag) const noexcept {
    return StreamKey{splitmix64(v ^ splitmix64(tag ^ 0x517cc1b727220a95ull))};
  }
  constexpr StreamKey child(std::uint64_t a, std::uint64_t b) const noexcept {
    return child(a).child(b);
  }
};

/// Deterministic random stream. Ops consume it linearly; planners and the
/// simulation derive independent substreams via fork()/StreamKey.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_{seed}, eng_(splitmix64(splitmix64(seed))) {}
  explicit RandomStream(StreamKey key) : RandomStream(key.v) {}

  StreamKey key() const noexcept { return key_; }

  RandomStream fork(std::uint64_t tag) const { return RandomStream(key_.child(tag)); }
  RandomStream fork(std::uint64_t a, std::uint64_t b) const { return RandomStream(key_.child(a, b)); }

  double uniform01() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(eng_);
  }

  /// Marsaglia polar method with a cached spare; the draw sequence is a pure
  /// function of the stream key and call order.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  Eigen::VectorXd normal_vec(Eigen::Index d) {
    Eigen::VectorXd out(d);
    for (Eigen::Index i = 0; i < d; ++i) out[i] = normal();
    return out;
  }

  /// Index draw proportional to the (normalized) weight vector.
  int pick_weighted(const Eigen::VectorXd& weights) {
    const double u = uniform01();
    double acc = 0.0;
    const Eigen::Index n = weights.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(n - 1);
  }

  std::mt19937_64& engine() noexcept { return eng_; }

 private:
  StreamKey key_;
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bsp
