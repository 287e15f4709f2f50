#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace scorelab {

// SplitMix64 finalizer. Used to derive independent streams from a master seed.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Sub-seed for sample `index` under `master`. This is the splitting rule used
// by all batch sampling: subseed(master, i) = mix64(master ^ mix64(i + 1)).
inline constexpr std::uint64_t subseed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index + 1));
}

// Seeded generator with the handful of draws the lab needs. State is owned by
// the caller and never shared between threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return uniform_(gen_); }  // [0, 1)
  double normal() { return normal_(gen_); }

  Eigen::VectorXd normal_vec(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal_(gen_);
    return v;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace scorelab
