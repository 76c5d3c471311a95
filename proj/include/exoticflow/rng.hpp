#pragma once

#include <cstdint>
#include <limits>

#include "exoticflow/types.hpp"

namespace exoticflow::rng {

// SplitMix64 as a UniformRandomBitGenerator. Seeded per draw from a hashed
// counter key so every random number is a function of its key alone.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t state_;
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b);
std::uint64_t key(std::uint64_t seed, std::uint64_t i, std::uint64_t j = 0, std::uint64_t salt = 0);

// Standard normal draw determined by key.
double normal(std::uint64_t k);

// Sub-seed for ensemble member `index` (seed ⊕ index, then mixed).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Uniform point on S^{dim-1} ⊂ R^dim via a normalized Gaussian vector.
Vec uniform_sphere(int dim, std::uint64_t seed, std::uint64_t index);

}  // namespace exoticflow::rng
