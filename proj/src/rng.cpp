#include "exoticflow/rng.hpp"

#include <random>

namespace exoticflow::rng {

SplitMix64::result_type SplitMix64::operator()() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (b * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull));
  g();
  return g();
}

std::uint64_t key(std::uint64_t seed, std::uint64_t i, std::uint64_t j, std::uint64_t salt) {
  return mix(mix(mix(seed, salt), i), j);
}

double normal(std::uint64_t k) {
  SplitMix64 g(k);
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(g);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) { return mix(seed ^ index, 0x5EEDull); }

Vec uniform_sphere(int dim, std::uint64_t seed, std::uint64_t index) {
  Vec z(dim);
  double nrm = 0.0;
  // Resample (with a bumped salt) in the measure-zero event of a zero vector.
  for (std::uint64_t salt = 0; nrm == 0.0; ++salt) {
    for (int i = 0; i < dim; ++i) z[i] = normal(key(seed, index, static_cast<std::uint64_t>(i), 0xA5A5 + salt));
    nrm = z.norm();
  }
  return z / nrm;
}

}  // namespace exoticflow::rng
