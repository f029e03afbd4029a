#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "snd/tensor.hpp"

namespace snd {

// Portable seeded generator shared by every stochastic component.
//
// Algorithm (all fixtures depend on it):
//   * state: xoshiro256** (Blackman & Vigna), four 64-bit words, seeded by
//     running splitmix64 four times from the 64-bit seed;
//   * uniform01(): (next() >> 11) * 2^-53, a double in [0, 1);
//   * gaussian(): Box-Muller on u1 = 1 - uniform01() in (0, 1] and
//     u2 = uniform01(); both outputs are used, the sine branch is cached
//     for the following call;
//   * gamma(): Marsaglia-Tsang squeeze method, with the
//     gamma(a) = gamma(a + 1) * U^(1/a) boost for a < 1;
//   * beta(a, b) = X / (X + Y), X ~ gamma(a), Y ~ gamma(b).
// Only <cmath> sqrt/log/cos/sin/pow are used, so sequences are identical on
// every IEEE-754 platform with a correctly rounded libm.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0);

  // Independent stream for (master seed, index), e.g. one per grid cell.
  static SeededRng derive(std::uint64_t master, std::uint64_t index);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  double uniform01();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  double gaussian();
  double gaussian(double mean, double stddev);
  double gamma(double shape);
  double beta(double a, double b);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  std::optional<double> spare_;
};

std::uint64_t splitmix64(std::uint64_t& state);

// d independent N(0, sigma^2) draws. sigma == 0 yields exact zeros without
// consuming randomness. Negative sigma throws ParameterError.
Vec sample_gaussian(SeededRng& rng, std::size_t d, double sigma);

// Uniform direction on the unit sphere in R^d.
Vec sample_unit_sphere(SeededRng& rng, std::size_t d);

// Random permutation of 0..n-1.
std::vector<std::size_t> random_permutation(SeededRng& rng, std::size_t n);

}  // namespace snd
