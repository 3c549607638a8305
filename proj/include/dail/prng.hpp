#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace dail {

/// Seeded deterministic generator. Identical seeds give identical streams;
/// one instance per logical stream, never shared across owners.
/// The algorithm name goes into run metadata so runs are self-describing.
class Prng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64+box-muller";

  explicit Prng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform draw in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes exactly two uniform draws.
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Uniform integer in [0, n); n must be positive. Rejection sampled.
  std::uint64_t below(std::uint64_t n);

  /// Fisher-Yates shuffle; stable across standard libraries.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

/// Derives an independent stream seed from a base seed (splitmix64 mixing).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t step);

}  // namespace dail
