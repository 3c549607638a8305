#include "dail/prng.hpp"

#include <limits>
#include <stdexcept>

namespace dail {

std::uint64_t Prng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Prng::below: n must be positive");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t x = gen_();
  while (x >= limit) x = gen_();
  return x % n;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
  return splitmix64(mix_seed(seed, stream) ^ splitmix64(step ^ 0xA5A5A5A5A5A5A5A5ULL));
}

}  // namespace dail
