#ifndef FERES_RANDOM_HPP
#define FERES_RANDOM_HPP

#include <cstdint>
#include <random>

namespace feres {

/// Generator used for every simulation. mt19937_64's output sequence is fixed by the
/// standard, so runs are reproducible across platforms.
using Rng = std::mt19937_64;

/// Streams derived from one experiment seed. Each consumer gets its own stream so that
/// adding draws in one place never shifts the sequence seen by another.
enum class Stream : std::uint64_t {
  trajectory = 0,
  ensemble = 1,
  skew = 2,
  product_measure = 3,
  pipeline = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream `stream` of experiment `seed`: splitmix64(seed ^ splitmix64(stream)).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
  return derive_seed(seed, static_cast<std::uint64_t>(stream));
}

inline Rng make_rng(std::uint64_t seed, Stream stream) { return Rng(derive_seed(seed, stream)); }

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
/// std::uniform_real_distribution is implementation-defined, so it is avoided here.
template <class URBG>
double uniform01(URBG& rng) {
  static_assert(URBG::max() - URBG::min() == ~std::uint64_t{0}, "needs a full 64-bit generator");
  const std::uint64_t bits = static_cast<std::uint64_t>(rng() - URBG::min());
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace feres

#endif  // FERES_RANDOM_HPP
