#ifndef MIXFILT_RNG_HPP
#define MIXFILT_RNG_HPP

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace mixfilt {

// splitmix64 step; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded generator with explicit double conversions so that identical seeds
// give identical streams on every platform (std:: distributions are not
// portable across library implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Substream k of a master seed: seed' = splitmix64(seed ^ (k+1)).
  static Rng substream(std::uint64_t seed, std::uint64_t k) {
    return Rng(splitmix64(seed ^ (k + 1)));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1].
  double uniform_positive() { return 1.0 - uniform(); }

  // Standard normal via Box-Muller (no cached spare, so the stream position
  // is a pure function of the number of calls).
  double normal();

  // Index in [0, weights.size()) with the given probabilities.
  std::size_t pick(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace mixfilt

#endif
