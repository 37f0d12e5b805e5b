#ifndef QEGBS_RNG_HPP_
#define QEGBS_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace qegbs {

// Seed mixer used to derive independent per-instance streams from a base
// seed. All randomized components draw from std::mt19937_64 seeded through
// this function so that runs are reproducible across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// One canonical draw in [0,1). Uses the top 53 bits of the engine output
// instead of std::uniform_real_distribution, whose algorithm is
// implementation-defined. Sampling decoders consume exactly one draw per
// timestep.
inline double canonical_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Stream seed for one instance of a batch run.
inline std::uint64_t instance_seed(std::uint64_t base_seed, std::string_view id) {
  return splitmix64(base_seed ^ fnv1a64(id));
}

}  // namespace qegbs

#endif  // QEGBS_RNG_HPP_
