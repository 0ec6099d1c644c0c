#ifndef MDLASSO_RNG_HPP
#define MDLASSO_RNG_HPP

#include <cstdint>
#include <random>

namespace mdlasso {

// Identical seed => identical generated data, bit-for-bit, on one platform.
struct RngSeed {
  std::uint64_t value = 0;
};

using Rng = std::mt19937_64;

inline Rng make_rng(RngSeed seed) { return Rng(seed.value); }

// splitmix64 finalizer; used to derive independent per-trial (or per-stream)
// seeds from (base_seed, stream_index) so that results do not depend on the
// order in which trials execute.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline RngSeed derive_seed(RngSeed base, std::uint64_t stream) {
  return RngSeed{splitmix64(splitmix64(base.value) ^ splitmix64(stream + 1))};
}

}  // namespace mdlasso

#endif
