// Deterministic randomness: splitmix64 streams and domain-separated
// seed derivation.
//
// std::uniform_int_distribution is not pinned down by the standard, so
// everything random in the simulator runs off this fixed generator.
// Identical seeds give identical byte streams on every platform.

#pragma once

#include <cstdint>
#include <string_view>

#include "encrand/digest.hpp"

namespace encrand {

inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// One finalization pass, used when a single well-mixed word is needed
// from a raw seed without keeping stream state.
inline uint64_t mix64(uint64_t v) {
  uint64_t s = v;
  return splitmix64_next(s);
}

// Subseed for a named role. Seeds for distinct (domain, a, b) never
// collide in practice, which keeps party draws, block tags, round
// seeds and Monte-Carlo trials independent.
inline uint64_t derive_seed(uint64_t base, std::string_view domain,
                            uint64_t a = 0, uint64_t b = 0) {
  ByteWriter w;
  w.u64(base);
  w.str(domain);
  w.u64(a);
  w.u64(b);
  return w.digest64();
}

class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() { return splitmix64_next(state_); }

  // Uniform value in [0, bound) via the multiply-shift map. The bias is
  // bounded by bound/2^64, far below anything our statistics can see.
  uint64_t below(uint64_t bound) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

}  // namespace encrand
