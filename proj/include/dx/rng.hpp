#ifndef DX_RNG_HPP
#define DX_RNG_HPP

#include <cstdint>

namespace dx {

// SplitMix64 finalizer. All pseudorandomness in the library flows through
// this mixer so that two machines with the same seeds produce bit-identical
// streams regardless of platform or standard library.
inline constexpr uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic counter-based stream: state advances by the golden-gamma
// increment, outputs are the mixed state (SplitMix64).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound) by rejection on the top bits.
  uint64_t next_below(uint64_t bound) {
    if (bound == 0) return 0;
    uint64_t mask = ~0ull;
    uint64_t lz = bound - 1;
    int bits = 0;
    while (lz) {
      ++bits;
      lz >>= 1;
    }
    mask = bits >= 64 ? ~0ull : ((1ull << bits) - 1);
    for (;;) {
      uint64_t v = next_u64() & mask;
      if (v < bound) return v;
    }
  }

  bool next_bit() { return (next_u64() >> 63) != 0; }

 private:
  uint64_t state_;
};

// Derives an independent stream from (seed, labels...). Streams with
// different label tuples never share outputs, which is what lets parallel
// trials draw from disjoint randomness.
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b = 0,
                            uint64_t c = 0) {
  uint64_t s = mix64(seed ^ 0xD1B54A32D192ED03ull);
  s = mix64(s ^ mix64(a));
  s = mix64(s ^ mix64(b ^ 0x8CB92BA72F3D8DD7ull));
  s = mix64(s ^ mix64(c ^ 0xABCD1234ABCD1234ull));
  return s;
}

inline Rng derive_rng(uint64_t seed, uint64_t a, uint64_t b = 0,
                      uint64_t c = 0) {
  return Rng(derive_seed(seed, a, b, c));
}

}  // namespace dx

#endif
