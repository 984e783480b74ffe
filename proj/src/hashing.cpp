#include "dx/hashing.hpp"

#include <bit>
#include <cmath>

#include "dx/errors.hpp"

namespace dx {

namespace {
inline bool parity(uint64_t v) { return (std::popcount(v) & 1) != 0; }

inline uint64_t low_mask(int m) {
  return m >= 64 ? ~0ull : ((1ull << m) - 1);
}
}  // namespace

HashChain::HashChain(uint64_t seed, int input_bits)
    : seed_(seed), input_bits_(input_bits) {
  if (input_bits <= 0 || input_bits > 64)
    throw Error("hash input width must be in [1,64] bits");
}

uint64_t HashChain::row_mask(uint64_t seed, int block, int row, int m) {
  return derive_seed(seed, 0x9A5Eull + static_cast<uint64_t>(block),
                     static_cast<uint64_t>(row)) &
         low_mask(m);
}

HashChain HashChain::extend(int delta_bits) const {
  if (delta_bits < 1) throw Error("hash extension must add at least 1 bit");
  HashChain out = *this;
  Block b;
  b.bits = delta_bits;
  int idx = static_cast<int>(blocks_.size());
  b.rows.reserve(delta_bits);
  for (int r = 0; r < delta_bits; ++r)
    b.rows.push_back(row_mask(seed_, idx, r, input_bits_));
  out.blocks_.push_back(std::move(b));
  out.total_bits_ += delta_bits;
  return out;
}

BitString HashChain::hash(uint64_t x) const {
  if ((x & ~low_mask(input_bits_)) != 0)
    throw EncodingOverflow("sequence index exceeds hash input width");
  BitString out;
  for (const Block& b : blocks_)
    for (uint64_t row : b.rows) out.push_back(parity(row & x));
  return out;
}

BitString HashChain::hash_block(int b, uint64_t x) const {
  if ((x & ~low_mask(input_bits_)) != 0)
    throw EncodingOverflow("sequence index exceeds hash input width");
  BitString out;
  for (uint64_t row : blocks_[b].rows) out.push_back(parity(row & x));
  return out;
}

void HashChain::set_rows_for_test(
    const std::vector<std::vector<uint64_t>>& rows) {
  if (rows.size() != blocks_.size())
    throw Error("row override shape mismatch");
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != blocks_[i].rows.size())
      throw Error("row override shape mismatch");
    blocks_[i].rows = rows[i];
  }
}

UniversalityReport two_universal_certificate(int m, int l, uint64_t trials,
                                             Rng& rng) {
  if (trials < 1000) throw Error("certificate needs at least 10^3 trials");
  UniversalityReport rep;
  rep.m = m;
  rep.l = l;
  rep.bound = std::exp2(-static_cast<double>(l));

  if (m <= 12) {
    rep.exact_checked = true;
    rep.exact_ok = true;
    // Rank argument: for every nonzero difference d, exactly half of all
    // 2^m row masks have even parity with d; rows being independent makes
    // the l-bit collision probability exactly 2^-l.
    uint64_t half = 1ull << (m - 1);
    for (uint64_t d = 1; d < (1ull << m); ++d) {
      uint64_t even = 0;
      for (uint64_t row = 0; row < (1ull << m); ++row)
        if (!parity(row & d)) ++even;
      if (even != half) rep.exact_ok = false;
    }
    if (l >= 1 && m * l <= 20) {
      // Full matrix enumeration: count colliding matrices for every pair.
      uint64_t nmat = 1ull << (m * l);
      uint64_t expect = nmat >> l;
      for (uint64_t xa = 0; xa < (1ull << m) && rep.exact_ok; ++xa)
        for (uint64_t xb = xa + 1; xb < (1ull << m) && rep.exact_ok; ++xb) {
          uint64_t collide = 0;
          uint64_t d = xa ^ xb;
          for (uint64_t mat = 0; mat < nmat; ++mat) {
            bool eq = true;
            for (int r = 0; r < l && eq; ++r) {
              uint64_t row = (mat >> (r * m)) & low_mask(m);
              if (parity(row & d)) eq = false;
            }
            if (eq) ++collide;
          }
          if (collide != expect) rep.exact_ok = false;
        }
    }
    rep.exact_collision_prob = rep.exact_ok ? rep.bound : -1.0;
  }

  uint64_t collisions = 0;
  for (uint64_t t = 0; t < trials; ++t) {
    uint64_t seed = rng.next_u64();
    uint64_t xa = rng.next_below(1ull << m);
    uint64_t xb = rng.next_below((1ull << m) - 1);
    if (xb >= xa) ++xb;  // uniform distinct pair
    HashChain chain(seed, m);
    if (l > 0) chain = chain.extend(l);  // l = 0: empty hash, all collide
    if (chain.hash(xa) == chain.hash(xb)) ++collisions;
  }
  rep.mc_trials = trials;
  rep.mc_collisions = collisions;
  rep.mc_rate = static_cast<double>(collisions) / trials;
  rep.binom_sigma =
      std::sqrt(rep.bound * (1.0 - rep.bound) / static_cast<double>(trials));
  return rep;
}

}  // namespace dx
