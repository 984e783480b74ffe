#ifndef DX_HASHING_HPP
#define DX_HASHING_HPP

#include <cstdint>
#include <vector>

#include "dx/bitstring.hpp"
#include "dx/rng.hpp"

namespace dx {

// Incremental linear hash over GF(2): each round appends a block of random
// rows; output bit = parity(row & input). Uniformly random rows make the
// family XOR-universal, hence 2-universal at every accumulated length, and
// appending rows realizes per-round independent hash extension.
//
// Row derivation is fixed so that two peers with the same seed build
// bit-identical matrices: row r of block b over m input bits is
//   mask = derive_seed(seed, 0x9A5Eull + b, r) & ((1<<m)-1)
// (see rng.hpp for derive_seed; documented in the README wire section).
class HashChain {
 public:
  HashChain(uint64_t seed, int input_bits);

  // Returns a copy with one more block of `delta_bits` derived rows.
  HashChain extend(int delta_bits) const;

  uint64_t seed() const { return seed_; }
  int input_bits() const { return input_bits_; }
  int total_bits() const { return total_bits_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  int block_bits(int b) const { return blocks_[b].bits; }

  // Hash of the m-bit input under all blocks, concatenated in round order.
  BitString hash(uint64_t x) const;
  // Hash under block b alone.
  BitString hash_block(int b, uint64_t x) const;

  // Test hook: replace every row of every block (used to realize the
  // all-zero map and other fixed matrices in tests).
  void set_rows_for_test(const std::vector<std::vector<uint64_t>>& rows);

  static uint64_t row_mask(uint64_t seed, int block, int row, int m);

 private:
  struct Block {
    int bits;
    std::vector<uint64_t> rows;
  };

  uint64_t seed_;
  int input_bits_;
  int total_bits_ = 0;
  std::vector<Block> blocks_;
};

// Report from the 2-universality certificate. The exact section verifies the
// rank argument (every nonzero difference vector is hit by exactly half of
// all row masks, hence collision probability is exactly 2^-l); the Monte
// Carlo section estimates the collision rate over random seeds and pairs.
struct UniversalityReport {
  int m = 0, l = 0;
  bool exact_checked = false;
  bool exact_ok = false;
  double exact_collision_prob = 0.0;  // 2^-l when exact_ok
  uint64_t mc_trials = 0;
  uint64_t mc_collisions = 0;
  double mc_rate = 0.0;
  double bound = 0.0;        // 2^-l
  double binom_sigma = 0.0;  // sqrt(T p (1-p)) / T
};

// Exhaustive verification for m <= 12 (per-difference row counting; full
// matrix enumeration when m*l <= 20) plus Monte Carlo with `trials` random
// (seed, pair) draws.
UniversalityReport two_universal_certificate(int m, int l, uint64_t trials,
                                             Rng& rng);

}  // namespace dx

#endif
