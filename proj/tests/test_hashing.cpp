#include <doctest.h>

#include <cmath>

#include "dx/hashing.hpp"
#include "test_util.hpp"

using namespace dx;

TEST_CASE("extension keeps earlier bits and totals add up") {
  HashChain c3 = HashChain(99, 8).extend(3);
  HashChain c5 = c3.extend(2);
  CHECK(c5.total_bits() == 5);
  for (uint64_t x = 0; x < 256; ++x)
    CHECK(c5.hash(x).prefix(3) == c3.hash(x));
}

TEST_CASE("same seed gives identical chains") {
  HashChain a = HashChain(7, 12).extend(9).extend(4);
  HashChain b = HashChain(7, 12).extend(9).extend(4);
  for (uint64_t x : {0ull, 1ull, 777ull, 4095ull})
    CHECK(a.hash(x) == b.hash(x));
}

TEST_CASE("zero-bit extension is rejected") {
  CHECK_THROWS_AS(HashChain(1, 4).extend(0), Error);
}

TEST_CASE("all-zero matrix maps everything to zero") {
  HashChain c = HashChain(11, 6).extend(4);
  c.set_rows_for_test({{0, 0, 0, 0}});
  BitString zero = BitString::zeros(4);
  for (uint64_t x = 0; x < 64; ++x) CHECK(c.hash(x) == zero);
}

TEST_CASE("equal inputs always collide") {
  HashChain c = HashChain(3, 10).extend(8);
  for (uint64_t x : {5ull, 100ull, 1023ull}) CHECK(c.hash(x) == c.hash(x));
}

TEST_CASE("input outside the declared width is rejected") {
  HashChain c = HashChain(5, 4).extend(2);
  CHECK_THROWS_AS(c.hash(16), EncodingOverflow);
}

TEST_CASE("GF(2) linearity") {
  Rng rng(31337);
  HashChain c = HashChain(rng.next_u64(), 16).extend(12);
  for (int t = 0; t < 200; ++t) {
    uint64_t a = rng.next_below(1 << 16), b = rng.next_below(1 << 16);
    CHECK((c.hash(a) ^ c.hash(b)) == c.hash(a ^ b));
  }
}

TEST_CASE("exact enumeration at m=3 l=2: every pair collides at rate 1/4") {
  // independent oracle: enumerate all 2^(3*2) matrices directly
  const int m = 3, l = 2;
  for (uint64_t xa = 0; xa < 8; ++xa)
    for (uint64_t xb = xa + 1; xb < 8; ++xb) {
      int collide = 0;
      for (uint64_t mat = 0; mat < (1u << (m * l)); ++mat) {
        bool eq = true;
        for (int r = 0; r < l; ++r) {
          uint64_t row = (mat >> (r * m)) & 7u;
          if (__builtin_parityll(row & (xa ^ xb))) eq = false;
        }
        if (eq) ++collide;
      }
      CHECK(collide == 16);  // 64 matrices / 2^l
    }
  // and the library certificate agrees
  Rng rng(1);
  UniversalityReport rep = two_universal_certificate(m, l, 1000, rng);
  CHECK(rep.exact_checked);
  CHECK(rep.exact_ok);
  CHECK(rep.exact_collision_prob == doctest::Approx(0.25));
}

TEST_CASE("empirical collision rate at l=8 under the concentration bound") {
  Rng rng(77);
  const int m = 10, l = 8;
  const uint64_t trials = 100000;
  UniversalityReport rep = two_universal_certificate(m, l, trials, rng);
  double bound = std::exp2(-l);
  double allowance = bound * (1.0 + 5.0 / std::sqrt(trials * bound));
  CHECK(rep.mc_rate <= allowance);
}

TEST_CASE("l=0 certificate degenerates to everything colliding") {
  Rng rng(5);
  UniversalityReport rep = two_universal_certificate(6, 0, 2000, rng);
  CHECK(rep.mc_rate == doctest::Approx(1.0));
  CHECK(rep.bound == doctest::Approx(1.0));
}
