#include <doctest.h>

#include <cmath>
#include <map>

#include "dx/source.hpp"
#include "test_util.hpp"

using namespace dx;
using namespace dxtest;

TEST_CASE("entropy density basics") {
  JointSource u = uniform_2x2();
  CHECK(u.entropy_density(0, 0, DensityKind::joint) == doctest::Approx(2.0));

  JointSource z = z_channel();
  CHECK(z.entropy_density(1, 0, DensityKind::sum) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(z.entropy_density(0, 0, DensityKind::sum) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(z.entropy_density(0, 1, DensityKind::joint),
                  ZeroProbability);
}

TEST_CASE("exp2(-h) recovers the pmf on the support") {
  for (const JointSource& s : {z_channel(), uniform_2x2(), diag_half()}) {
    for (const auto& c : s.support())
      CHECK(std::exp2(-c.h_joint) == doctest::Approx(c.p).epsilon(1e-12));
  }
}

TEST_CASE("density stats of the Z-channel") {
  JointSource z = z_channel();
  DensityStats st = density_stats(z);
  CHECK(st.mean == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  CHECK(st.variance == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  // values {1,2,1} w.p. 1/3 each: third central moment 2/27
  CHECK(st.third_central_moment == doctest::Approx(2.0 / 27.0).epsilon(1e-12));

  // independent recomputation from entropy_density calls
  double mean = 0.0;
  for (const auto& c : z.support())
    mean += c.p * z.entropy_density(c.x, c.y, DensityKind::sum);
  CHECK(st.mean == doctest::Approx(mean).epsilon(1e-13));
}

TEST_CASE("degenerate X == Y source has zero sum density") {
  DensityStats st = density_stats(diag_half());
  CHECK(st.mean == doctest::Approx(0.0));
  CHECK(st.variance == doctest::Approx(0.0));
}

TEST_CASE("covariance of the two conditional densities") {
  CovarianceV v = covariance_v(z_channel());
  CHECK(v.v11 == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  CHECK(v.v22 == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  CHECK(v.v12 == doctest::Approx(-1.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("sampling a point mass is deterministic") {
  JointSource pm(2, 2, std::vector<double>{0, 1, 0, 0});  // always (0,1)
  SequenceSource src(pm, 3);
  Rng rng(123);
  auto [x, y] = src.sample(rng);
  CHECK(x == Seq{0, 0, 0});
  CHECK(y == Seq{1, 1, 1});
}

TEST_CASE("sampling is reproducible for a fixed seed") {
  SequenceSource src(z_channel(), 8);
  Rng a(42), b(42);
  auto [x1, y1] = src.sample(a);
  auto [x2, y2] = src.sample(b);
  CHECK(x1 == x2);
  CHECK(y1 == y2);
}

TEST_CASE("empirical pmf over 1e6 draws within 4 sigma multinomial bands") {
  JointSource z = z_channel();
  SequenceSource src(z, 1);
  Rng rng(2024);
  const int trials = 1'000'000;
  std::map<std::pair<int, int>, int> counts;
  for (int t = 0; t < trials; ++t) {
    auto [x, y] = src.sample(rng);
    counts[{x[0], y[0]}]++;
  }
  for (const auto& c : z.support()) {
    double expect = trials * c.p;
    double sigma = std::sqrt(trials * c.p * (1 - c.p));
    CHECK(std::abs(counts[{c.x, c.y}] - expect) <= 4 * sigma);
  }
  CHECK(counts.size() == 3);  // the zero-probability cell never appears
}

TEST_CASE("degenerate mixture weight (1,0) behaves as component 1") {
  SourceSpec spec;
  spec.components.push_back({1.0, z_channel()});
  spec.components.push_back({0.0, uniform_2x2()});
  SequenceSource mix = spec.make(2);
  SequenceSource plain(z_channel(), 2);
  FiniteDistribution dm = exact_sum_density_distribution(mix);
  FiniteDistribution dp = exact_sum_density_distribution(plain);
  REQUIRE(dm.atoms().size() == dp.atoms().size());
  for (size_t i = 0; i < dm.atoms().size(); ++i) {
    CHECK(dm.atoms()[i].value == doctest::Approx(dp.atoms()[i].value));
    CHECK(dm.atoms()[i].prob == doctest::Approx(dp.atoms()[i].prob));
  }
}

TEST_CASE("exact sum-density convolution at n=2 matches brute force") {
  SequenceSource src(z_channel(), 2);
  FiniteDistribution d = exact_sum_density_distribution(src);
  REQUIRE(d.atoms().size() == 3);
  CHECK(d.atoms()[0].value == doctest::Approx(2.0));
  CHECK(d.atoms()[0].prob == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK(d.atoms()[1].value == doctest::Approx(3.0));
  CHECK(d.atoms()[1].prob == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK(d.atoms()[2].value == doctest::Approx(4.0));
  CHECK(d.atoms()[2].prob == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("n=1 convolution is the per-symbol distribution") {
  SequenceSource src(z_channel(), 1);
  FiniteDistribution d = exact_sum_density_distribution(src);
  REQUIRE(d.atoms().size() == 2);  // values 1 (p=2/3) and 2 (p=1/3)
  CHECK(d.atoms()[0].prob == doctest::Approx(2.0 / 3.0));
  CHECK(d.atoms()[1].prob == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("convolution matches exhaustive enumeration up to n=8") {
  for (int n : {3, 6, 8}) {
    SequenceSource src(z_channel(), n);
    FiniteDistribution d = exact_sum_density_distribution(src);
    const JointSource& z = src.base();
    std::map<long long, double> brute;  // value scaled by 2^20
    uint64_t cells = 1;
    for (int i = 0; i < n; ++i) cells *= 4;
    for (uint64_t e = 0; e < cells; ++e) {
      uint64_t v = e;
      double p = 1.0, h = 0.0;
      bool dead = false;
      for (int i = 0; i < n; ++i) {
        int cx = static_cast<int>(v & 1);
        int cy = static_cast<int>((v >> 1) & 1);
        v >>= 2;
        if (!z.in_support(cx, cy)) {
          dead = true;
          break;
        }
        p *= z.p(cx, cy);
        h += z.entropy_density(cx, cy, DensityKind::sum);
      }
      if (dead) continue;
      brute[llround(h * (1 << 20))] += p;
    }
    REQUIRE(brute.size() == d.atoms().size());
    double tv = 0.0;
    size_t i = 0;
    for (const auto& [k, p] : brute) {
      CHECK(d.atoms()[i].value ==
            doctest::Approx(k / double(1 << 20)).epsilon(1e-9));
      tv += std::abs(d.atoms()[i].prob - p);
      ++i;
    }
    CHECK(tv <= 1e-12);
  }
}

TEST_CASE("binomial oracle for the Z-channel tail at n=30") {
  SequenceSource src(z_channel(), 30);
  FiniteDistribution d = exact_sum_density_distribution(src);
  // sum = n + #{(1,0) symbols}; P(sum > 40) = P(Binom(30,1/3) > 10)
  CHECK(d.tail_gt(40.0) ==
        doctest::Approx(binom_tail_gt(30, 1.0 / 3.0, 10)).epsilon(1e-10));
}

TEST_CASE("convolution overflow guidance") {
  SequenceSource src(z_channel(), 64);
  CHECK_THROWS_AS(exact_sum_density_distribution(src, 10),
                  ConvolutionOverflow);
}

TEST_CASE("exact rational atoms at n=2") {
  SequenceSource src(z_channel(), 2);
  auto atoms = exact_rational_sum_atoms(src);
  Rational total = 0;
  for (auto& [v, p] : atoms) total += p;
  CHECK(total == 1);
  std::map<long long, Rational> by_val;
  for (auto& [v, p] : atoms) by_val[llround(v * 1024)] += p;
  CHECK(by_val[2 * 1024] == Rational(4, 9));
  CHECK(by_val[3 * 1024] == Rational(4, 9));
  CHECK(by_val[4 * 1024] == Rational(1, 9));
}

TEST_CASE("pair density convolution marginals") {
  SequenceSource src(z_channel(), 4);
  auto atoms = exact_pair_density_distribution(src);
  double total = 0.0, mean1 = 0.0, mean2 = 0.0;
  for (const auto& a : atoms) {
    total += a.prob;
    mean1 += a.prob * a.h_x_given_y;
    mean2 += a.prob * a.h_y_given_x;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean1 == doctest::Approx(4 * 2.0 / 3.0).epsilon(1e-10));
  CHECK(mean2 == doctest::Approx(4 * 2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("sequence index round trip") {
  Seq s{2, 0, 1};
  CHECK(seq_index(s, 3) == 2 * 9 + 0 * 3 + 1);
  CHECK(seq_from_index(seq_index(s, 3), 3, 3) == s);
}

TEST_CASE("mixture sequence density is finite on sampled pairs") {
  SourceSpec spec = mixture_12_09();
  SequenceSource src = spec.make(4);
  Rng rng(5);
  auto [x, y] = src.sample(rng);
  auto d = src.seq_density(x, y, DensityKind::sum);
  REQUIRE(d.has_value());
  CHECK(*d > 0.0);
}
