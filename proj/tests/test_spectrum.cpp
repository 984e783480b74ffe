#include <doctest.h>

#include "dx/spectrum.hpp"
#include "test_util.hpp"

using namespace dx;
using namespace dxtest;

TEST_CASE("plan arithmetic") {
  SpectrumPlan p = plan_from_bounds(4, 8, 2);
  CHECK(p.n_slices == 2);
  CHECK(p.boundary(1) == doctest::Approx(4.0));
  CHECK(p.boundary(2) == doctest::Approx(6.0));
  CHECK_FALSE(p.degenerate);
}

TEST_CASE("sqrt width policy") {
  FiniteDistribution d({{0.0, 0.5}, {16.0, 0.5}});
  SpectrumPlan p =
      make_plan(d, MinMaxPolicy::ExactSupport(), DeltaPolicy::SqrtWidth());
  CHECK(p.delta == doctest::Approx(4.0));
  CHECK(p.n_slices == 4);
}

TEST_CASE("degenerate spectrum keeps its point inside slice 1") {
  SequenceSource src(z_channel(), 1);
  FiniteDistribution d =
      exact_block_density_distribution(src, DensityKind::joint);
  SpectrumPlan p =
      make_plan(d, MinMaxPolicy::ExactSupport(), DeltaPolicy::SqrtWidth());
  CHECK(p.degenerate);
  CHECK(p.n_slices == 1);
  CHECK(p.slice_index(std::log2(3.0)) == 1);
}

TEST_CASE("slice membership is left-closed right-open") {
  SpectrumPlan p = plan_from_bounds(4, 8, 2);
  CHECK(p.slice_index(5.0) == 1);
  CHECK(p.slice_index(8.0) == 0);  // at lambda_max: excluded
  CHECK(p.slice_index(6.0) == 2);  // boundary belongs to the upper slice
  CHECK(p.slice_index(3.9) == 0);
  CHECK(p.slice_index(4.0) == 1);
}

TEST_CASE("slice probabilities partition the support") {
  for (int n : {1, 4, 7}) {
    SequenceSource src(z_channel(), n);
    FiniteDistribution d =
        exact_block_density_distribution(src, DensityKind::x_given_y);
    SpectrumPlan p = make_plan(d, MinMaxPolicy::ExactSupport(),
                               DeltaPolicy::Explicit(1.0));
    auto probs = slice_probabilities(p, d);
    double total = 0.0;
    for (double v : probs) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& a : d.atoms()) {
      int idx = p.slice_index(a.value);
      CHECK(idx >= 0);
      CHECK(idx <= p.n_slices);
    }
  }
}

TEST_CASE("tail quantile is the exact generalized inverse") {
  FiniteDistribution point({{4.0 / 3.0, 1.0}});
  CHECK(tail_quantile(point, 0.5) == doctest::Approx(4.0 / 3.0));

  SequenceSource src(z_channel(), 2);
  FiniteDistribution d = exact_sum_density_distribution(src);
  CHECK(tail_quantile(d, 0.2) == doctest::Approx(3.0));
  CHECK(tail_quantile(d, 0.0) == doctest::Approx(4.0));

  for (double eps : {0.05, 0.2, 0.5}) {
    double g = tail_quantile(d, eps);
    CHECK(d.tail_gt(g) <= eps + 1e-12);
    CHECK(d.tail_gt(g - 1e-6) > eps);
  }
}

TEST_CASE("quantile rate diagnostic decreases toward the mean") {
  double prev = 1e300;
  for (int n : {8, 16, 32, 64, 128}) {
    SequenceSource src(z_channel(), n);
    FiniteDistribution d = exact_sum_density_distribution(src);
    double rate = tail_quantile(d, 0.1) / n;
    CHECK(rate <= prev + 1e-9);
    prev = rate;
  }
  CHECK(prev >= 4.0 / 3.0 - 1e-9);  // upper quantiles stay above the mean
}

TEST_CASE("general source rates: single component") {
  SequenceSource src(z_channel(), 1);
  GeneralSourceRates r = general_source_rates(src, {256}, 0.01);
  CHECK(r.sup_sum_rate == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(r.quantile_rate[0] >= r.sup_sum_rate - 1e-9);
  CHECK(r.quantile_rate[0] <= r.sup_sum_rate + 0.2);
}

TEST_CASE("general source rates: mixture separation") {
  SourceSpec spec = mixture_12_09();
  SequenceSource family = spec.make(1);
  GeneralSourceRates r = general_source_rates(family, {1000}, 0.01);
  CHECK(r.sup_sum_rate == doctest::Approx(1.2).epsilon(1e-9));
  CHECK(r.simple_rate == doctest::Approx(1.45).epsilon(1e-9));
  // finite-n diagnostic converges to the max-of-sums, not the sum-of-maxes
  CHECK(std::abs(r.quantile_rate[0] - 1.2) < 0.07);
  CHECK(r.simple_rate - r.quantile_rate[0] > 0.1);
}

TEST_CASE("mixture of a component with itself is the component") {
  SourceSpec spec;
  spec.components.push_back({0.5, z_channel()});
  spec.components.push_back({0.5, z_channel()});
  SequenceSource family = spec.make(1);
  GeneralSourceRates r = general_source_rates(family, {64}, 0.01);
  CHECK(r.sup_sum_rate == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  SequenceSource plain(z_channel(), 64);
  double q = tail_quantile(exact_sum_density_distribution(plain), 0.01) / 64;
  CHECK(r.quantile_rate[0] == doctest::Approx(q).epsilon(1e-9));
}
