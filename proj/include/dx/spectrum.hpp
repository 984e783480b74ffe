#ifndef DX_SPECTRUM_HPP
#define DX_SPECTRUM_HPP

#include <vector>

#include "dx/source.hpp"

namespace dx {

// Slicing of a density spectrum into N left-closed/right-open slices of
// width delta starting at lambda_min. Slice 0 is the complement region:
// values below lambda_min or at/above lambda_max.
struct SpectrumPlan {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double delta = 0.0;
  int n_slices = 1;
  bool degenerate = false;  // spectrum had zero width

  double boundary(int i) const { return lambda_min + (i - 1) * delta; }

  int slice_index(double value) const {
    if (value < lambda_min || value >= lambda_max) return 0;
    int i = 1 + static_cast<int>((value - lambda_min) / delta);
    if (i < 1) i = 1;
    if (i > n_slices) i = n_slices;
    return i;
  }
};

struct MinMaxPolicy {
  enum Kind { exact_support, quantile } kind = exact_support;
  double delta_quantile = 1e-3;  // for quantile: [delta, 1-delta] quantiles

  static MinMaxPolicy ExactSupport() { return {exact_support, 0.0}; }
  static MinMaxPolicy Quantile(double d) { return {quantile, d}; }
};

struct DeltaPolicy {
  enum Kind { sqrt_width, explicit_value } kind = sqrt_width;
  double value = 0.0;

  static DeltaPolicy SqrtWidth() { return {sqrt_width, 0.0}; }
  static DeltaPolicy Explicit(double d) { return {explicit_value, d}; }
};

// Builds a plan from the distribution of the chosen density. When the
// spectrum is a single point the plan is flagged degenerate and widened by
// one slice so the support stays inside slice 1.
SpectrumPlan make_plan(const FiniteDistribution& density, MinMaxPolicy minmax,
                       DeltaPolicy delta);

SpectrumPlan plan_from_bounds(double lambda_min, double lambda_max,
                              double delta);

// Probability of each slice (index 0..N) under the density distribution.
std::vector<double> slice_probabilities(const SpectrumPlan& plan,
                                        const FiniteDistribution& density);

inline double p_t0(const SpectrumPlan& plan, const FiniteDistribution& d) {
  return slice_probabilities(plan, d)[0];
}

// gamma_eps = inf{gamma : P(value > gamma) <= eps}, exact over the finite
// support.
double tail_quantile(const FiniteDistribution& dist, double eps);

// Closed-form sup rates for a finite mixture of IID components plus
// finite-n quantile diagnostics (1/n * tail_quantile at each grid n).
struct GeneralSourceRates {
  double sup_sum_rate = 0.0;      // max_k [H_k(X|Y) + H_k(Y|X)]
  double sup_x_given_y = 0.0;     // max_k H_k(X|Y)
  double sup_y_given_x = 0.0;     // max_k H_k(Y|X)
  double simple_rate = 0.0;       // sup_x_given_y + sup_y_given_x
  std::vector<int> grid_n;
  std::vector<double> quantile_rate;  // (1/n) tail_quantile(eps) per grid n
};

GeneralSourceRates general_source_rates(const SequenceSource& family,
                                        const std::vector<int>& n_grid,
                                        double eps = 0.01,
                                        size_t atom_cap = 8'000'000);

}  // namespace dx

#endif
