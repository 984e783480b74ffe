#include "dx/spectrum.hpp"

#include <algorithm>
#include <cmath>

namespace dx {

SpectrumPlan plan_from_bounds(double lambda_min, double lambda_max,
                              double delta) {
  SpectrumPlan plan;
  plan.lambda_min = lambda_min;
  plan.delta = delta;
  if (lambda_max <= lambda_min) {
    // Zero-width spectrum: keep one slice wide enough to hold the point.
    plan.degenerate = true;
    plan.n_slices = 1;
    plan.delta = delta > 0.0 ? delta : 1.0;
    plan.lambda_max = lambda_min + plan.delta;
    return plan;
  }
  if (delta <= 0.0) throw Error("slice width must be positive");
  double width = lambda_max - lambda_min;
  int n = static_cast<int>(std::ceil(width / delta - 1e-12));
  plan.n_slices = std::max(1, n);
  plan.lambda_max = lambda_max;
  return plan;
}

SpectrumPlan make_plan(const FiniteDistribution& density, MinMaxPolicy minmax,
                       DeltaPolicy delta) {
  double lo, hi;
  if (minmax.kind == MinMaxPolicy::exact_support) {
    lo = density.min_value();
    hi = density.max_value();
  } else {
    double d = minmax.delta_quantile;
    // [d, 1-d] quantiles of the density distribution
    double acc = 0.0;
    lo = density.min_value();
    hi = density.max_value();
    for (const auto& a : density.atoms()) {
      acc += a.prob;
      if (acc >= d) {
        lo = a.value;
        break;
      }
    }
    acc = 0.0;
    for (auto it = density.atoms().rbegin(); it != density.atoms().rend();
         ++it) {
      acc += it->prob;
      if (acc >= d) {
        hi = it->value;
        break;
      }
    }
    if (hi < lo) hi = lo;
  }
  double width = hi - lo;
  double dv;
  if (delta.kind == DeltaPolicy::sqrt_width)
    dv = width > 0.0 ? std::sqrt(width) : 1.0;
  else
    dv = delta.value;
  return plan_from_bounds(lo, hi, dv);
}

std::vector<double> slice_probabilities(const SpectrumPlan& plan,
                                        const FiniteDistribution& density) {
  std::vector<double> p(plan.n_slices + 1, 0.0);
  for (const auto& a : density.atoms()) p[plan.slice_index(a.value)] += a.prob;
  return p;
}

double tail_quantile(const FiniteDistribution& dist, double eps) {
  if (eps < 0.0 || eps >= 1.0) throw Error("eps must lie in [0,1)");
  // Smallest support value gamma with P(value > gamma) <= eps. The 1e-12
  // slack absorbs accumulation noise in the atom probabilities.
  const auto& atoms = dist.atoms();
  double acc = 0.0;  // P(value > atoms[i].value) when entering iteration i
  double best = atoms.back().value;
  for (size_t i = atoms.size(); i-- > 0;) {
    if (acc <= eps + 1e-12)
      best = atoms[i].value;
    else
      break;
    acc += atoms[i].prob;
  }
  return best;
}

GeneralSourceRates general_source_rates(const SequenceSource& family,
                                        const std::vector<int>& n_grid,
                                        double eps, size_t atom_cap) {
  GeneralSourceRates r;
  for (const auto& comp : family.components()) {
    if (comp.weight <= 0.0) continue;
    DensityStats st = density_stats(comp.source);
    double hx = 0.0, hy = 0.0;
    for (const auto& c : comp.source.support()) {
      hx += c.p * c.h_x_given_y;
      hy += c.p * c.h_y_given_x;
    }
    r.sup_sum_rate = std::max(r.sup_sum_rate, st.mean);
    r.sup_x_given_y = std::max(r.sup_x_given_y, hx);
    r.sup_y_given_x = std::max(r.sup_y_given_x, hy);
  }
  r.simple_rate = r.sup_x_given_y + r.sup_y_given_x;
  for (int n : n_grid) {
    SequenceSource at_n(family.components(), n);
    FiniteDistribution d = exact_sum_density_distribution(at_n, atom_cap);
    r.grid_n.push_back(n);
    r.quantile_rate.push_back(tail_quantile(d, eps) / n);
  }
  return r;
}

}  // namespace dx
