#ifndef DX_TEST_UTIL_HPP
#define DX_TEST_UTIL_HPP

#include <cmath>
#include <vector>

#include "dx/config.hpp"
#include "dx/source.hpp"

namespace dxtest {

using namespace dx;

// Appendix-style Z-channel: P(0,0)=P(1,0)=P(1,1)=1/3, exact rationals.
inline JointSource z_channel() {
  Rational third(1, 3);
  return JointSource(2, 2, std::vector<Rational>{third, 0, third, third});
}

inline JointSource diag_half() {
  Rational half(1, 2);
  return JointSource(2, 2, std::vector<Rational>{half, 0, 0, half});
}

inline JointSource uniform_2x2() {
  Rational q(1, 4);
  return JointSource(2, 2, std::vector<Rational>{q, q, q, q});
}

// X uniform, Y independent uniform: h(X|Y) = h(Y|X) = 1 everywhere.
inline JointSource independent_uniform_bits() {
  Rational q(1, 4);
  return JointSource(2, 2, std::vector<Rational>{q, q, q, q});
}

inline double h2(double p) {
  auto term = [](double q) { return q > 0.0 ? -q * std::log2(q) : 0.0; };
  return term(p) + term(1.0 - p);
}

// Inverse of the binary entropy on [0, 1/2].
inline double h2_inv(double target) {
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (h2(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// product of independent Bernoulli marginals P(x)P(y)
inline JointSource product_bern(double px1, double py1) {
  std::vector<double> pmf = {(1 - px1) * (1 - py1), (1 - px1) * py1,
                             px1 * (1 - py1), px1 * py1};
  return JointSource(2, 2, pmf);
}

// Two-component mixture with component sum conditional entropies 1.2 and
// 0.9 bits and mismatched conditional splits (1.0 + 0.2 vs 0.45 + 0.45):
// the simple rate max(1,0.45)+max(0.2,0.45) = 1.45 strictly exceeds the
// interactive rate max(1.2, 0.9) = 1.2.
inline SourceSpec mixture_12_09() {
  double q1 = h2_inv(0.2);    // H(Y|X) of component 1
  double p2 = h2_inv(0.45);   // per-coordinate entropy of component 2
  SourceSpec spec;
  spec.components.push_back({0.5, product_bern(0.5, q1)});
  spec.components.push_back({0.5, product_bern(p2, p2)});
  return spec;
}

// Exact Binomial(n, p) upper tail P(X > k) via summed log terms.
inline double binom_tail_gt(int n, double p, int k) {
  double s = 0.0;
  for (int j = k + 1; j <= n; ++j) {
    double lg = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                std::lgamma(n - j + 1.0) + j * std::log(p) +
                (n - j) * std::log1p(-p);
    s += std::exp(lg);
  }
  return s;
}

}  // namespace dxtest

#endif
