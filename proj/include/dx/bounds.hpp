#ifndef DX_BOUNDS_HPP
#define DX_BOUNDS_HPP

#include <optional>
#include <vector>

#include "dx/bitstring.hpp"
#include "dx/source.hpp"
#include "dx/spectrum.hpp"

namespace dx {

// Standard Gaussian tail Q(a) and its inverse. Q(Q_inv(eps)) = eps to
// 1e-10 over [1e-8, 1-1e-8].
double gaussian_q(double a);
double gaussian_q_inv(double eps);

// beta_eps(P,Q): minimum type-II error at type-I error <= eps, exact via the
// Neyman-Pearson structure (likelihood-ratio ordering with a randomized
// boundary atom). P and Q live on the same index universe.
double beta_epsilon(const std::vector<double>& p, const std::vector<double>& q,
                    double eps);

// Upper bound on -log2 beta_eps(P,Q):
//   lambda - log2( (P(log2 P/Q < lambda) - eps)_+ ),
// +infinity when the inner probability is <= eps.
double beta_upper_bound(const std::vector<double>& p,
                        const std::vector<double>& q, double eps,
                        double lambda);

struct ConverseBound {
  double value = 0.0;  // clamped at 0; a length lower bound below 0 says nothing
  double raw = 0.0;    // unclamped evaluation (-inf encoded as -1e300)
  bool vacuous = false;
  double gamma = 0.0;
  double eta = 0.0;
  int n_slices = 0;
};

// Single-shot converse evaluated at one parameter point:
//   gamma + 3 log2(P_gamma - eps - P(T0) - 1/N)_+ + log2(1-2 eta)
//   - Delta - 6 log2 N - 4 log2(1/eta) - 1.
ConverseBound singleshot_converse(double gamma, double p_gamma, double eps,
                                  double eta, const SpectrumPlan& joint_plan,
                                  double p_t0);

// Maximizes over gamma on the sum-density support grid, a small eta grid and
// slice counts N; the plan slices the joint density h(XY).
ConverseBound best_singleshot_converse(const FiniteDistribution& sum_density,
                                       const FiniteDistribution& joint_density,
                                       double eps);

// Almost-uniform converse (margin Delta):
//   gamma + log2(P(-log2 P^2/(Qx Qy) >= gamma) - eps - 2 eta)_+
//   - Delta - 4 log2(1/eta) - 1.
// Qx, Qy default to the marginals. Throws NotAlmostUniform when the joint
// spectrum is wider than the declared margin.
ConverseBound almost_uniform_converse(
    const JointSource& src, double eps, double eta, double gamma,
    double margin_delta,
    const std::vector<double>* qx = nullptr,
    const std::vector<double>* qy = nullptr);

// Leftover-hash key extraction. `px` is the distribution of the material,
// `z_of_x` an optional deterministic leak symbol per atom (empty = no leak),
// `z_alphabet` the leak alphabet size (1 = no leak). Preconditions follow
// the converse recipe: key_bits <= H_min - log2|Z| - 2 log2(1/eta) - 1.
struct KeyExtractionReport {
  int key_bits = 0;
  double h_min = 0.0;
  double lemma3_bound = 0.0;  // sqrt(|K||Z| 2^-Hmin)
  bool exact_available = false;
  double exact_distance = 0.0;  // variational distance of (K,Z,S) from unif x (Z,S)
  BitString key;                // extraction at x_realization under `seed`
};

KeyExtractionReport extract_key(const std::vector<double>& px,
                                const std::vector<int>& z_of_x,
                                int z_alphabet, double eta, int key_bits,
                                uint64_t seed, uint64_t x_realization);

// Simple-protocol converse (two one-way messages):
//   inf{ l1 + l2 : forall delta > 0,
//        P(h(X|Y) > l1+delta or h(Y|X) > l2+delta) <= eps + 2 2^-delta }.
// Evaluated exactly on the finite joint distribution of the two densities.
struct SimpleProtocolBound {
  double value = 0.0;
  double l1 = 0.0, l2 = 0.0;
};

SimpleProtocolBound simple_protocol_bound(
    const std::vector<JointDensityAtom>& pair_density, double eps);

// Second-order length nH + sqrt(nV) Q_inv(eps) with a Berry-Esseen style
// band from the third central moment.
struct SecondOrderLength {
  double value = 0.0;
  double band = 0.0;  // half-width; infinity when the shifted args leave (0,1)
  bool band_valid = false;
  bool degenerate_variance = false;
};

SecondOrderLength second_order_length(double H, double V, double T, double n,
                                      double eps);

// D_eps = inf{ r1 + r2 : P(Z1 <= r1, Z2 <= r2) >= 1 - eps } for a centered
// bivariate Gaussian with covariance V; singular V reduces to the 1-D case
// sqrt(V11 + 2 V12 + V22) Q_inv(eps). Accuracy ~1e-6.
double d_epsilon(const CovarianceV& v, double eps);

// P(Z1 <= r1, Z2 <= r2) for the centered bivariate Gaussian (nonsingular).
double bivariate_normal_cdf(double r1, double r2, const CovarianceV& v);

}  // namespace dx

#endif
