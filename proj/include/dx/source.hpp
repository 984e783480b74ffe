#ifndef DX_SOURCE_HPP
#define DX_SOURCE_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dx/errors.hpp"
#include "dx/rng.hpp"

namespace dx {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

using Symbol = uint8_t;
using Seq = std::vector<Symbol>;

enum class DensityKind { joint, x_given_y, y_given_x, sum };

// Finite joint pmf over X x Y. Stored as doubles; when constructed from
// exact rationals the exact table is kept alongside for zero-error coding
// and small-n oracle arithmetic.
class JointSource {
 public:
  JointSource(int nx, int ny, std::vector<double> pmf);
  JointSource(int nx, int ny, std::vector<Rational> pmf);

  int nx() const { return nx_; }
  int ny() const { return ny_; }

  double p(int x, int y) const { return pmf_[x * ny_ + y]; }
  double px(int x) const { return px_[x]; }
  double py(int y) const { return py_[y]; }

  bool has_exact() const { return !exact_.empty(); }
  const Rational& exact_p(int x, int y) const { return exact_[x * ny_ + y]; }
  Rational exact_px(int x) const;
  Rational exact_py(int y) const;

  // -log2 of the requested (conditional) probability of the pair.
  // Throws ZeroProbability when P(x,y) = 0.
  double entropy_density(int x, int y, DensityKind kind) const;

  bool in_support(int x, int y) const { return p(x, y) > 0.0; }

  // Support pairs with their probabilities and the four densities.
  struct SupportCell {
    int x, y;
    double p;
    double h_joint, h_x_given_y, h_y_given_x, h_sum;
  };
  const std::vector<SupportCell>& support() const { return support_; }

  std::string describe() const;

 private:
  void finish_init();

  int nx_, ny_;
  std::vector<double> pmf_;
  std::vector<Rational> exact_;  // empty unless exact mode
  std::vector<double> px_, py_;
  std::vector<SupportCell> support_;
};

// Mean, variance and third central moment of the sum conditional entropy
// density h(x|y)+h(y|x), plus the per-pair tables it is computed from.
struct DensityStats {
  double mean = 0.0;       // bits
  double variance = 0.0;   // bits^2
  double third_central_moment = 0.0;  // bits^3
  // Parallel arrays over support cells.
  std::vector<double> h_joint, h_x_given_y, h_y_given_x, h_sum, prob;
};

DensityStats density_stats(const JointSource& src);

// 2x2 covariance of (h(X|Y), h(Y|X)) under the pmf.
struct CovarianceV {
  double v11 = 0.0, v12 = 0.0, v22 = 0.0;
};

CovarianceV covariance_v(const JointSource& src);

// Distribution of a finite-valued statistic, atoms sorted by value.
// Atoms closer than the merge tolerance are combined, so tail and quantile
// queries never depend on exact float equality.
class FiniteDistribution {
 public:
  struct Atom {
    double value;
    double prob;
  };

  FiniteDistribution() = default;
  explicit FiniteDistribution(std::vector<Atom> atoms, double merge_tol = 1e-9);

  const std::vector<Atom>& atoms() const { return atoms_; }
  double total() const;

  double tail_gt(double gamma) const;   // P(value > gamma)
  double tail_geq(double gamma) const;  // P(value >= gamma)
  double min_value() const { return atoms_.front().value; }
  double max_value() const { return atoms_.back().value; }

  static FiniteDistribution mixture(
      const std::vector<std::pair<double, FiniteDistribution>>& parts);

 private:
  std::vector<Atom> atoms_;
};

// Block source: n IID pairs from `base`, or a finite mixture that draws one
// component per block and then n IID pairs from it.
class SequenceSource {
 public:
  struct Component {
    double weight;
    JointSource source;
  };

  SequenceSource(JointSource base, int n);
  SequenceSource(std::vector<Component> mixture, int n);

  int n() const { return n_; }
  bool is_mixture() const { return components_.size() > 1; }
  const std::vector<Component>& components() const { return components_; }
  const JointSource& component(size_t k) const { return components_[k].source; }
  // Single-component accessor; throws for mixtures.
  const JointSource& base() const;

  int nx() const { return components_.front().source.nx(); }
  int ny() const { return components_.front().source.ny(); }

  std::pair<Seq, Seq> sample(Rng& rng) const;

  // Sequence-level conditional density -log2 P(x_seq | y_seq) (or the other
  // kinds); nullopt when the pair has zero probability. Handles mixtures via
  // the exact mixture distribution of the block.
  std::optional<double> seq_density(const Seq& x, const Seq& y,
                                    DensityKind kind) const;

  std::string describe() const;

 private:
  std::vector<Component> components_;
  int n_;
};

// Exact n-fold distribution of the per-symbol statistic chosen by `kind`
// (sum over the block). Probabilities via multinomial coefficients over the
// per-symbol level counts; mixtures return the weight-mixture of component
// convolutions. Throws ConvolutionOverflow when the atom count would exceed
// `atom_cap` (callers should fall back to Monte Carlo).
FiniteDistribution exact_block_density_distribution(
    const SequenceSource& src, DensityKind kind, size_t atom_cap = 8'000'000);

inline FiniteDistribution exact_sum_density_distribution(
    const SequenceSource& src, size_t atom_cap = 8'000'000) {
  return exact_block_density_distribution(src, DensityKind::sum, atom_cap);
}

// Exact rational version for small n (requires exact-mode sources); used as
// a test oracle. Atom values are level-index multisets mapped to doubles.
std::vector<std::pair<double, Rational>> exact_rational_sum_atoms(
    const SequenceSource& src, size_t atom_cap = 1'000'000);

// Joint distribution of (h(X|Y), h(Y|X)) summed over the block, exact via
// 2-D count-vector convolution. Single-component sources only.
struct JointDensityAtom {
  double h_x_given_y;
  double h_y_given_x;
  double prob;
};
std::vector<JointDensityAtom> exact_pair_density_distribution(
    const SequenceSource& src, size_t atom_cap = 8'000'000);

// Mixed-radix sequence index, most significant symbol first.
uint64_t seq_index(const Seq& s, int alphabet);
Seq seq_from_index(uint64_t idx, int alphabet, int n);

}  // namespace dx

#endif
