#include "dx/source.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace dx {

namespace {
constexpr double kPmfSumTol = 1e-12;

double log2_safe(double v) { return std::log2(v); }
}  // namespace

JointSource::JointSource(int nx, int ny, std::vector<double> pmf)
    : nx_(nx), ny_(ny), pmf_(std::move(pmf)) {
  if (nx_ <= 0 || ny_ <= 0) throw Error("alphabet sizes must be positive");
  if (pmf_.size() != static_cast<size_t>(nx_) * ny_)
    throw Error("pmf size does not match alphabet sizes");
  double sum = 0.0;
  for (double v : pmf_) {
    if (v < 0.0) throw Error("pmf entries must be nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kPmfSumTol)
    throw Error("pmf entries must sum to 1 within 1e-12");
  finish_init();
}

JointSource::JointSource(int nx, int ny, std::vector<Rational> pmf)
    : nx_(nx), ny_(ny), exact_(std::move(pmf)) {
  if (nx_ <= 0 || ny_ <= 0) throw Error("alphabet sizes must be positive");
  if (exact_.size() != static_cast<size_t>(nx_) * ny_)
    throw Error("pmf size does not match alphabet sizes");
  Rational sum = 0;
  for (const Rational& v : exact_) {
    if (v < 0) throw Error("pmf entries must be nonnegative");
    sum += v;
  }
  if (sum != 1) throw Error("exact pmf entries must sum to exactly 1");
  pmf_.reserve(exact_.size());
  for (const Rational& v : exact_)
    pmf_.push_back(static_cast<double>(v));
  finish_init();
}

void JointSource::finish_init() {
  px_.assign(nx_, 0.0);
  py_.assign(ny_, 0.0);
  for (int x = 0; x < nx_; ++x)
    for (int y = 0; y < ny_; ++y) {
      px_[x] += p(x, y);
      py_[y] += p(x, y);
    }
  for (int x = 0; x < nx_; ++x)
    for (int y = 0; y < ny_; ++y) {
      double pxy = p(x, y);
      if (pxy <= 0.0) continue;
      SupportCell c;
      c.x = x;
      c.y = y;
      c.p = pxy;
      c.h_joint = -log2_safe(pxy);
      c.h_x_given_y = -log2_safe(pxy / py_[y]);
      c.h_y_given_x = -log2_safe(pxy / px_[x]);
      c.h_sum = c.h_x_given_y + c.h_y_given_x;
      support_.push_back(c);
    }
  if (support_.empty()) throw Error("pmf has empty support");
}

Rational JointSource::exact_px(int x) const {
  Rational s = 0;
  for (int y = 0; y < ny_; ++y) s += exact_p(x, y);
  return s;
}

Rational JointSource::exact_py(int y) const {
  Rational s = 0;
  for (int x = 0; x < nx_; ++x) s += exact_p(x, y);
  return s;
}

double JointSource::entropy_density(int x, int y, DensityKind kind) const {
  double pxy = p(x, y);
  if (pxy <= 0.0)
    throw ZeroProbability("entropy density queried outside the support");
  switch (kind) {
    case DensityKind::joint:
      return -log2_safe(pxy);
    case DensityKind::x_given_y:
      return -log2_safe(pxy / py_[y]);
    case DensityKind::y_given_x:
      return -log2_safe(pxy / px_[x]);
    case DensityKind::sum:
      return -log2_safe(pxy / py_[y]) - log2_safe(pxy / px_[x]);
  }
  throw Error("unreachable");
}

std::string JointSource::describe() const {
  std::ostringstream os;
  os << nx_ << "x" << ny_ << " source, support " << support_.size();
  return os.str();
}

DensityStats density_stats(const JointSource& src) {
  DensityStats st;
  double mean = 0.0;
  for (const auto& c : src.support()) {
    st.h_joint.push_back(c.h_joint);
    st.h_x_given_y.push_back(c.h_x_given_y);
    st.h_y_given_x.push_back(c.h_y_given_x);
    st.h_sum.push_back(c.h_sum);
    st.prob.push_back(c.p);
    mean += c.p * c.h_sum;
  }
  double var = 0.0, third = 0.0;
  for (const auto& c : src.support()) {
    double d = c.h_sum - mean;
    var += c.p * d * d;
    third += c.p * d * d * d;
  }
  st.mean = mean;
  st.variance = var;
  st.third_central_moment = third;
  return st;
}

CovarianceV covariance_v(const JointSource& src) {
  double m1 = 0.0, m2 = 0.0;
  for (const auto& c : src.support()) {
    m1 += c.p * c.h_x_given_y;
    m2 += c.p * c.h_y_given_x;
  }
  CovarianceV v;
  for (const auto& c : src.support()) {
    double d1 = c.h_x_given_y - m1;
    double d2 = c.h_y_given_x - m2;
    v.v11 += c.p * d1 * d1;
    v.v12 += c.p * d1 * d2;
    v.v22 += c.p * d2 * d2;
  }
  return v;
}

FiniteDistribution::FiniteDistribution(std::vector<Atom> atoms,
                                       double merge_tol) {
  if (atoms.empty()) throw Error("empty distribution");
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });
  double scale = std::max(1.0, std::abs(atoms.back().value));
  double tol = merge_tol * scale;
  for (const Atom& a : atoms) {
    if (!atoms_.empty() && a.value - atoms_.back().value <= tol)
      atoms_.back().prob += a.prob;
    else
      atoms_.push_back(a);
  }
}

double FiniteDistribution::total() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.prob;
  return s;
}

double FiniteDistribution::tail_gt(double gamma) const {
  double tol = 1e-9 * std::max(1.0, std::abs(gamma));
  double s = 0.0;
  for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it) {
    if (it->value > gamma + tol)
      s += it->prob;
    else
      break;
  }
  return s;
}

double FiniteDistribution::tail_geq(double gamma) const {
  double tol = 1e-9 * std::max(1.0, std::abs(gamma));
  double s = 0.0;
  for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it) {
    if (it->value >= gamma - tol)
      s += it->prob;
    else
      break;
  }
  return s;
}

FiniteDistribution FiniteDistribution::mixture(
    const std::vector<std::pair<double, FiniteDistribution>>& parts) {
  std::vector<Atom> atoms;
  for (const auto& [w, dist] : parts)
    for (const auto& a : dist.atoms()) atoms.push_back({a.value, w * a.prob});
  return FiniteDistribution(std::move(atoms));
}

SequenceSource::SequenceSource(JointSource base, int n) : n_(n) {
  if (n <= 0) throw Error("block length must be >= 1");
  components_.push_back({1.0, std::move(base)});
}

SequenceSource::SequenceSource(std::vector<Component> mixture, int n)
    : components_(std::move(mixture)), n_(n) {
  if (n <= 0) throw Error("block length must be >= 1");
  if (components_.empty()) throw Error("mixture needs at least one component");
  double wsum = 0.0;
  for (const auto& c : components_) {
    if (c.weight < 0.0) throw Error("mixture weights must be nonnegative");
    wsum += c.weight;
    if (c.source.nx() != components_.front().source.nx() ||
        c.source.ny() != components_.front().source.ny())
      throw Error("mixture components must share alphabets");
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw Error("mixture weights must sum to 1");
}

const JointSource& SequenceSource::base() const {
  if (is_mixture()) throw Error("mixture source has no single base component");
  return components_.front().source;
}

std::pair<Seq, Seq> SequenceSource::sample(Rng& rng) const {
  size_t k = 0;
  if (components_.size() > 1) {
    double u = rng.next_double();
    double acc = 0.0;
    for (size_t i = 0; i < components_.size(); ++i) {
      acc += components_[i].weight;
      if (u < acc) {
        k = i;
        break;
      }
      k = i;
    }
  }
  const JointSource& s = components_[k].source;
  Seq xs(n_), ys(n_);
  for (int i = 0; i < n_; ++i) {
    double u = rng.next_double();
    double acc = 0.0;
    int cx = s.nx() - 1, cy = s.ny() - 1;
    bool found = false;
    for (int x = 0; x < s.nx() && !found; ++x)
      for (int y = 0; y < s.ny() && !found; ++y) {
        acc += s.p(x, y);
        if (u < acc) {
          cx = x;
          cy = y;
          found = true;
        }
      }
    xs[i] = static_cast<Symbol>(cx);
    ys[i] = static_cast<Symbol>(cy);
  }
  return {xs, ys};
}

std::optional<double> SequenceSource::seq_density(const Seq& x, const Seq& y,
                                                  DensityKind kind) const {
  if (static_cast<int>(x.size()) != n_ || static_cast<int>(y.size()) != n_)
    throw Error("sequence length does not match block length");
  if (components_.size() == 1) {
    const JointSource& s = components_.front().source;
    double total = 0.0;
    for (int i = 0; i < n_; ++i) {
      if (!s.in_support(x[i], y[i])) return std::nullopt;
      total += s.entropy_density(x[i], y[i], kind);
    }
    return total;
  }
  // Mixture block densities: -log2 of the mixture probability ratios.
  auto block_logp = [&](auto cellp) -> double {
    // log2 sum_k w_k prod_i cellp(k, i); -inf when all terms vanish
    double best = -1e300;
    std::vector<double> logs;
    for (size_t k = 0; k < components_.size(); ++k) {
      if (components_[k].weight <= 0.0) continue;
      double lg = std::log2(components_[k].weight);
      bool dead = false;
      for (int i = 0; i < n_ && !dead; ++i) {
        double p = cellp(k, i);
        if (p <= 0.0)
          dead = true;
        else
          lg += std::log2(p);
      }
      if (dead) continue;
      logs.push_back(lg);
      best = std::max(best, lg);
    }
    if (logs.empty()) return -1e300;
    double acc = 0.0;
    for (double lg : logs) acc += std::exp2(lg - best);
    return best + std::log2(acc);
  };
  double ljoint = block_logp([&](size_t k, int i) {
    return components_[k].source.p(x[i], y[i]);
  });
  if (ljoint <= -1e299) return std::nullopt;
  double lx = block_logp(
      [&](size_t k, int i) { return components_[k].source.px(x[i]); });
  double ly = block_logp(
      [&](size_t k, int i) { return components_[k].source.py(y[i]); });
  switch (kind) {
    case DensityKind::joint:
      return -ljoint;
    case DensityKind::x_given_y:
      return -(ljoint - ly);
    case DensityKind::y_given_x:
      return -(ljoint - lx);
    case DensityKind::sum:
      return -(ljoint - ly) - (ljoint - lx);
  }
  throw Error("unreachable");
}

std::string SequenceSource::describe() const {
  std::ostringstream os;
  os << "n=" << n_ << ", " << components_.size() << " component(s)";
  return os.str();
}

namespace {

double cell_stat(const JointSource::SupportCell& c, DensityKind kind) {
  switch (kind) {
    case DensityKind::joint:
      return c.h_joint;
    case DensityKind::x_given_y:
      return c.h_x_given_y;
    case DensityKind::y_given_x:
      return c.h_y_given_x;
    case DensityKind::sum:
      return c.h_sum;
  }
  throw Error("unreachable");
}

// Distinct per-symbol levels of the statistic with their probabilities.
struct Levels {
  std::vector<double> value;
  std::vector<double> prob;
};

Levels symbol_levels(const JointSource& src, DensityKind kind) {
  std::vector<std::pair<double, double>> raw;
  for (const auto& c : src.support()) raw.push_back({cell_stat(c, kind), c.p});
  std::sort(raw.begin(), raw.end());
  Levels lv;
  for (const auto& [v, p] : raw) {
    if (!lv.value.empty() && v - lv.value.back() <= 1e-9 * std::max(1.0, v))
      lv.prob.back() += p;
    else {
      lv.value.push_back(v);
      lv.prob.push_back(p);
    }
  }
  return lv;
}

size_t compositions_count(int n, int k) {
  // C(n+k-1, k-1), saturating
  long double c = 1.0L;
  for (int i = 1; i < k; ++i) c = c * (n + i) / i;
  if (c > 1e18L) return static_cast<size_t>(1e18);
  return static_cast<size_t>(c);
}

// Enumerates count vectors over k levels summing to n.
template <typename Fn>
void for_each_composition(int n, int k, std::vector<int>& counts, int pos,
                          int remaining, Fn&& fn) {
  if (pos == k - 1) {
    counts[pos] = remaining;
    fn(counts);
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    counts[pos] = c;
    for_each_composition(n, k, counts, pos + 1, remaining - c, fn);
  }
}

FiniteDistribution component_convolution(const JointSource& src,
                                         DensityKind kind, int n,
                                         size_t atom_cap) {
  Levels lv = symbol_levels(src, kind);
  int k = static_cast<int>(lv.value.size());
  size_t natoms = compositions_count(n, k);
  if (natoms > atom_cap)
    throw ConvolutionOverflow(
        "exact convolution needs " + std::to_string(natoms) +
        " atoms (cap " + std::to_string(atom_cap) +
        "); use Monte Carlo instead");
  std::vector<double> logp(k), lgam(n + 2);
  for (int i = 0; i <= n + 1; ++i) lgam[i] = std::lgamma(i + 1.0);
  for (int j = 0; j < k; ++j) logp[j] = std::log(lv.prob[j]);
  std::vector<FiniteDistribution::Atom> atoms;
  atoms.reserve(natoms);
  std::vector<int> counts(k);
  for_each_composition(n, k, counts, 0, n, [&](const std::vector<int>& c) {
    double lg = lgam[n];
    double val = 0.0;
    for (int j = 0; j < k; ++j) {
      lg -= lgam[c[j]];
      lg += c[j] * logp[j];
      val += c[j] * lv.value[j];
    }
    atoms.push_back({val, std::exp(lg)});
  });
  return FiniteDistribution(std::move(atoms));
}

}  // namespace

FiniteDistribution exact_block_density_distribution(const SequenceSource& src,
                                                    DensityKind kind,
                                                    size_t atom_cap) {
  std::vector<std::pair<double, FiniteDistribution>> parts;
  for (const auto& comp : src.components()) {
    if (comp.weight <= 0.0) continue;
    parts.push_back(
        {comp.weight,
         component_convolution(comp.source, kind, src.n(), atom_cap)});
  }
  return FiniteDistribution::mixture(parts);
}

std::vector<std::pair<double, Rational>> exact_rational_sum_atoms(
    const SequenceSource& src, size_t atom_cap) {
  std::vector<std::pair<double, Rational>> out;
  for (const auto& comp : src.components()) {
    if (comp.weight <= 0.0) continue;
    const JointSource& s = comp.source;
    if (!s.has_exact())
      throw Error("exact rational convolution requires an exact-mode source");
    // group support cells by sum level
    std::vector<double> values;
    std::vector<Rational> probs;
    for (const auto& c : s.support()) {
      Rational pr = s.exact_p(c.x, c.y);
      bool merged = false;
      for (size_t j = 0; j < values.size(); ++j)
        if (std::abs(values[j] - c.h_sum) <= 1e-9) {
          probs[j] += pr;
          merged = true;
          break;
        }
      if (!merged) {
        values.push_back(c.h_sum);
        probs.push_back(pr);
      }
    }
    int k = static_cast<int>(values.size());
    int n = src.n();
    if (compositions_count(n, k) > atom_cap)
      throw ConvolutionOverflow("rational convolution exceeds atom cap");
    Rational wr(comp.weight);
    if (src.components().size() == 1) wr = 1;
    std::vector<int> counts(k);
    std::vector<BigInt> fact(n + 1);
    fact[0] = 1;
    for (int i = 1; i <= n; ++i) fact[i] = fact[i - 1] * i;
    for_each_composition(n, k, counts, 0, n, [&](const std::vector<int>& c) {
      BigInt coeff = fact[n];
      Rational pr = 1;
      double val = 0.0;
      for (int j = 0; j < k; ++j) {
        coeff /= fact[c[j]];
        for (int t = 0; t < c[j]; ++t) pr *= probs[j];
        val += c[j] * values[j];
      }
      out.push_back({val, wr * Rational(coeff) * pr});
    });
  }
  return out;
}

std::vector<JointDensityAtom> exact_pair_density_distribution(
    const SequenceSource& src, size_t atom_cap) {
  if (src.is_mixture())
    throw Error("pair density convolution supports single components only");
  const JointSource& s = src.base();
  // distinct (h1, h2) per-symbol levels
  std::vector<JointDensityAtom> levels;
  for (const auto& c : s.support()) {
    bool merged = false;
    for (auto& lv : levels)
      if (std::abs(lv.h_x_given_y - c.h_x_given_y) <= 1e-9 &&
          std::abs(lv.h_y_given_x - c.h_y_given_x) <= 1e-9) {
        lv.prob += c.p;
        merged = true;
        break;
      }
    if (!merged) levels.push_back({c.h_x_given_y, c.h_y_given_x, c.p});
  }
  int k = static_cast<int>(levels.size());
  int n = src.n();
  if (compositions_count(n, k) > atom_cap)
    throw ConvolutionOverflow("pair convolution exceeds atom cap");
  std::vector<double> lgam(n + 2);
  for (int i = 0; i <= n + 1; ++i) lgam[i] = std::lgamma(i + 1.0);
  std::vector<JointDensityAtom> atoms;
  std::vector<int> counts(k);
  for_each_composition(n, k, counts, 0, n, [&](const std::vector<int>& c) {
    double lg = lgam[n];
    double v1 = 0.0, v2 = 0.0;
    for (int j = 0; j < k; ++j) {
      lg -= lgam[c[j]];
      lg += c[j] * std::log(levels[j].prob);
      v1 += c[j] * levels[j].h_x_given_y;
      v2 += c[j] * levels[j].h_y_given_x;
    }
    atoms.push_back({v1, v2, std::exp(lg)});
  });
  return atoms;
}

uint64_t seq_index(const Seq& s, int alphabet) {
  uint64_t idx = 0;
  for (Symbol c : s) {
    if (c >= alphabet) throw Error("symbol outside alphabet");
    idx = idx * alphabet + c;
  }
  return idx;
}

Seq seq_from_index(uint64_t idx, int alphabet, int n) {
  Seq s(n);
  for (int i = n - 1; i >= 0; --i) {
    s[i] = static_cast<Symbol>(idx % alphabet);
    idx /= alphabet;
  }
  if (idx != 0) throw Error("index too large for sequence space");
  return s;
}

}  // namespace dx
