#include "dx/bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "dx/errors.hpp"
#include "dx/hashing.hpp"

namespace dx {

namespace {
constexpr double kNegInf = -1e300;
constexpr double kPosInf = 1e300;
}  // namespace

double gaussian_q(double a) { return 0.5 * std::erfc(a / std::sqrt(2.0)); }

double gaussian_q_inv(double eps) {
  if (eps <= 0.0 || eps >= 1.0) throw Error("Q_inv argument must be in (0,1)");
  // Acklam's rational approximation for the normal quantile, then one
  // Halley refinement against erfc.
  static const double A[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double B[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double C[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double D[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  double p = 1.0 - eps;  // Phi^{-1}(p) = Q^{-1}(eps)
  const double plow = 0.02425, phigh = 1.0 - plow;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
        ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
  } else if (p <= phigh) {
    double q = p - 0.5, r = q * q;
    x = (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) *
        q /
        (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
        ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
  }
  return x;
}

double beta_epsilon(const std::vector<double>& p, const std::vector<double>& q,
                    double eps) {
  if (p.size() != q.size()) throw Error("P and Q need the same universe");
  if (eps < 0.0 || eps >= 1.0) throw Error("eps must lie in [0,1)");
  std::vector<size_t> order;
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return q[a] * p[b] < q[b] * p[a];  // q/p ascending without dividing
  });
  double need = 1.0 - eps;
  double beta = 0.0;
  for (size_t i : order) {
    if (need <= 0.0) break;
    if (p[i] >= need) {
      beta += q[i] * (need / p[i]);  // randomized acceptance of the boundary atom
      need = 0.0;
    } else {
      beta += q[i];
      need -= p[i];
    }
  }
  return beta;
}

double beta_upper_bound(const std::vector<double>& p,
                        const std::vector<double>& q, double eps,
                        double lambda) {
  if (p.size() != q.size()) throw Error("P and Q need the same universe");
  double mass = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) continue;  // log ratio +inf, never below lambda
    if (std::log2(p[i] / q[i]) < lambda) mass += p[i];
  }
  double inner = mass - eps;
  if (inner <= 0.0) return kPosInf;
  return lambda - std::log2(inner);
}

ConverseBound singleshot_converse(double gamma, double p_gamma, double eps,
                                  double eta, const SpectrumPlan& joint_plan,
                                  double p_t0) {
  if (eps < 0.0 || eps >= 1.0) throw Error("eps must lie in [0,1)");
  if (eta <= 0.0 || eta >= 1.0 - eps || eta >= 0.5)
    throw Error("eta must lie in (0, min(1-eps, 1/2))");
  ConverseBound b;
  b.gamma = gamma;
  b.eta = eta;
  b.n_slices = joint_plan.n_slices;
  double n = joint_plan.n_slices;
  double inner = p_gamma - eps - p_t0 - 1.0 / n;
  if (inner <= 0.0) {
    b.vacuous = true;
    b.raw = kNegInf;
    b.value = 0.0;
    return b;
  }
  b.raw = gamma + 3.0 * std::log2(inner) + std::log2(1.0 - 2.0 * eta) -
          joint_plan.delta - 6.0 * std::log2(n) - 4.0 * std::log2(1.0 / eta) -
          1.0;
  b.value = std::max(0.0, b.raw);
  b.vacuous = b.raw <= 0.0;
  return b;
}

ConverseBound best_singleshot_converse(const FiniteDistribution& sum_density,
                                       const FiniteDistribution& joint_density,
                                       double eps) {
  double lo = joint_density.min_value();
  double hi = joint_density.max_value();
  // widen the top so the whole support lies inside the sliced region
  double bump = 1e-9 * std::max(1.0, std::abs(hi));
  double width = std::max(hi - lo, 0.0) + bump;
  ConverseBound best;
  best.vacuous = true;
  static const int kSliceGrid[] = {2, 4, 8, 16, 32, 64, 128};
  static const double kEtaGrid[] = {0.01, 0.05, 0.1, 0.2, 0.3, 0.45};
  for (int n : kSliceGrid) {
    SpectrumPlan plan = plan_from_bounds(lo, lo + width, width / n);
    double pt0 = p_t0(plan, joint_density);
    for (double eta : kEtaGrid) {
      if (eta >= 1.0 - eps || eta >= 0.5) continue;
      for (const auto& atom : sum_density.atoms()) {
        // Evaluate at the left limit gamma -> atom: the bound holds for
        // every gamma, so the supremum over gamma just below the atom
        // (where the strict tail still includes it) is a valid bound.
        double gamma = atom.value;
        double p_gamma = sum_density.tail_geq(gamma);
        ConverseBound b =
            singleshot_converse(gamma, p_gamma, eps, eta, plan, pt0);
        if (b.value > best.value || (best.vacuous && !b.vacuous)) best = b;
      }
    }
  }
  return best;
}

ConverseBound almost_uniform_converse(const JointSource& src, double eps,
                                      double eta, double gamma,
                                      double margin_delta,
                                      const std::vector<double>* qx,
                                      const std::vector<double>* qy) {
  if (eta <= 0.0 || eta >= (1.0 - eps) / 2.0)
    throw Error("eta must lie in (0, (1-eps)/2)");
  double lo = kPosInf, hi = kNegInf;
  for (const auto& c : src.support()) {
    lo = std::min(lo, c.h_joint);
    hi = std::max(hi, c.h_joint);
  }
  if (hi - lo > margin_delta + 1e-9)
    throw NotAlmostUniform("joint spectrum wider than the declared margin");
  double mass = 0.0;
  for (const auto& c : src.support()) {
    double qxv = qx ? (*qx)[c.x] : src.px(c.x);
    double qyv = qy ? (*qy)[c.y] : src.py(c.y);
    if (qxv <= 0.0 || qyv <= 0.0) {
      mass += c.p;  // ratio density +inf, always above gamma
      continue;
    }
    double val = -std::log2(c.p * c.p / (qxv * qyv));
    if (val >= gamma - 1e-12) mass += c.p;
  }
  ConverseBound b;
  b.gamma = gamma;
  b.eta = eta;
  double inner = mass - eps - 2.0 * eta;
  if (inner <= 0.0) {
    b.vacuous = true;
    b.raw = kNegInf;
    b.value = 0.0;
    return b;
  }
  b.raw = gamma + std::log2(inner) - margin_delta -
          4.0 * std::log2(1.0 / eta) - 1.0;
  b.value = std::max(0.0, b.raw);
  b.vacuous = b.raw <= 0.0;
  return b;
}

KeyExtractionReport extract_key(const std::vector<double>& px,
                                const std::vector<int>& z_of_x,
                                int z_alphabet, double eta, int key_bits,
                                uint64_t seed, uint64_t x_realization) {
  if (px.empty()) throw Error("empty material distribution");
  if (!z_of_x.empty() && z_of_x.size() != px.size())
    throw Error("leak map size mismatch");
  if (z_alphabet < 1) throw Error("leak alphabet must be >= 1");
  if (eta <= 0.0 || eta > 1.0) throw Error("eta must lie in (0,1]");
  if (key_bits < 0) throw Error("key length must be >= 0");
  double pmax = *std::max_element(px.begin(), px.end());
  KeyExtractionReport rep;
  rep.key_bits = key_bits;
  rep.h_min = -std::log2(pmax);
  double leak_bits = std::log2(static_cast<double>(z_alphabet));
  double allowed =
      rep.h_min - leak_bits - 2.0 * std::log2(1.0 / eta) - 1.0;
  if (static_cast<double>(key_bits) > allowed + 1e-9)
    throw KeyTooLong("requested key length exceeds H_min - l - 2log(1/eta) - 1");
  rep.lemma3_bound = std::sqrt(std::exp2(static_cast<double>(key_bits)) *
                               static_cast<double>(z_alphabet) *
                               std::exp2(-rep.h_min));

  int m = 1;
  while ((1ull << m) < px.size()) ++m;
  if (x_realization >= (1ull << m)) throw Error("realization outside universe");

  if (key_bits == 0) {
    rep.exact_available = true;
    rep.exact_distance = 0.0;
    return rep;
  }

  HashChain chain = HashChain(seed, m).extend(key_bits);
  rep.key = chain.hash(x_realization);

  if (key_bits * m <= 20) {
    // Enumerate the whole family: matrices are key_bits rows of m bits each.
    rep.exact_available = true;
    uint64_t nmat = 1ull << (key_bits * m);
    uint64_t nkey = 1ull << key_bits;
    double dist = 0.0;
    std::vector<double> pz(z_alphabet, 0.0);
    for (size_t x = 0; x < px.size(); ++x)
      pz[z_of_x.empty() ? 0 : z_of_x[x]] += px[x];
    std::vector<double> joint(nkey * z_alphabet);
    for (uint64_t mat = 0; mat < nmat; ++mat) {
      std::fill(joint.begin(), joint.end(), 0.0);
      for (size_t x = 0; x < px.size(); ++x) {
        uint64_t k = 0;
        for (int r = 0; r < key_bits; ++r) {
          uint64_t row = (mat >> (r * m)) & ((1ull << m) - 1);
          k = (k << 1) |
              static_cast<uint64_t>(std::popcount(row & x) & 1);
        }
        joint[k * z_alphabet + (z_of_x.empty() ? 0 : z_of_x[x])] += px[x];
      }
      for (uint64_t k = 0; k < nkey; ++k)
        for (int z = 0; z < z_alphabet; ++z)
          dist += std::abs(joint[k * z_alphabet + z] - pz[z] / nkey);
    }
    rep.exact_distance = 0.5 * dist / static_cast<double>(nmat);
  }
  return rep;
}

// ---- simple protocol bound ----

namespace {

struct PairDist {
  std::vector<JointDensityAtom> atoms;
  std::vector<double> v1, v2;  // distinct marginal support values, sorted

  // P(h1 >= t1 or h2 >= t2), tolerant comparisons.
  double survival_geq(double t1, double t2) const {
    double s = 0.0;
    for (const auto& a : atoms)
      if (a.h_x_given_y >= t1 - 1e-9 || a.h_y_given_x >= t2 - 1e-9)
        s += a.prob;
    return s;
  }
};

bool simple_feasible(const PairDist& d, double eps, double l1, double l2) {
  // Constraint must hold for every delta > 0; it can only bind at the left
  // limits of the jump points of the survival function along the diagonal.
  std::vector<double> jumps;
  for (double v : d.v1)
    if (v - l1 > 1e-12) jumps.push_back(v - l1);
  for (double v : d.v2)
    if (v - l2 > 1e-12) jumps.push_back(v - l2);
  for (double b : jumps) {
    double lhs = d.survival_geq(l1 + b, l2 + b);
    double rhs = eps + 2.0 * std::exp2(-b);
    if (lhs > rhs + 1e-12) return false;
  }
  return true;
}

}  // namespace

SimpleProtocolBound simple_protocol_bound(
    const std::vector<JointDensityAtom>& pair_density, double eps) {
  if (eps < 0.0 || eps >= 1.0) throw Error("eps must lie in [0,1)");
  PairDist d;
  d.atoms = pair_density;
  for (const auto& a : pair_density) {
    d.v1.push_back(a.h_x_given_y);
    d.v2.push_back(a.h_y_given_x);
  }
  auto dedupe = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(),
                        [](double a, double b) { return b - a <= 1e-9; }),
            v.end());
  };
  dedupe(d.v1);
  dedupe(d.v2);

  // Candidate corners: both jump constraints tight at the same delta. The
  // survival level s at a corner fixes delta = log2(2/(s-eps)).
  std::vector<std::pair<double, double>> cands;
  auto add_cand = [&](double l1, double l2) {
    cands.push_back({std::max(0.0, l1), std::max(0.0, l2)});
  };
  std::vector<double> levels;
  for (double a1 : d.v1)
    for (double a2 : d.v2) levels.push_back(d.survival_geq(a1, a2));
  for (double a1 : d.v1) levels.push_back(d.survival_geq(a1, kPosInf));
  for (double a2 : d.v2) levels.push_back(d.survival_geq(kNegInf, a2));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  for (double s : levels) {
    if (s <= eps) continue;
    double delta = std::log2(2.0 / (s - eps));
    if (delta <= 0.0) delta = 1e-9;
    for (double a1 : d.v1)
      for (double a2 : d.v2) add_cand(a1 - delta, a2 - delta);
    for (double a1 : d.v1) add_cand(a1 - delta, 0.0);
    for (double a2 : d.v2) add_cand(0.0, a2 - delta);
  }
  add_cand(d.v1.back(), d.v2.back());  // always feasible fallback

  SimpleProtocolBound best;
  best.value = kPosInf;
  for (auto [l1, l2] : cands) {
    if (!simple_feasible(d, eps, l1, l2)) continue;
    if (l1 + l2 < best.value) {
      best.value = l1 + l2;
      best.l1 = l1;
      best.l2 = l2;
    }
  }
  // Diagonal shrink onto the feasibility boundary.
  double t_lo = 0.0, t_hi = std::min(best.l1, best.l2);
  if (t_hi > 0.0) {
    for (int it = 0; it < 60; ++it) {
      double t = 0.5 * (t_lo + t_hi);
      if (simple_feasible(d, eps, best.l1 - t, best.l2 - t))
        t_lo = t;
      else
        t_hi = t;
    }
    best.l1 -= t_lo;
    best.l2 -= t_lo;
    best.value = best.l1 + best.l2;
  }
  return best;
}

SecondOrderLength second_order_length(double H, double V, double T, double n,
                                      double eps) {
  if (eps <= 0.0 || eps >= 1.0) throw Error("eps must lie in (0,1)");
  SecondOrderLength r;
  if (V <= 0.0) {
    r.value = n * H;
    r.degenerate_variance = true;
    return r;
  }
  double qinv = gaussian_q_inv(eps);
  r.value = n * H + std::sqrt(n * V) * qinv;
  double shift = 6.0 * std::abs(T) / (std::sqrt(n) * std::pow(V, 1.5));
  double lo = eps - shift, hi = eps + shift;
  if (lo > 0.0 && hi < 1.0) {
    r.band_valid = true;
    r.band = std::sqrt(n * V) *
             std::max(std::abs(gaussian_q_inv(lo) - qinv),
                      std::abs(gaussian_q_inv(hi) - qinv));
  }
  return r;
}

// ---- D_eps ----

namespace {

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
const double kGlx[8] = {0.0950125098376374, 0.2816035507792589,
                        0.4580167776572274, 0.6178762444026438,
                        0.7554044083550030, 0.8656312023878318,
                        0.9445750230732326, 0.9894009349916499};
const double kGlw[8] = {0.1894506104550685, 0.1826034150449236,
                        0.1691565193950025, 0.1495959888165767,
                        0.1246289712555339, 0.0951585116824928,
                        0.0622535239386479, 0.0271524594117541};

double std_normal_pdf(double u) {
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
}
double std_normal_cdf(double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); }

}  // namespace

double bivariate_normal_cdf(double r1, double r2, const CovarianceV& v) {
  double s1 = std::sqrt(v.v11), s2 = std::sqrt(v.v22);
  double rho = v.v12 / (s1 * s2);
  double a = r1 / s1, b = r2 / s2;
  double root = std::sqrt(1.0 - rho * rho);
  if (a <= -8.0) return 0.0;
  double lo = -8.0;
  double total = 0.0;
  int panels = static_cast<int>(std::ceil((a - lo) / 0.5));
  panels = std::max(1, panels);
  double h = (a - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    double c = lo + (p + 0.5) * h;
    double half = 0.5 * h;
    for (int j = 0; j < 8; ++j) {
      for (double sgn : {-1.0, 1.0}) {
        double u = c + sgn * half * kGlx[j];
        total += kGlw[j] * half * std_normal_pdf(u) *
                 std_normal_cdf((b - rho * u) / root);
      }
    }
  }
  return total;
}

double d_epsilon(const CovarianceV& v, double eps) {
  if (eps <= 0.0 || eps >= 1.0) throw Error("eps must lie in (0,1)");
  double det = v.v11 * v.v22 - v.v12 * v.v12;
  double scale = std::max({v.v11, v.v22, 1e-300});
  double qinv = gaussian_q_inv(eps);
  if (v.v11 < 0.0 || v.v22 < 0.0 || det < -1e-9 * scale * scale)
    throw Error("covariance must be positive semidefinite");
  if (det <= 1e-12 * scale * scale) {
    // Singular: Z2 = c Z1; interaction cannot help and the bound collapses
    // to the one-dimensional quantile of the sum.
    if (v.v11 <= 1e-300 && v.v22 <= 1e-300) return 0.0;
    if (v.v11 <= 1e-300 || v.v22 <= 1e-300 || v.v12 >= 0.0) {
      double c = v.v11 > 1e-300 ? v.v12 / v.v11 : 0.0;
      if (v.v11 <= 1e-300) return std::sqrt(v.v22) * qinv;
      if (v.v22 <= 1e-300) return std::sqrt(v.v11) * qinv;
      return (1.0 + c) * std::sqrt(v.v11) * qinv;
    }
    // anticorrelated degenerate pair: same closed form
    return std::sqrt(std::max(v.v11 + 2.0 * v.v12 + v.v22, 0.0)) * qinv;
  }
  double s1 = std::sqrt(v.v11), s2 = std::sqrt(v.v22);
  double target = 1.0 - eps;
  auto r2_for = [&](double r1) {
    double cap = std_normal_cdf(r1 / s1);
    if (cap <= target) return kPosInf;
    double lo = -10.0 * s2, hi = 10.0 * s2 + std::abs(r1);
    while (bivariate_normal_cdf(r1, hi, v) < target) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (bivariate_normal_cdf(r1, mid, v) >= target)
        hi = mid;
      else
        lo = mid;
      if (hi - lo < 1e-11 * std::max(1.0, std::abs(hi))) break;
    }
    return hi;
  };
  // Objective r1 + r2(r1) on r1 > s1 Q_inv(eps); golden-section search.
  double lo = s1 * qinv + 1e-6 * std::max(s1, 1.0);
  double hi = s1 * (std::abs(qinv) + 10.0);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = x1 + r2_for(x1), f2 = x2 + r2_for(x2);
  for (int it = 0; it < 120; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = x1 + r2_for(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = x2 + r2_for(x2);
    }
    if (hi - lo < 1e-9 * std::max(1.0, std::abs(hi))) break;
  }
  return std::min(f1, f2);
}

}  // namespace dx
