#ifndef DX_TYPESCHEME_HPP
#define DX_TYPESCHEME_HPP

#include <limits>
#include <optional>
#include <vector>

#include "dx/hashing.hpp"
#include "dx/session.hpp"
#include "dx/source.hpp"

namespace dx {

// Empirical joint type of a sequence pair: counts summing to n plus the
// entropies of the empirical distribution (bits).
struct JointType {
  int nx = 0, ny = 0, n = 0;
  std::vector<int> counts;  // row-major nx*ny

  int count(int x, int y) const { return counts[x * ny + y]; }
  int row_sum(int x) const;
  int col_sum(int y) const;

  double h_joint() const;       // H(X,Y) of the empirical pmf
  double h_x_given_y() const;
  double h_y_given_x() const;
  double h_sum() const { return h_x_given_y() + h_y_given_x(); }

  friend bool operator==(const JointType&, const JointType&) = default;
};

JointType joint_type(const Seq& x, const Seq& y, int nx, int ny);

// |T^n_{XY}|: number of pairs with this joint type.
BigInt type_class_size(const JointType& t);

// |T^n_{Y|X}(x)|: number of y with joint_type(x,y) == t, for any x whose
// type matches the row sums.
BigInt conditional_class_size(const JointType& t);

// Lexicographic rank of y within T^n_{Y|X}(x). Throws NotInClass if y does
// not realize the type. unrank is the inverse.
BigInt conditional_rank(const JointType& t, const Seq& x, const Seq& y);
Seq conditional_unrank(const JointType& t, const Seq& x, const BigInt& rank);

// Decode-timing schedule of the type-based protocol: r = ceil(R/step)
// rounds, R_i = i*step, and phi(P) = max{ i <= r : R_i < R - H(Y|X) }
// (0 when R - H(Y|X) - step <= 0).
struct PhiSchedule {
  double rate = 0.0;  // R, bits per symbol
  double step = 0.0;  // slice in rate units
  int rounds = 0;

  PhiSchedule() = default;
  PhiSchedule(double R, double delta);

  double r_i(int i) const { return i * step; }
  int bits_per_round(int n) const;
  int phi(double h_y_given_x) const;
  int phi(const JointType& t) const { return phi(t.h_y_given_x()); }
};

struct TypeProtocolParams {
  PhiSchedule schedule;
  double l_max = std::numeric_limits<double>::infinity();
};

ExchangeOutcome type_protocol(const SequenceSource& src, const Seq& x,
                              const Seq& y, const TypeProtocolParams& params,
                              const SessionRandomness& rnd,
                              Transcript* transcript_out = nullptr);

std::unique_ptr<PartyMachine> make_type_party(int party,
                                              const SequenceSource& src,
                                              Seq obs,
                                              const TypeProtocolParams& params,
                                              uint64_t public_seed);

// Exhaustive verification of the hash-count lemma for the chains drawn from
// `public_seed`: for every joint triple type with phi != 0,
//   N_h / |T^n_{XY}| <= 2^{-n (R_phi - H(Xhat|X,Y) - delta_n)},
// delta_n = |X|^2 |Y| log2(n+1) / n. Binary alphabets, n <= 10.
struct HashCountReport {
  bool ok = false;
  uint64_t seed = 0;
  int violations = 0;
  double worst_slack = 0.0;  // min over triples of log2(bound) - log2(ratio)
  int triples_checked = 0;
};

HashCountReport hash_count_check(uint64_t public_seed,
                                 const PhiSchedule& sched, int n, int nx,
                                 int ny);

// Draw-and-verify realization of the existence lemma; gives up after
// `max_redraws` redraws.
struct GoodHashDraw {
  uint64_t seed = 0;
  int redraws = 0;
  HashCountReport report;
};
GoodHashDraw draw_good_hash(uint64_t seed0, const PhiSchedule& sched, int n,
                            int nx, int ny, int max_redraws = 16);

// ---- error exponents ----

// E_r(R)  = min_Q [ D(Q||P) + (R - H_Q(X dY))_+ ]
// E_sp(R) = inf { D(Q||P) : H_Q(X dY) > R }       (+inf when empty)
// E_sp_s(R) = max_{R1+R2 <= R} inf { D(Q||P) : H_Q(X|Y) > R1 or H_Q(Y|X) > R2 }
// All distributions Q range over the support of P (else D = +inf); grid on
// the simplex at `grid_res` with local pattern-search refinement.
struct ExponentReport {
  double rate = 0.0;
  double e_r = 0.0;
  double e_sp = 0.0;         // 1e300 encodes +inf (empty constraint set)
  double e_sp_simple = 0.0;
  std::vector<double> q_er, q_esp;  // achieving distributions (support order)
  double split_r1 = 0.0;            // achieving split of e_sp_simple
};

ExponentReport exponents(const JointSource& src, double rate,
                         double grid_res = 1e-3);

// 1-D reduction for sources with a 3-point support parameterized as
// (u, 1-u-v, v): minimizes D along the symmetric line u = v on the
// constraint boundary. Used to cross-check the 2-D grid.
double esp_symmetric_reduction(const JointSource& src, double rate);

}  // namespace dx

#endif
