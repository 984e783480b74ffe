#include "dx/protocols.hpp"

#include <cmath>

#include "dx/errors.hpp"

namespace dx {

int sequence_input_bits(int alphabet, int n) {
  BigInt space = 1;
  for (int i = 0; i < n; ++i) space *= alphabet;
  int m = 0;
  BigInt pow = 1;
  while (pow < space) {
    pow <<= 1;
    ++m;
  }
  return std::max(1, m);
}

InteractiveSwParams make_interactive_sw_params(const SpectrumPlan& plan,
                                               double eta) {
  InteractiveSwParams p;
  p.plan = plan;
  p.eta = eta;
  double rounded = std::round(plan.delta);
  if (std::abs(plan.delta - rounded) > 1e-9 || rounded < 1.0)
    throw Error("protocol slice width must be a whole number of bits >= 1");
  p.delta_bits = static_cast<int>(rounded);
  p.first_message_bits = static_cast<int>(
      std::ceil(plan.lambda_min + plan.delta + eta - 1e-9));
  if (p.first_message_bits < 1)
    throw Error("first message must carry at least 1 bit");
  return p;
}

SpectrumPlan make_protocol_plan(const FiniteDistribution& cond_density,
                                int explicit_delta_bits) {
  double lo = cond_density.min_value();
  double hi = cond_density.max_value();
  double width = hi - lo;
  int delta = explicit_delta_bits > 0
                  ? explicit_delta_bits
                  : std::max(1, static_cast<int>(std::ceil(
                                    std::sqrt(std::max(width, 0.0)) - 1e-9)));
  return plan_from_bounds(lo, hi, static_cast<double>(delta));
}

Theorem2Budget theorem2_budget(const FiniteDistribution& sum_density,
                               double eps, const SpectrumPlan& cond_plan,
                               const FiniteDistribution& cond_density,
                               double eta) {
  if (eps <= 0.0 || eps >= 1.0) throw Error("eps must lie in (0,1)");
  Theorem2Budget b;
  b.lambda_eps = tail_quantile(sum_density, eps);
  b.l_max = b.lambda_eps + cond_plan.delta + cond_plan.n_slices + eta + 1.0;
  b.p_t0 = p_t0(cond_plan, cond_density);
  b.predicted_error_bound = sum_density.tail_gt(b.lambda_eps) + b.p_t0 +
                            cond_plan.n_slices * std::exp2(-eta);
  return b;
}

// ---- conditional exact code ----

namespace {

Rational cond_prob(const JointSource& src, int x, int y) {
  if (src.has_exact()) {
    Rational px = src.exact_px(x);
    if (px == 0) throw ZeroProbability("conditioning symbol has probability 0");
    return src.exact_p(x, y) / px;
  }
  Rational px(src.px(x));
  if (px == 0) throw ZeroProbability("conditioning symbol has probability 0");
  return Rational(src.p(x, y)) / px;
}

int codeword_length(const Rational& width) {
  // smallest L >= 1 with 2^-L <= width/2
  BigInt num = numerator(width), den = denominator(width);
  int L = 1;
  BigInt pow = 2;  // 2^L
  while (pow * num < 2 * den) {
    pow <<= 1;
    ++L;
  }
  return L;
}

}  // namespace

BitString conditional_exact_encode(const JointSource& src, const Seq& x,
                                   const Seq& y) {
  if (x.size() != y.size()) throw Error("sequence length mismatch");
  Rational low = 0, width = 1;
  for (size_t i = 0; i < x.size(); ++i) {
    Rational cum = 0;
    for (int b = 0; b < y[i]; ++b) cum += cond_prob(src, x[i], b);
    Rational p = cond_prob(src, x[i], y[i]);
    if (p == 0)
      throw ZeroProbability("encoding a symbol outside the conditional support");
    low += width * cum;
    width *= p;
  }
  int L = codeword_length(width);
  Rational z = low + width / 2;
  BitString code;
  for (int j = 0; j < L; ++j) {
    z *= 2;
    if (z >= 1) {
      code.push_back(true);
      z -= 1;
    } else {
      code.push_back(false);
    }
  }
  return code;
}

Seq conditional_exact_decode(const JointSource& src, const Seq& x,
                             const BitString& code) {
  Rational v = 0, scale = 1;
  for (size_t j = 0; j < code.size(); ++j) {
    scale /= 2;
    if (code.bit(j)) v += scale;
  }
  Seq y(x.size());
  Rational low = 0, width = 1;
  for (size_t i = 0; i < x.size(); ++i) {
    bool found = false;
    Rational cum = 0;
    for (int b = 0; b < src.ny(); ++b) {
      Rational p = cond_prob(src, x[i], b);
      if (p == 0) continue;
      Rational seg_lo = low + width * cum;
      Rational seg_hi = low + width * (cum + p);
      if (v >= seg_lo && v < seg_hi) {
        y[i] = static_cast<Symbol>(b);
        low = seg_lo;
        width *= p;
        found = true;
        break;
      }
      cum += p;
    }
    if (!found)
      throw Error("codeword does not fall in any conditional interval");
  }
  return y;
}

// ---- Protocol 1 machines ----

namespace {

HashChain build_chain(uint64_t public_seed, int input_bits,
                      const InteractiveSwParams& params) {
  HashChain chain = HashChain(public_seed, input_bits)
                        .extend(params.first_message_bits);
  for (int i = 2; i <= params.plan.n_slices; ++i)
    chain = chain.extend(params.delta_bits);
  return chain;
}

Message one_bit(int sender, bool ack) {
  BitString b;
  b.push_back(ack);
  return {sender, ack ? MsgKind::ack : MsgKind::nack, b};
}

}  // namespace

SwSender::SwSender(uint64_t x_index, int input_bits,
                   const InteractiveSwParams& params, uint64_t public_seed)
    : x_(x_index), params_(params),
      chain_(build_chain(public_seed, input_bits, params)) {}

std::optional<Message> SwSender::poll() {
  if (done_ || awaiting_feedback_) return std::nullopt;
  if (round_ > params_.plan.n_slices) {
    done_ = true;
    return std::nullopt;
  }
  Message m{1, MsgKind::hash_block, chain_.hash_block(round_ - 1, x_)};
  awaiting_feedback_ = true;
  return m;
}

void SwSender::deliver(const Message& m) {
  if (m.kind == MsgKind::ack) {
    got_ack_ = true;
    done_ = true;
  } else if (m.kind == MsgKind::nack) {
    awaiting_feedback_ = false;
    ++round_;
    if (round_ > params_.plan.n_slices) done_ = true;  // all slices exhausted
  } else {
    throw Error("unexpected message kind at SW sender");
  }
}

SwReceiver::SwReceiver(const SequenceSource& src, Seq y,
                       const InteractiveSwParams& params, uint64_t public_seed)
    : src_(src), y_(std::move(y)), params_(params),
      chain_(build_chain(public_seed,
                         sequence_input_bits(src.nx(), src.n()), params)) {
  int m = chain_.input_bits();
  if (m > 24)
    throw Error("decoder gate: |X|^n above 2^24, candidate enumeration off");
  uint64_t space = 1;
  for (int i = 0; i < src.n(); ++i) space *= src.nx();
  for (uint64_t idx = 0; idx < space; ++idx) {
    Seq cand = seq_from_index(idx, src.nx(), src.n());
    auto d = src.seq_density(cand, y_, DensityKind::x_given_y);
    if (!d) continue;  // outside support, never decodable
    alive_.push_back({idx, params_.plan.slice_index(*d)});
  }
}

void SwReceiver::process_block(const Message& m) {
  int block = round_ - 1;
  std::vector<Candidate> next;
  next.reserve(alive_.size());
  for (const Candidate& c : alive_)
    if (chain_.hash_block(block, c.idx) == m.payload) next.push_back(c);
  alive_ = std::move(next);
  int hits = 0;
  const Candidate* found = nullptr;
  for (const Candidate& c : alive_)
    if (c.slice == round_) {
      ++hits;
      found = &c;
    }
  if (hits == 1) {
    x_hat_ = seq_from_index(found->idx, src_.nx(), src_.n());
    stop_slice_ = round_;
    send_ack_ = true;
    feedback_ready_ = true;
  } else if (hits > 1) {
    // More than one candidate in the slice: declare error, no NACK.
    error_ = ErrorKind::ambiguous;
    done_ = true;
  } else {
    send_ack_ = false;
    feedback_ready_ = true;
  }
}

void SwReceiver::deliver(const Message& m) {
  if (m.kind != MsgKind::hash_block)
    throw Error("unexpected message kind at SW receiver");
  process_block(m);
}

std::optional<Message> SwReceiver::poll() {
  if (done_ || !feedback_ready_) return std::nullopt;
  feedback_ready_ = false;
  Message m = one_bit(2, send_ack_);
  if (send_ack_) {
    done_ = true;
  } else {
    ++round_;
    if (round_ > params_.plan.n_slices) done_ = true;  // no candidate found
  }
  return m;
}

// ---- data exchange machines ----

ExchangeSender::ExchangeSender(const SequenceSource& src, Seq x,
                               const ExchangeParams& params,
                               uint64_t public_seed)
    : src_(src), x_(std::move(x)),
      sw_(seq_index(x_, src.nx()),
          sequence_input_bits(src.nx(), src.n()), params.sw, public_seed) {}

std::optional<Message> ExchangeSender::poll() { return sw_.poll(); }

void ExchangeSender::deliver(const Message& m) {
  if (m.kind == MsgKind::index_payload) {
    y_hat_ = conditional_exact_decode(src_.base(), x_, m.payload);
    phase2_done_ = true;
    return;
  }
  sw_.deliver(m);
  if (m.kind == MsgKind::nack && sw_.done() && !sw_.got_ack())
    phase2_done_ = true;  // phase 1 failed, nothing more will arrive
}

bool ExchangeSender::done() const { return sw_.done() && phase2_done_; }

void ExchangeSender::session_aborted(ErrorKind k) {
  sw_.session_aborted(k);
  phase2_done_ = true;
}

ExchangeReceiver::ExchangeReceiver(const SequenceSource& src, Seq y,
                                   const ExchangeParams& params,
                                   uint64_t public_seed)
    : SwReceiver(src, std::move(y), params.sw, public_seed) {}

std::optional<Message> ExchangeReceiver::poll() {
  if (auto m = SwReceiver::poll()) return m;
  if (done_ && x_hat_ && !codeword_sent_ && error_ == ErrorKind::none) {
    codeword_sent_ = true;
    const Seq& xh = *x_hat_;
    const JointSource& base = src_.base();
    for (size_t i = 0; i < xh.size(); ++i)
      if (!(base.p(xh[i], y_[i]) > 0.0)) {
        // Decoded candidate cannot have produced y: detected wrong decode.
        error_ = ErrorKind::no_candidate;
        return std::nullopt;
      }
    return Message{2, MsgKind::index_payload,
                   conditional_exact_encode(base, xh, y_)};
  }
  return std::nullopt;
}

bool ExchangeReceiver::done() const {
  if (!SwReceiver::done()) return false;
  if (x_hat_ && error_ == ErrorKind::none) return codeword_sent_;
  return true;
}

void ExchangeReceiver::session_aborted(ErrorKind k) {
  SwReceiver::session_aborted(k);
  codeword_sent_ = true;
}

// ---- one-shot wrappers ----

namespace {

// Party 2 of the noninteractive baseline: decode after the single block.
class BaselineReceiver : public PartyMachine {
 public:
  BaselineReceiver(const SequenceSource& src, Seq y, int l, double eta,
                   uint64_t public_seed)
      : src_(src), y_(std::move(y)), l_(l), eta_(eta),
        chain_(HashChain(public_seed,
                         sequence_input_bits(src.nx(), src.n()))
                   .extend(l)) {
    if (chain_.input_bits() > 24)
      throw Error("decoder gate: |X|^n above 2^24");
  }

  std::optional<Message> poll() override { return std::nullopt; }

  void deliver(const Message& m) override {
    uint64_t space = 1;
    for (int i = 0; i < src_.n(); ++i) space *= src_.nx();
    int hits = 0;
    uint64_t found = 0;
    for (uint64_t idx = 0; idx < space; ++idx) {
      Seq cand = seq_from_index(idx, src_.nx(), src_.n());
      auto d = src_.seq_density(cand, y_, DensityKind::x_given_y);
      if (!d || *d > l_ - eta_) continue;
      if (chain_.hash(idx) == m.payload) {
        ++hits;
        found = idx;
      }
    }
    if (hits == 1)
      x_hat_ = seq_from_index(found, src_.nx(), src_.n());
    else
      error_ = hits == 0 ? ErrorKind::no_candidate : ErrorKind::ambiguous;
    done_ = true;
  }

  bool done() const override { return done_; }
  void session_aborted(ErrorKind) override { done_ = true; }
  std::optional<Seq> estimate() const override { return x_hat_; }
  ErrorKind local_error() const override { return ErrorKind::none; }

  std::optional<Seq> x_hat_;
  ErrorKind error_ = ErrorKind::none;

 private:
  const SequenceSource& src_;
  Seq y_;
  int l_;
  double eta_;
  HashChain chain_;
  bool done_ = false;
};

class BaselineSender : public PartyMachine {
 public:
  BaselineSender(uint64_t x_index, int input_bits, int l, uint64_t public_seed)
      : x_(x_index), chain_(HashChain(public_seed, input_bits).extend(l)) {}

  std::optional<Message> poll() override {
    if (sent_) return std::nullopt;
    sent_ = true;
    return Message{1, MsgKind::hash_block, chain_.hash(x_)};
  }
  void deliver(const Message&) override {}
  bool done() const override { return sent_; }
  void session_aborted(ErrorKind) override { sent_ = true; }

 private:
  uint64_t x_;
  HashChain chain_;
  bool sent_ = false;
};

int64_t phase2_bits_of(const Transcript& t) {
  int64_t s = 0;
  for (const auto& e : t.entries)
    if (e.kind == MsgKind::type_header || e.kind == MsgKind::index_payload)
      s += static_cast<int64_t>(e.payload.size());
  return s;
}

}  // namespace

ExchangeOutcome baseline_sw(const SequenceSource& src, const Seq& x,
                            const Seq& y, int l, double eta,
                            const SessionRandomness& rnd) {
  if (l <= eta) throw Error("baseline needs l > eta");
  BaselineSender p1(seq_index(x, src.nx()),
                    sequence_input_bits(src.nx(), src.n()), l,
                    rnd.public_seed);
  BaselineReceiver p2(src, y, l, eta, rnd.public_seed);
  SessionResult res = drive_session(
      p1, p2, std::numeric_limits<double>::infinity());
  ExchangeOutcome out;
  out.x_hat = p2.x_hat_;
  out.correct = p2.x_hat_ && *p2.x_hat_ == x;
  out.total_bits = res.total_bits;
  out.rounds_used = 1;
  out.error_kind = p2.error_;
  out.aborted = false;
  out.phase1_bits = res.total_bits;
  return out;
}

ExchangeOutcome interactive_sw(const SequenceSource& src, const Seq& x,
                               const Seq& y, const InteractiveSwParams& params,
                               const SessionRandomness& rnd, double l_max) {
  SwSender p1(seq_index(x, src.nx()),
              sequence_input_bits(src.nx(), src.n()), params,
              rnd.public_seed);
  SwReceiver p2(src, y, params, rnd.public_seed);
  SessionResult res = drive_session(p1, p2, l_max);
  ExchangeOutcome out;
  out.x_hat = p2.x_hat();
  out.correct = p2.x_hat() && *p2.x_hat() == x;
  out.total_bits = res.total_bits;
  out.rounds_used = p2.rounds_used();
  out.stop_slice = p2.stop_slice();
  out.aborted = res.aborted;
  if (res.aborted)
    out.error_kind = res.abort_kind;
  else if (!p2.x_hat())
    out.error_kind = ErrorKind::no_candidate;
  else
    out.error_kind = ErrorKind::none;
  out.phase1_bits = res.total_bits;
  return out;
}

std::unique_ptr<PartyMachine> make_baseline_party(int party,
                                                  const SequenceSource& src,
                                                  Seq obs, int l, double eta,
                                                  uint64_t public_seed) {
  if (party == 1)
    return std::make_unique<BaselineSender>(
        seq_index(obs, src.nx()), sequence_input_bits(src.nx(), src.n()), l,
        public_seed);
  return std::make_unique<BaselineReceiver>(src, std::move(obs), l, eta,
                                            public_seed);
}

std::unique_ptr<PartyMachine> make_sw_party(int party,
                                            const SequenceSource& src, Seq obs,
                                            const InteractiveSwParams& params,
                                            uint64_t public_seed) {
  if (party == 1)
    return std::make_unique<SwSender>(seq_index(obs, src.nx()),
                                      sequence_input_bits(src.nx(), src.n()),
                                      params, public_seed);
  return std::make_unique<SwReceiver>(src, std::move(obs), params,
                                      public_seed);
}

std::unique_ptr<PartyMachine> make_exchange_party(int party,
                                                  const SequenceSource& src,
                                                  Seq obs,
                                                  const ExchangeParams& params,
                                                  uint64_t public_seed) {
  if (party == 1)
    return std::make_unique<ExchangeSender>(src, std::move(obs), params,
                                            public_seed);
  return std::make_unique<ExchangeReceiver>(src, std::move(obs), params,
                                            public_seed);
}

ExchangeOutcome data_exchange(const SequenceSource& src, const Seq& x,
                              const Seq& y, const ExchangeParams& params,
                              const SessionRandomness& rnd,
                              Transcript* transcript_out) {
  ExchangeSender p1(src, x, params, rnd.public_seed);
  ExchangeReceiver p2(src, y, params, rnd.public_seed);
  SessionResult res = drive_session(p1, p2, params.l_max);
  ExchangeOutcome out;
  out.x_hat = p2.x_hat();
  out.y_hat = p1.y_hat();
  out.correct = p2.x_hat() && *p2.x_hat() == x && p1.y_hat() &&
                *p1.y_hat() == y;
  out.total_bits = res.total_bits;
  out.rounds_used = p2.rounds_used();
  out.stop_slice = p2.stop_slice();
  out.aborted = res.aborted;
  if (res.aborted)
    out.error_kind = res.abort_kind;
  else if (!out.correct && p2.local_error() != ErrorKind::none)
    out.error_kind = p2.local_error();
  else if (!p2.x_hat())
    out.error_kind = ErrorKind::no_candidate;
  else
    out.error_kind = ErrorKind::none;
  out.phase2_bits = phase2_bits_of(res.transcript);
  out.phase1_bits = res.total_bits - out.phase2_bits;
  if (transcript_out) *transcript_out = std::move(res.transcript);
  return out;
}

}  // namespace dx
