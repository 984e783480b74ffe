#ifndef DX_PROTOCOLS_HPP
#define DX_PROTOCOLS_HPP

#include <limits>
#include <memory>

#include "dx/hashing.hpp"
#include "dx/session.hpp"
#include "dx/spectrum.hpp"

namespace dx {

// Parameters of the interactive Slepian-Wolf phase. The slice width must be
// an integer number of bits (block messages cannot carry fractional bits);
// the first message carries l = ceil(lambda_min + delta + eta) bits.
struct InteractiveSwParams {
  SpectrumPlan plan;  // over h(X|Y)
  double eta = 0.0;
  int delta_bits = 1;
  int first_message_bits = 1;
};

InteractiveSwParams make_interactive_sw_params(const SpectrumPlan& plan,
                                               double eta);

// exact_support plan over the conditional density with the slice width
// rounded up to a whole bit (sqrt of the spectrum width by default).
SpectrumPlan make_protocol_plan(const FiniteDistribution& cond_density,
                                int explicit_delta_bits = 0);

struct ExchangeParams {
  InteractiveSwParams sw;
  double l_max = std::numeric_limits<double>::infinity();
};

// l_max recipe and the matching error bound prediction:
// l_max = lambda_eps + Delta + N + eta + 1,
// error <= P(h(X dY) > lambda_eps) + P(T_0) + N 2^-eta.
struct Theorem2Budget {
  double lambda_eps = 0.0;
  double l_max = 0.0;
  double predicted_error_bound = 0.0;
  double p_t0 = 0.0;
};

Theorem2Budget theorem2_budget(const FiniteDistribution& sum_density,
                               double eps, const SpectrumPlan& cond_plan,
                               const FiniteDistribution& cond_density,
                               double eta);

// Prefix-free zero-error code for y given x (interval coding on the
// conditional cumulative distribution, fixed symbol order). Codeword length
// is ceil(h(y|x)) + 1 bits; a deterministic conditional yields 1 bit.
BitString conditional_exact_encode(const JointSource& src, const Seq& x,
                                   const Seq& y);
Seq conditional_exact_decode(const JointSource& src, const Seq& x,
                             const BitString& code);

// ---- party machines (exposed for the wire mode and tests) ----

// Party 1 of Protocol 1: sends the l-bit first hash block, then delta more
// bits after every NACK.
class SwSender : public PartyMachine {
 public:
  SwSender(uint64_t x_index, int input_bits, const InteractiveSwParams& params,
           uint64_t public_seed);

  std::optional<Message> poll() override;
  void deliver(const Message& m) override;
  bool done() const override { return done_; }
  void session_aborted(ErrorKind) override { done_ = true; }

  bool got_ack() const { return got_ack_; }
  int rounds_used() const { return round_; }
  bool claims_success() const override { return got_ack_; }

 private:
  uint64_t x_;
  InteractiveSwParams params_;
  HashChain chain_;
  int round_ = 1;
  bool awaiting_feedback_ = false;
  bool done_ = false;
  bool got_ack_ = false;
};

// Party 2 of Protocol 1: keeps the hash-consistent candidate set and looks
// for a unique candidate inside the current slice.
class SwReceiver : public PartyMachine {
 public:
  SwReceiver(const SequenceSource& src, Seq y,
             const InteractiveSwParams& params, uint64_t public_seed);

  std::optional<Message> poll() override;
  void deliver(const Message& m) override;
  bool done() const override { return done_; }
  ErrorKind local_error() const override { return error_; }
  void session_aborted(ErrorKind) override { done_ = true; }

  const std::optional<Seq>& x_hat() const { return x_hat_; }
  int stop_slice() const { return stop_slice_; }
  int rounds_used() const { return round_; }
  std::optional<Seq> estimate() const override { return x_hat_; }
  int stop_info() const override { return stop_slice_; }

 protected:
  const SequenceSource& src_;
  Seq y_;
  InteractiveSwParams params_;
  HashChain chain_;
  struct Candidate {
    uint64_t idx;
    int slice;
  };
  std::vector<Candidate> alive_;
  int round_ = 1;
  bool feedback_ready_ = false;
  bool send_ack_ = false;
  bool done_ = false;
  ErrorKind error_ = ErrorKind::none;
  std::optional<Seq> x_hat_;
  int stop_slice_ = 0;

  void process_block(const Message& m);
};

// Party 1 of the full exchange: phase 1 SwSender, then decodes the exact
// conditional code of y given its own x.
class ExchangeSender : public PartyMachine {
 public:
  ExchangeSender(const SequenceSource& src, Seq x,
                 const ExchangeParams& params, uint64_t public_seed);

  std::optional<Message> poll() override;
  void deliver(const Message& m) override;
  bool done() const override;
  ErrorKind local_error() const override { return error_; }
  void session_aborted(ErrorKind) override;

  const std::optional<Seq>& y_hat() const { return y_hat_; }
  const SwSender& phase1() const { return sw_; }
  std::optional<Seq> estimate() const override { return y_hat_; }

 private:
  const SequenceSource& src_;
  Seq x_;
  SwSender sw_;
  bool phase2_done_ = false;
  ErrorKind error_ = ErrorKind::none;
  std::optional<Seq> y_hat_;
};

// Party 2 of the full exchange: phase 1 SwReceiver; on ACK it also sends
// the conditional codeword of y given the decoded x_hat.
class ExchangeReceiver : public SwReceiver {
 public:
  ExchangeReceiver(const SequenceSource& src, Seq y,
                   const ExchangeParams& params, uint64_t public_seed);

  std::optional<Message> poll() override;
  bool done() const override;
  void session_aborted(ErrorKind k) override;

 private:
  bool codeword_sent_ = false;
};

// ---- one-shot wrappers ----

ExchangeOutcome baseline_sw(const SequenceSource& src, const Seq& x,
                            const Seq& y, int l, double eta,
                            const SessionRandomness& rnd);

ExchangeOutcome interactive_sw(
    const SequenceSource& src, const Seq& x, const Seq& y,
    const InteractiveSwParams& params, const SessionRandomness& rnd,
    double l_max = std::numeric_limits<double>::infinity());

ExchangeOutcome data_exchange(const SequenceSource& src, const Seq& x,
                              const Seq& y, const ExchangeParams& params,
                              const SessionRandomness& rnd,
                              Transcript* transcript_out = nullptr);

// Hash input width: smallest m with 2^m >= |X|^n. Protocol decoders
// enumerate |X|^n candidates and are gated to m <= 24.
int sequence_input_bits(int alphabet, int n);

// Machine factories for the wire mode: party 1 observes x, party 2
// observes y. `obs` is the party's own observation.
std::unique_ptr<PartyMachine> make_baseline_party(int party, const SequenceSource& src,
                                                  Seq obs, int l, double eta,
                                                  uint64_t public_seed);
std::unique_ptr<PartyMachine> make_sw_party(int party, const SequenceSource& src,
                                            Seq obs,
                                            const InteractiveSwParams& params,
                                            uint64_t public_seed);
std::unique_ptr<PartyMachine> make_exchange_party(int party,
                                                  const SequenceSource& src,
                                                  Seq obs,
                                                  const ExchangeParams& params,
                                                  uint64_t public_seed);

}  // namespace dx

#endif
