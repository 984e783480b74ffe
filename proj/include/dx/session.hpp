#ifndef DX_SESSION_HPP
#define DX_SESSION_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "dx/bitstring.hpp"
#include "dx/rng.hpp"
#include "dx/source.hpp"

namespace dx {

enum class MsgKind : uint8_t {
  hash_block = 0,
  ack = 1,
  nack = 2,
  type_header = 3,
  index_payload = 4,
};

enum class ErrorKind : uint8_t {
  none = 0,
  no_candidate = 1,
  ambiguous = 2,
  budget_exceeded = 3,
};

const char* error_kind_name(ErrorKind k);

struct Message {
  int sender;  // 1 or 2
  MsgKind kind;
  BitString payload;
};

struct TranscriptEntry {
  int sender;
  MsgKind kind;
  BitString payload;
};

// Ordered protocol messages with exact bit lengths. ACK/NACK entries are
// exactly 1 bit; total_bits is the sum of payload lengths.
struct Transcript {
  std::vector<TranscriptEntry> entries;
  int64_t total_bits = 0;

  void add(const Message& m) {
    entries.push_back({m.sender, m.kind, m.payload});
    total_bits += static_cast<int64_t>(m.payload.size());
  }

  int64_t recount_bits() const {
    int64_t s = 0;
    for (const auto& e : entries) s += static_cast<int64_t>(e.payload.size());
    return s;
  }

  // (sender:1, kind:1, bitlen:4 big-endian, payload zero-padded to bytes)
  std::vector<uint8_t> serialize() const;
  static Transcript deserialize(const std::vector<uint8_t>& bytes);

  friend bool operator==(const Transcript& a, const Transcript& b);
};

struct ExchangeOutcome {
  std::optional<Seq> x_hat, y_hat;
  bool correct = false;
  int64_t total_bits = 0;
  int rounds_used = 0;
  bool aborted = false;
  ErrorKind error_kind = ErrorKind::none;
  // protocol diagnostics
  int stop_slice = 0;
  int64_t phase1_bits = 0;
  int64_t phase2_bits = 0;
};

// Public coins U plus the two private coins U_X, U_Y. Streams derived from
// the three seeds use disjoint labels, so they are independent by
// construction.
struct SessionRandomness {
  uint64_t public_seed = 0;
  uint64_t party1_seed = 0;
  uint64_t party2_seed = 0;

  static SessionRandomness from_master(uint64_t master, uint64_t trial) {
    return {derive_seed(master, 0x5EEDull, trial, 1),
            derive_seed(master, 0x5EEDull, trial, 2),
            derive_seed(master, 0x5EEDull, trial, 3)};
  }
};

// One side of a turn-based protocol. A machine only ever sees its own
// observation and seeds; everything else arrives through deliver().
class PartyMachine {
 public:
  virtual ~PartyMachine() = default;

  // If it is this party's turn and a message is ready, returns it and
  // advances local state. Returns nullopt while waiting or when done.
  virtual std::optional<Message> poll() = 0;
  virtual void deliver(const Message& m) = 0;
  virtual bool done() const = 0;

  // Error this machine itself declared mid-protocol (forces session abort).
  virtual ErrorKind local_error() const { return ErrorKind::none; }
  // Notification that the session ended early (peer abort or budget).
  virtual void session_aborted(ErrorKind) {}
  // Estimate of the peer's sequence, when this machine forms one.
  virtual std::optional<Seq> estimate() const { return std::nullopt; }
  virtual int stop_info() const { return 0; }  // stopping slice/round
  // Local view of success for machines without an estimate of their own
  // (a one-sided sender succeeded when the peer acknowledged).
  virtual bool claims_success() const { return estimate().has_value(); }
};

struct SessionResult {
  Transcript transcript;
  bool aborted = false;
  ErrorKind abort_kind = ErrorKind::none;
  int64_t total_bits = 0;
};

// Drives the two machines turn by turn. The budget check runs before a
// message is sent, so total_bits never exceeds l_max.
SessionResult drive_session(PartyMachine& p1, PartyMachine& p2, double l_max);

// Summary statistics over seeded Monte Carlo trials. Per-trial seeds are
// derived from the master seed by trial index, so the result does not
// depend on execution order.
struct MonteCarloSummary {
  uint64_t trials = 0;
  uint64_t errors = 0;
  double error_rate = 0.0;
  double mean_bits = 0.0;
  std::map<int64_t, uint64_t> bits_histogram;
  std::vector<uint64_t> stop_slice_counts;  // index 0 = none/error
  std::map<ErrorKind, uint64_t> error_kinds;
  std::vector<ExchangeOutcome> outcomes;  // per trial, in trial order
};

using ProtocolRunner = std::function<ExchangeOutcome(
    const Seq& x, const Seq& y, const SessionRandomness& rnd)>;

MonteCarloSummary monte_carlo(const ProtocolRunner& runner,
                              const SequenceSource& src, uint64_t trials,
                              uint64_t master_seed);

}  // namespace dx

#endif
