#include "dx/session.hpp"

#include "dx/errors.hpp"

namespace dx {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::none:
      return "none";
    case ErrorKind::no_candidate:
      return "no_candidate";
    case ErrorKind::ambiguous:
      return "ambiguous";
    case ErrorKind::budget_exceeded:
      return "budget_exceeded";
  }
  return "?";
}

std::vector<uint8_t> Transcript::serialize() const {
  std::vector<uint8_t> out;
  for (const auto& e : entries) {
    out.push_back(static_cast<uint8_t>(e.sender));
    out.push_back(static_cast<uint8_t>(e.kind));
    uint32_t n = static_cast<uint32_t>(e.payload.size());
    out.push_back(static_cast<uint8_t>(n >> 24));
    out.push_back(static_cast<uint8_t>(n >> 16));
    out.push_back(static_cast<uint8_t>(n >> 8));
    out.push_back(static_cast<uint8_t>(n));
    auto bytes = e.payload.to_bytes();
    out.insert(out.end(), bytes.begin(), bytes.end());
  }
  return out;
}

Transcript Transcript::deserialize(const std::vector<uint8_t>& bytes) {
  Transcript t;
  size_t i = 0;
  while (i < bytes.size()) {
    if (bytes.size() - i < 6) throw Error("truncated transcript entry");
    int sender = bytes[i];
    MsgKind kind = static_cast<MsgKind>(bytes[i + 1]);
    uint32_t n = (uint32_t(bytes[i + 2]) << 24) | (uint32_t(bytes[i + 3]) << 16) |
                 (uint32_t(bytes[i + 4]) << 8) | uint32_t(bytes[i + 5]);
    i += 6;
    size_t nbytes = (n + 7) / 8;
    if (bytes.size() - i < nbytes) throw Error("truncated transcript payload");
    std::vector<uint8_t> payload(bytes.begin() + i, bytes.begin() + i + nbytes);
    i += nbytes;
    t.add({sender, kind, BitString::from_bytes(payload, n)});
  }
  return t;
}

bool operator==(const Transcript& a, const Transcript& b) {
  if (a.total_bits != b.total_bits || a.entries.size() != b.entries.size())
    return false;
  for (size_t i = 0; i < a.entries.size(); ++i) {
    const auto& ea = a.entries[i];
    const auto& eb = b.entries[i];
    if (ea.sender != eb.sender || ea.kind != eb.kind ||
        !(ea.payload == eb.payload))
      return false;
  }
  return true;
}

SessionResult drive_session(PartyMachine& p1, PartyMachine& p2, double l_max) {
  SessionResult res;
  auto abort_with = [&](ErrorKind k) {
    res.aborted = true;
    res.abort_kind = k;
    p1.session_aborted(k);
    p2.session_aborted(k);
  };
  for (;;) {
    if (p1.local_error() != ErrorKind::none) {
      abort_with(p1.local_error());
      break;
    }
    if (p2.local_error() != ErrorKind::none) {
      abort_with(p2.local_error());
      break;
    }
    if (p1.done() && p2.done()) break;
    std::optional<Message> m = p1.poll();
    PartyMachine* dst = &p2;
    if (!m) {
      m = p2.poll();
      dst = &p1;
    }
    if (!m) {
      if (p1.local_error() != ErrorKind::none ||
          p2.local_error() != ErrorKind::none)
        continue;  // error surfaced during poll
      break;       // both idle: protocol structure finished
    }
    if (static_cast<double>(res.total_bits) +
            static_cast<double>(m->payload.size()) >
        l_max) {
      abort_with(ErrorKind::budget_exceeded);
      break;
    }
    res.transcript.add(*m);
    res.total_bits += static_cast<int64_t>(m->payload.size());
    dst->deliver(*m);
  }
  return res;
}

MonteCarloSummary monte_carlo(const ProtocolRunner& runner,
                              const SequenceSource& src, uint64_t trials,
                              uint64_t master_seed) {
  if (trials < 1) throw Error("trials must be >= 1");
  MonteCarloSummary sum;
  sum.trials = trials;
  double bits_acc = 0.0;
  for (uint64_t t = 0; t < trials; ++t) {
    Rng data_rng = derive_rng(master_seed, 0xDA7Aull, t);
    auto [x, y] = src.sample(data_rng);
    SessionRandomness rnd = SessionRandomness::from_master(master_seed, t);
    ExchangeOutcome out = runner(x, y, rnd);
    if (!out.correct) ++sum.errors;
    bits_acc += static_cast<double>(out.total_bits);
    sum.bits_histogram[out.total_bits]++;
    if (out.stop_slice >= 0) {
      if (sum.stop_slice_counts.size() <=
          static_cast<size_t>(out.stop_slice))
        sum.stop_slice_counts.resize(out.stop_slice + 1, 0);
      sum.stop_slice_counts[out.stop_slice]++;
    }
    sum.error_kinds[out.error_kind]++;
    sum.outcomes.push_back(std::move(out));
  }
  sum.error_rate = static_cast<double>(sum.errors) / trials;
  sum.mean_bits = bits_acc / trials;
  return sum;
}

}  // namespace dx
