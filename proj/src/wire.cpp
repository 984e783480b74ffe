#include "dx/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

#include "dx/errors.hpp"

namespace dx {

TcpStream::~TcpStream() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpStream::close_now() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

TcpStream TcpStream::connect_to(const std::string& host, int port,
                                int retries) {
  for (int attempt = 0;; ++attempt) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw ConnectionLost("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      throw ConnectionLost("bad host address '" + host + "'");
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return TcpStream(fd);
    }
    ::close(fd);
    if (attempt >= retries)
      throw ConnectionLost("cannot connect to " + host + ":" +
                           std::to_string(port));
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

void TcpStream::send_bytes(const std::vector<uint8_t>& b) {
  size_t off = 0;
  while (off < b.size()) {
    ssize_t k = ::send(fd_, b.data() + off, b.size() - off, MSG_NOSIGNAL);
    if (k <= 0) throw ConnectionLost("send failed");
    off += static_cast<size_t>(k);
  }
}

std::vector<uint8_t> TcpStream::recv_bytes(size_t n) {
  std::vector<uint8_t> out(n);
  size_t off = 0;
  while (off < n) {
    ssize_t k = ::recv(fd_, out.data() + off, n - off, 0);
    if (k <= 0) throw ConnectionLost("connection closed mid-message");
    off += static_cast<size_t>(k);
  }
  return out;
}

void TcpStream::send_frame(uint8_t sender, uint8_t kind,
                           const BitString& payload) {
  std::vector<uint8_t> out;
  out.push_back('D');
  out.push_back('X');
  out.push_back(kFrameVersion);
  out.push_back(sender);
  out.push_back(kind);
  uint32_t n = static_cast<uint32_t>(payload.size());
  out.push_back(static_cast<uint8_t>(n >> 24));
  out.push_back(static_cast<uint8_t>(n >> 16));
  out.push_back(static_cast<uint8_t>(n >> 8));
  out.push_back(static_cast<uint8_t>(n));
  auto body = payload.to_bytes();
  out.insert(out.end(), body.begin(), body.end());
  send_bytes(out);
}

TcpStream::Frame TcpStream::recv_frame() {
  auto head = recv_bytes(9);
  if (head[0] != 'D' || head[1] != 'X')
    throw HandshakeMismatch("bad frame magic");
  if (head[2] != kFrameVersion)
    throw HandshakeMismatch("unknown wire version " + std::to_string(head[2]));
  Frame f;
  f.sender = head[3];
  f.kind = head[4];
  uint32_t n = (uint32_t(head[5]) << 24) | (uint32_t(head[6]) << 16) |
               (uint32_t(head[7]) << 8) | uint32_t(head[8]);
  auto body = recv_bytes((n + 7) / 8);
  f.payload = BitString::from_bytes(body, n);
  return f;
}

TcpListener::TcpListener(int port) : port_(port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw ConnectionLost("socket() failed");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(port));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(fd_);
    throw ConnectionLost("bind failed on port " + std::to_string(port));
  }
  if (::listen(fd_, 1) != 0) {
    ::close(fd_);
    throw ConnectionLost("listen failed");
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

TcpStream TcpListener::accept_one() {
  int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw ConnectionLost("accept failed");
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return TcpStream(fd);
}

namespace {

void put_u64(std::vector<uint8_t>& v, uint64_t x) {
  for (int i = 7; i >= 0; --i) v.push_back(static_cast<uint8_t>(x >> (8 * i)));
}

int64_t millibits(double v) {
  if (std::isinf(v)) return INT64_MAX;
  return static_cast<int64_t>(std::llround(v * 1000.0));
}

}  // namespace

std::vector<uint8_t> handshake_blob(const ProtocolInstance& inst) {
  std::vector<uint8_t> b;
  b.push_back(kFrameVersion);
  b.push_back(static_cast<uint8_t>(inst.cfg.protocol));
  put_u64(b, static_cast<uint64_t>(inst.cfg.n));
  put_u64(b, static_cast<uint64_t>(inst.src.nx()));
  put_u64(b, static_cast<uint64_t>(inst.src.ny()));
  double lmin = 0, lmax = 0, delta = 0, eta = inst.cfg.eta;
  if (inst.sw_params) {
    lmin = inst.sw_params->plan.lambda_min;
    lmax = inst.sw_params->plan.lambda_max;
    delta = inst.sw_params->plan.delta;
  }
  put_u64(b, static_cast<uint64_t>(millibits(lmin)));
  put_u64(b, static_cast<uint64_t>(millibits(lmax)));
  put_u64(b, static_cast<uint64_t>(millibits(delta)));
  put_u64(b, static_cast<uint64_t>(millibits(eta)));
  put_u64(b, static_cast<uint64_t>(millibits(inst.budget_limit())));
  put_u64(b, static_cast<uint64_t>(millibits(inst.cfg.rate)));
  put_u64(b, static_cast<uint64_t>(millibits(inst.cfg.step)));
  put_u64(b, static_cast<uint64_t>(inst.cfg.baseline_l));
  put_u64(b, inst.cfg.trials);
  put_u64(b, inst.cfg.seed);  // public seed source; listener authoritative
  return b;
}

uint64_t check_handshake(const std::vector<uint8_t>& mine,
                         const std::vector<uint8_t>& theirs) {
  if (mine.size() != theirs.size())
    throw HandshakeMismatch("handshake length mismatch");
  // everything except the trailing 8-byte seed must match bit-exactly
  for (size_t i = 0; i + 8 < mine.size(); ++i)
    if (mine[i] != theirs[i])
      throw HandshakeMismatch("handshake parameter mismatch at byte " +
                              std::to_string(i));
  uint64_t seed = 0;
  for (size_t i = theirs.size() - 8; i < theirs.size(); ++i)
    seed = (seed << 8) | theirs[i];
  return seed;
}

SessionResult run_party_over_wire(PartyMachine& me, int my_id, TcpStream& s,
                                  double l_max) {
  SessionResult res;
  for (;;) {
    if (me.local_error() != ErrorKind::none) {
      res.aborted = true;
      res.abort_kind = me.local_error();
      s.send_frame(static_cast<uint8_t>(my_id), kFrameAbort,
                   BitString::from_uint(static_cast<uint64_t>(res.abort_kind),
                                        8));
      me.session_aborted(res.abort_kind);
      break;
    }
    if (auto m = me.poll()) {
      if (static_cast<double>(res.total_bits) +
              static_cast<double>(m->payload.size()) >
          l_max) {
        res.aborted = true;
        res.abort_kind = ErrorKind::budget_exceeded;
        s.send_frame(
            static_cast<uint8_t>(my_id), kFrameAbort,
            BitString::from_uint(static_cast<uint64_t>(res.abort_kind), 8));
        me.session_aborted(res.abort_kind);
        break;
      }
      s.send_frame(static_cast<uint8_t>(m->sender),
                   static_cast<uint8_t>(m->kind), m->payload);
      res.transcript.add(*m);
      res.total_bits += static_cast<int64_t>(m->payload.size());
      continue;
    }
    if (me.local_error() != ErrorKind::none) continue;  // surfaced in poll
    if (me.done()) break;
    TcpStream::Frame f = s.recv_frame();
    if (f.kind == kFrameAbort) {
      res.aborted = true;
      res.abort_kind = static_cast<ErrorKind>(f.payload.to_uint());
      me.session_aborted(res.abort_kind);
      break;
    }
    if (f.kind > 4) throw HandshakeMismatch("unexpected frame kind");
    Message msg{f.sender, static_cast<MsgKind>(f.kind), f.payload};
    if (static_cast<double>(res.total_bits) +
            static_cast<double>(msg.payload.size()) >
        l_max)
      throw HandshakeMismatch("peer exceeded the agreed bit budget");
    res.transcript.add(msg);
    res.total_bits += static_cast<int64_t>(msg.payload.size());
    me.deliver(msg);
  }
  return res;
}

std::vector<PeerTrial> peer_run(const ProtocolInstance& inst, int party,
                                TcpStream& stream) {
  // handshake: connector sends first, listener replies authoritatively
  std::vector<uint8_t> mine = handshake_blob(inst);
  uint64_t master = inst.cfg.seed;
  if (party == 2) {
    stream.send_bytes(mine);
    auto theirs = stream.recv_bytes(mine.size());
    master = check_handshake(mine, theirs);
  } else {
    auto theirs = stream.recv_bytes(mine.size());
    check_handshake(mine, theirs);
    stream.send_bytes(mine);
  }

  std::vector<PeerTrial> trials;
  for (uint64_t t = 0; t < inst.cfg.trials; ++t) {
    Rng data_rng = derive_rng(master, 0xDA7Aull, t);
    auto [x, y] = inst.src.sample(data_rng);
    SessionRandomness rnd = SessionRandomness::from_master(master, t);
    Seq obs = party == 1 ? x : y;
    std::unique_ptr<PartyMachine> me = inst.make_party(party, obs, rnd);
    SessionResult res =
        run_party_over_wire(*me, party, stream, inst.budget_limit());
    PeerTrial trial;
    trial.transcript = std::move(res.transcript);
    ExchangeOutcome& out = trial.outcome;
    out.total_bits = res.total_bits;
    out.aborted = res.aborted;
    out.error_kind = res.aborted ? res.abort_kind : ErrorKind::none;
    out.stop_slice = me->stop_info();
    std::optional<Seq> est = me->estimate();
    if (party == 1) {
      out.y_hat = est;
      out.correct = est ? *est == y : (me->claims_success() && !res.aborted);
    } else {
      out.x_hat = est;
      out.correct = est && *est == x;
    }
    if (!out.correct && !res.aborted && out.error_kind == ErrorKind::none)
      out.error_kind = ErrorKind::no_candidate;
    trials.push_back(std::move(trial));
  }
  return trials;
}

}  // namespace dx
