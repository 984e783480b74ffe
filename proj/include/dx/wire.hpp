#ifndef DX_WIRE_HPP
#define DX_WIRE_HPP

#include <string>
#include <vector>

#include "dx/experiment.hpp"
#include "dx/session.hpp"

namespace dx {

// Wire frame: magic "DX", version 1, sender byte, kind byte, bitlen as
// 4 bytes big-endian, payload ceil(bitlen/8) bytes (big-endian packing,
// zero pad in the high bits of the leading byte). Protocol kinds reuse the
// MsgKind codes; 0xF0/0xF1 are transport control (handshake, abort) and are
// not counted as protocol bits.
constexpr uint8_t kFrameVersion = 1;
constexpr uint8_t kFrameHandshake = 0xF0;
constexpr uint8_t kFrameAbort = 0xF1;

// Blocking byte stream over a connected socket.
class TcpStream {
 public:
  explicit TcpStream(int fd) : fd_(fd) {}
  TcpStream(TcpStream&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  TcpStream& operator=(TcpStream&&) = delete;
  TcpStream(const TcpStream&) = delete;
  ~TcpStream();

  static TcpStream connect_to(const std::string& host, int port,
                              int retries = 50);

  void send_frame(uint8_t sender, uint8_t kind, const BitString& payload);
  struct Frame {
    uint8_t sender;
    uint8_t kind;
    BitString payload;
  };
  Frame recv_frame();  // throws ConnectionLost on EOF/error

  void send_bytes(const std::vector<uint8_t>& b);
  std::vector<uint8_t> recv_bytes(size_t n);

  void close_now();

 private:
  int fd_;
};

class TcpListener {
 public:
  explicit TcpListener(int port);  // binds 127.0.0.1:port (0 = ephemeral)
  ~TcpListener();
  int port() const { return port_; }
  TcpStream accept_one();

 private:
  int fd_;
  int port_;
};

// Handshake parameter block both peers must agree on bit-exactly. The
// listener's seed is authoritative (public coins chosen by the listener).
std::vector<uint8_t> handshake_blob(const ProtocolInstance& inst);
// Compares everything except the seed field; returns the peer's seed.
uint64_t check_handshake(const std::vector<uint8_t>& mine,
                         const std::vector<uint8_t>& theirs);

// Runs one party of one session over the stream; mirrors drive_session
// decisions bit for bit (abort before send on budget overflow, abort frames
// carry the reason and cost no protocol bits).
SessionResult run_party_over_wire(PartyMachine& me, int my_id, TcpStream& s,
                                  double l_max);

struct PeerTrial {
  ExchangeOutcome outcome;
  Transcript transcript;
};

// Full peer run: handshake, then cfg.trials sessions back to back.
// party 1 = listener (observes x), party 2 = connector (observes y).
std::vector<PeerTrial> peer_run(const ProtocolInstance& inst, int party,
                                TcpStream& stream);

}  // namespace dx

#endif
