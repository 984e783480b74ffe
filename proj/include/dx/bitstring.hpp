#ifndef DX_BITSTRING_HPP
#define DX_BITSTRING_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dx/errors.hpp"

namespace dx {

// Sequence of bits with explicit length. Serialization convention (shared by
// transcript dumps and wire frames): the string packs into ceil(n/8) bytes
// interpreted big-endian, bit 0 of the string being the most significant
// payload bit; the unused high bits of the leading byte are zero.
class BitString {
 public:
  BitString() = default;

  static BitString zeros(size_t n) {
    BitString b;
    b.bits_.assign(n, 0);
    return b;
  }

  // Low `nbits` of `value`, most significant first.
  static BitString from_uint(uint64_t value, int nbits) {
    BitString b;
    b.bits_.reserve(nbits);
    for (int i = nbits - 1; i >= 0; --i)
      b.bits_.push_back(static_cast<uint8_t>((value >> i) & 1));
    return b;
  }

  void push_back(bool bit) { bits_.push_back(bit ? 1 : 0); }

  void append(const BitString& other) {
    bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
  }

  void append_uint(uint64_t value, int nbits) { append(from_uint(value, nbits)); }

  bool bit(size_t i) const { return bits_[i] != 0; }
  size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }

  BitString prefix(size_t n) const {
    BitString b;
    b.bits_.assign(bits_.begin(), bits_.begin() + n);
    return b;
  }

  uint64_t to_uint() const {
    if (size() > 64) throw EncodingOverflow("bitstring wider than 64 bits");
    uint64_t v = 0;
    for (uint8_t b : bits_) v = (v << 1) | b;
    return v;
  }

  // Packs per the big-endian convention above.
  std::vector<uint8_t> to_bytes() const {
    size_t nbytes = (bits_.size() + 7) / 8;
    std::vector<uint8_t> out(nbytes, 0);
    size_t pad = nbytes * 8 - bits_.size();
    for (size_t j = 0; j < bits_.size(); ++j) {
      size_t pos = pad + j;
      if (bits_[j]) out[pos / 8] |= static_cast<uint8_t>(0x80u >> (pos % 8));
    }
    return out;
  }

  static BitString from_bytes(const std::vector<uint8_t>& bytes, size_t nbits) {
    if (bytes.size() != (nbits + 7) / 8)
      throw Error("bitstring byte count does not match bit length");
    BitString b;
    b.bits_.reserve(nbits);
    size_t pad = bytes.size() * 8 - nbits;
    for (size_t j = 0; j < nbits; ++j) {
      size_t pos = pad + j;
      b.bits_.push_back((bytes[pos / 8] >> (7 - pos % 8)) & 1);
    }
    return b;
  }

  std::string to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (uint8_t b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }

  friend bool operator==(const BitString& a, const BitString& b) {
    return a.bits_ == b.bits_;
  }

 private:
  std::vector<uint8_t> bits_;  // one bit per element
};

inline BitString operator^(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) throw Error("xor of unequal-length bitstrings");
  BitString out;
  for (size_t i = 0; i < a.size(); ++i) out.push_back(a.bit(i) ^ b.bit(i));
  return out;
}

}  // namespace dx

#endif
