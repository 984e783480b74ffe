#ifndef DX_ERRORS_HPP
#define DX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dx {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Queried pair lies outside the support of the distribution.
struct ZeroProbability : Error {
  using Error::Error;
};

// Sequence index does not fit in the declared input width of a hash chain.
struct EncodingOverflow : Error {
  using Error::Error;
};

// Exact convolution would exceed the configured atom cap; switch to Monte Carlo.
struct ConvolutionOverflow : Error {
  using Error::Error;
};

struct NotAlmostUniform : Error {
  using Error::Error;
};

struct KeyTooLong : Error {
  using Error::Error;
};

// Sequence is not a member of the stated conditional type class.
struct NotInClass : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct HandshakeMismatch : Error {
  using Error::Error;
};

struct ConnectionLost : Error {
  using Error::Error;
};

}  // namespace dx

#endif
