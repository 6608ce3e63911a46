#pragma once

#include <stdexcept>
#include <string>

namespace uot {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A scalar argument is out of its documented domain (tol <= 0, max_iter == 0, ...).
struct InvalidParameter : Error {
  using Error::Error;
};

// A row/column sum reached <= 0 (or a rescale factor left the positive finite range),
// so the multiplicative update is no longer defined.
struct DegenerateSum : Error {
  using Error::Error;
};

// A tile/launch configuration cannot cover the matrix or violates a hard shape rule.
struct ConfigError : Error {
  using Error::Error;
};

// A rank partition cannot be built (more ranks than rows, zero ranks, ...).
struct PartitionError : Error {
  using Error::Error;
};

// Problem file serialization / deserialization failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace uot
