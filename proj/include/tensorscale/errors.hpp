#pragma once

#include <stdexcept>
#include <string>

namespace tensorscale {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// k outside [1, d-1], or an order the combinatorics refuse to enumerate.
class InvalidRankError : public Error {
public:
  using Error::Error;
};

// A coordinate outside the tensor's shape, or an id outside its family.
class InvalidIndexError : public Error {
public:
  using Error::Error;
};

// Structurally broken tensor data: explicit zeros, duplicates, non-finite
// values, unsupported order.
class MalformedTensorError : public Error {
public:
  using Error::Error;
};

// Scaling list of the wrong length or containing zeros.
class InvalidScalingError : public Error {
public:
  using Error::Error;
};

// Non-positive target product.
class InvalidTargetError : public Error {
public:
  using Error::Error;
};

// A subtensor with no nonzero entries has an empty product, which is 1;
// any other target for it cannot be met.
class InfeasibleEmptySubtensorError : public Error {
public:
  using Error::Error;
};

// Two tensors that were expected to share shape and zero pattern do not.
class PatternMismatchError : public Error {
public:
  using Error::Error;
};

// Instance too large for the dense verification path.
class OracleTooLargeError : public Error {
public:
  using Error::Error;
};

// Malformed input file.
class ParseError : public Error {
public:
  using Error::Error;
};

// Solver configuration outside its documented domain.
class InvalidConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace tensorscale
