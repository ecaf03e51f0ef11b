#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plqks {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Operation not available for this input (e.g. closed form without atoms).
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// The dual sup defining a penalty is +inf at the requested point.
class UnboundedPenalty : public Error {
 public:
  using Error::Error;
};

/// Generator enumeration would exceed the configured size bound.
class TooComplex : public Error {
 public:
  using Error::Error;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

/// A penalty failed the finiteness check required by the smoother.
class DegenerateDensity : public Error {
 public:
  using Error::Error;
};

/// Problem too large for a dense routine.
class SizeGuard : public Error {
 public:
  using Error::Error;
};

/// A pivot block of a block-tridiagonal factorization is not positive definite.
class NotSpd : public Error {
 public:
  NotSpd(const std::string& what, std::size_t block)
      : Error(what), block_(block) {}
  std::size_t block() const { return block_; }

 private:
  std::size_t block_;
};

/// A per-step T block (M + A D A^T) could not be factored.
class DegeneratePenalty : public Error {
 public:
  DegeneratePenalty(const std::string& what, std::size_t step, char which)
      : Error(what), step_(step), which_(which) {}
  std::size_t step() const { return step_; }
  /// 'w' for the process penalty, 'v' for the measurement penalty.
  char which() const { return which_; }

 private:
  std::size_t step_;
  char which_;
};

}  // namespace plqks
