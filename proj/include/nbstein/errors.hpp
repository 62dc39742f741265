#pragma once

#include <stdexcept>
#include <string>

namespace nbstein {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (r <= 0, p >= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not certify the requested accuracy.
/// Carries the best estimate obtained before giving up.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate)
      : Error(what), best_estimate_(best_estimate) {}
  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

/// Root bracket without a sign change.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Too few Monte Carlo samples for the requested statistic.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of a bound does not hold (e.g. nR <= r0).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A simulated population exceeded the hard cap.
class SupercriticalError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nbstein
