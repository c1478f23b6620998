#pragma once

#include <stdexcept>
#include <string>

namespace bayesid {

/// Precondition violations: bad dimensions, out-of-range parameters, non-finite inputs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The ODE integrator could not advance past `time()`.
class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, double time)
      : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// A symmetric factorization failed even after jitter; carries the log|det| seen.
class NumericalBreakdown : public std::runtime_error {
 public:
  NumericalBreakdown(const std::string& what, double logdet)
      : std::runtime_error(what + " (log|det| = " + std::to_string(logdet) + ")"), logdet_(logdet) {}
  double logdet() const noexcept { return logdet_; }

 private:
  double logdet_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bayesid
