#pragma once

#include <stdexcept>
#include <string>

namespace fluxbell {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-domain parameter or inconsistent configuration.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : Error(field + ": " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// An algorithm did not reach its accuracy target.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Eigensolver failed for one specific state.
class EigenConvergenceError : public NumericalError {
 public:
  EigenConvergenceError(int state_index, const std::string& message)
      : NumericalError(message), state_index_(state_index) {}
  int state_index() const noexcept { return state_index_; }

 private:
  int state_index_;
};

// Splitting of the lowest doublet is too small to define a period.
class DegenerateDoubletError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Projection onto the truncated basis lost too much norm.
class BasisTooSmallError : public NumericalError {
 public:
  BasisTooSmallError(double loss, const std::string& message)
      : NumericalError(message), loss_(loss) {}
  double loss() const noexcept { return loss_; }

 private:
  double loss_;
};

// The filter annihilates the state: the recorded outcome has zero probability.
class ImpossibleOutcomeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Outcome density has no mass on the outcome grid.
class DegenerateDensityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A scan point failed; carries the offending quiescent times.
class ScanPointError : public NumericalError {
 public:
  ScanPointError(double t_ab, double t_bc, const std::string& message)
      : NumericalError(message), t_ab_(t_ab), t_bc_(t_bc) {}
  double t_ab() const noexcept { return t_ab_; }
  double t_bc() const noexcept { return t_bc_; }

 private:
  double t_ab_;
  double t_bc_;
};

// Malformed input file or failed I/O.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace fluxbell
