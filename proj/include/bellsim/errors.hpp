#pragma once

#include <stdexcept>
#include <string>

namespace bellsim {

// Every failure the library reports derives from Error so callers (notably
// the CLI) can map the category onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Grid too coarse or too small for the requested physical state.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class NumericalBlowupError : public Error {
 public:
  NumericalBlowupError(const std::string& what, double max_phase_per_step)
      : Error(what), max_phase_per_step_(max_phase_per_step) {}
  double max_phase_per_step() const noexcept { return max_phase_per_step_; }

 private:
  double max_phase_per_step_;
};

class SequencingError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, double measured)
      : Error(what), measured_(measured) {}
  double measured() const noexcept { return measured_; }

 private:
  double measured_;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class AnalysisError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace bellsim
