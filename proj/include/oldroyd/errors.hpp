#pragma once

#include <stdexcept>
#include <string>

namespace oldroyd {

/// Invalid parameters, unknown keys, shape/rank mismatches.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed request on data that cannot be processed (empty series,
/// non-monotone times, nonpositive values in a log fit, ...).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the time stepper when the state stops being representable.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double time, std::string reason)
      : std::runtime_error("blow-up at t=" + std::to_string(time) + ": " + reason),
        time_(time),
        reason_(std::move(reason)) {}

  double time() const noexcept { return time_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  double time_;
  std::string reason_;
};

}  // namespace oldroyd
