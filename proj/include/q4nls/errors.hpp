#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace q4nls {

/// Rejected input: bad grid, bad parameter, malformed config.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A time integration produced non-finite values.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double last_good_time)
      : std::runtime_error(what), last_good_time_(last_good_time) {}
  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

/// A fixed-point iteration left its trust region.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// The periodic box is no longer a faithful surrogate for R^N.
class WrapAroundError : public std::runtime_error {
 public:
  WrapAroundError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace q4nls
