#pragma once

#include <span>

namespace q4nls {

/// Ordinary least squares y = slope * x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;  // 1 when y is constant and exactly fitted
  double rms_residual = 0.0;
};

/// Throws ValidationError for fewer than two points or degenerate x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace q4nls
