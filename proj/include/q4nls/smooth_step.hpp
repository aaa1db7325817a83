#pragma once

#include <cmath>

namespace q4nls {

/// C-infinity step: 0 for x <= 0, 1 for x >= 1, and on (0, 1)
///   e^{-a/x} / (e^{-a/x} + e^{-a/(1-x)})
/// with steepness a > 0. Symmetric: s(1 - x) = 1 - s(x).
inline double smooth_step(double x, double steepness = 1.0) noexcept {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // 1 / (1 + e^{a/x - a/(1-x)}); exp overflow to inf yields 0 as required.
  return 1.0 / (1.0 + std::exp(steepness / x - steepness / (1.0 - x)));
}

}  // namespace q4nls
