#pragma once

// The free flow U_mu(t) = exp(-i t (Delta^2 - mu Delta)) as a Fourier multiplier.

#include <span>
#include <vector>

#include "q4nls/fit.hpp"
#include "q4nls/grid.hpp"

namespace q4nls {

struct PropagatorParams {
  double mu = 0.0;

  /// mu < 0 is rejected: the implemented estimates assume mu >= 0.
  void validate() const;
};

/// |xi|^4 + mu |xi|^2, the dispersion relation.
inline double dispersion(double xi2, double mu) noexcept { return xi2 * xi2 + mu * xi2; }

/// e^{-i t (|xi|^4 + mu |xi|^2)}, with the phase reduced mod 2 pi in extended precision.
cplx free_phase(double t, double xi2, double mu) noexcept;

Field free_evolve(const Field& f, double t, const PropagatorParams& params);

/// z(t_i) = U_mu(t_i) f for each sample time.
Trajectory free_trajectory(const Field& f, std::span<const double> times,
                           const PropagatorParams& params);

/// Fraction of L^2 mass with max_j |x_j| > 3L/8 (the outer shell of the box).
double boundary_mass_fraction(const Field& f);

struct DecayFit {
  double slope = 0.0;      // fitted exponent of ||U(t) f||_inf ~ C t^slope
  double intercept = 0.0;  // log C
  double constant = 0.0;   // C
  double residual = 0.0;   // rms residual in log space
  std::vector<double> times;
  std::vector<double> sup_norms;
};

/// Least-squares power law through (t_i, values_i) in log-log coordinates.
DecayFit fit_power_law(std::span<const double> times, std::span<const double> values);

/// Fits ||U_mu(t) f||_{L^inf} against t. Throws WrapAroundError naming the
/// first time at which boundary_mass_fraction exceeds guard_threshold.
DecayFit dispersive_decay_fit(const Field& f, std::span<const double> times,
                              const PropagatorParams& params, double guard_threshold = 1e-6);

/// 4/q + N/r = N/2 (to 1e-12) with the dimension-dependent range of r.
/// Infinite exponents are passed as +inf.
bool admissible(double q, double r, int dim);

}  // namespace q4nls
