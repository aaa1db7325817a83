#pragma once

// i u_t - Delta^2 u + mu Delta u = +-|u|^2 u: split-step integration, the
// Duhamel map for the nonlinear remainder v = u - z, Picard iteration and
// the scattering diagnostic.

#include <string_view>
#include <utility>
#include <vector>

#include "q4nls/grid.hpp"
#include "q4nls/propagator.hpp"

namespace q4nls {

/// Plus sign: defocusing. Minus sign: focusing.
enum class Nonlinearity { defocusing, focusing };

inline double sign_of(Nonlinearity n) noexcept { return n == Nonlinearity::defocusing ? 1.0 : -1.0; }
std::string_view to_string(Nonlinearity n);
Nonlinearity nonlinearity_from_string(std::string_view name);

struct EvolutionConfig {
  PropagatorParams params;
  Nonlinearity sign = Nonlinearity::defocusing;
  double dt = 1e-3;
  double T = 1.0;
  double dealias = 0.5;  // retained fraction of the band per axis; 2/3 is the other common rule
  int snapshot_stride = 1;
  bool nonlinear = true;  // false turns the integrator into the free flow (test hook)

  void validate() const;
  /// T / dt, which must be an integer up to rounding.
  long long steps() const;
};

/// Strang splitting: half linear step (exact multiplier), full nonlinear step
/// u <- u exp(-+ i |u|^2 dt), dealias, half linear step. Snapshots at t = 0 and
/// every `snapshot_stride` steps. Throws BlowUpError on non-finite values.
Trajectory nonlinear_evolve(const Field& u0, const EvolutionConfig& cfg);

struct ConservedQuantities {
  double mass = 0.0;
  double energy = 0.0;
};

/// mass = ||u||^2, energy = 1/2 ||Delta u||^2 + mu/2 ||grad u||^2 +- 1/4 ||u||_4^4.
ConservedQuantities conserved_quantities(const Field& u, const EvolutionConfig& cfg);

/// Phi(v)(t) = -+ i int_0^t U(t - s) |v + z|^2 (v + z)(s) ds over the shared
/// sample times (which must start at 0). Product trapezoid rule: the dealiased
/// nonlinearity is linear between samples, U is integrated exactly.
Trajectory duhamel_map(const Trajectory& v, const Trajectory& z, const EvolutionConfig& cfg);

struct PicardConfig {
  int max_iters = 50;
  double tol = 1e-10;
  double divergence_threshold = 1e6;

  void validate() const;
};

struct PicardResult {
  Trajectory v;
  std::vector<double> residuals;  // sup_t ||v_{k+1} - v_k||_{H^gamma_c}
  bool converged = false;
};

/// v_0 = 0, v_{k+1} = Phi(v_k) until the residual drops below tol. Throws
/// DivergenceError when the residual exceeds the threshold or is non-finite.
PicardResult picard_solve(const Trajectory& z, const EvolutionConfig& cfg, const PicardConfig& pc);

/// (N - 4) / 2.
double critical_regularity(int dim) noexcept;

/// sup_i ||a_i - b_i||_{H^gamma} over shared sample times.
double sup_sobolev_distance(const Trajectory& a, const Trajectory& b, double gamma);

struct ScatteringIncrement {
  double t_from = 0.0;
  double t_to = 0.0;
  double increment = 0.0;  // ||w(t_to) - w(t_from)||_{H^gamma}, w(t) = U(-t) v(t)
};

/// Increments of the pullback w over the requested index pairs.
std::vector<ScatteringIncrement> scattering_increments(
    const Trajectory& v, const PropagatorParams& params, double gamma,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

/// Consecutive pairs followed by (first, last).
std::vector<ScatteringIncrement> scattering_diagnostic(const Trajectory& v,
                                                       const PropagatorParams& params,
                                                       double gamma);

}  // namespace q4nls
