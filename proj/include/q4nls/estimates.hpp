#pragma once

// Deterministic and Monte Carlo checks of the quantitative estimates: exponent
// formulas, the scaling identity, sub-Gaussian tails, probabilistic
// Strichartz bounds and the bilinear ratio.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "q4nls/fit.hpp"
#include "q4nls/grid.hpp"
#include "q4nls/propagator.hpp"
#include "q4nls/randomization.hpp"

namespace q4nls {

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Each index is
/// handled exactly once; callers write results into per-index slots, so the
/// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

// --- exponents -------------------------------------------------------------------

struct ExponentRecord {
  int dim = 0;
  int m = 3;
  double gamma_c = 0.0;
  double gamma_N = 0.0;
  double gamma_N_first = 0.0;   // (N-1)(N-4) / (2(N+5))
  double gamma_N_second = 0.0;  // (N-4) / 4
  bool gamma_N_in_range = false;  // N >= 5
  double beta_c = 0.0;
  std::optional<double> beta_N;  // undefined for N = 1, and for N = 2 with m < 4
};

/// Throws ValidationError for N < 1 or m < 3.
ExponentRecord critical_exponents(int dim, int m);

/// |‖f_λ‖ − λ^{γ−(N−4)/2}‖f‖| / ‖f_λ‖ in Ḣ^γ.
double scaling_identity_check(const Field& f, double gamma, double lambda);

// --- tails -----------------------------------------------------------------------

struct TailReport {
  std::vector<double> thresholds;
  std::vector<long long> counts;
  std::vector<double> empirical_probs;
  std::optional<LineFit> fit;  // log p against lambda^2, only with >= 3 nonzero counts
  long long samples = 0;
  std::string norm_descriptor;
};

/// Counts values > lambda_i. Throws ValidationError for unsorted or
/// non-positive thresholds and when every count is zero.
TailReport tail_report(std::span<const double> values, std::span<const double> thresholds,
                       std::string descriptor);

/// `count` thresholds evenly spaced in lambda^2 between the empirical median
/// and the value exceeded by about 3 samples. Degenerate (constant) samples give
/// three thresholds bracketing the constant.
std::vector<double> auto_thresholds(std::span<const double> values, int count = 12);

enum class TailMode { h_gamma, lebesgue };

struct TailExperiment {
  TailMode mode = TailMode::h_gamma;
  double gamma = 0.0;
  double p = 4.0;
  RandomizationSpec spec;
  double bump_steepness = 1.0;
  int samples = 10000;
  std::vector<double> thresholds;  // empty: auto
  int workers = 1;
};

/// Draw values are the norm of f^omega under the sample seed
/// derive_seed(spec.seed, i).
std::vector<double> randomization_norm_samples(const Field& f, const TailExperiment& ex);
TailReport randomization_tail_experiment(const Field& f, const TailExperiment& ex);

struct StrichartzExperiment {
  double q = 4.0;
  double r = 4.0;
  double T = 1.0;
  int time_steps = 64;   // quadrature intervals on [0, T]
  bool global = false;   // finite-horizon surrogate truncated by the wrap-around guard
  double guard_threshold = 1e-6;
  PropagatorParams params;
  RandomizationSpec spec;
  double bump_steepness = 1.0;
  int samples = 10000;
  std::vector<double> thresholds;
  int workers = 1;
};

struct StrichartzScaling {
  std::vector<double> horizons;  // T0, T0/2, T0/4
  std::vector<TailReport> reports;
  std::vector<double> decay_rates;  // c = -slope at each horizon
  LineFit c_vs_power;  // log c against log T^{-2/q}
};

struct StrichartzResult {
  TailReport report;
  double horizon = 0.0;  // T, or the guarded horizon for the surrogate
  std::optional<StrichartzScaling> scaling;  // local mode, when every horizon's tail can be fitted
};

/// Largest t_k = k T / steps with boundary_mass_fraction(U(t) f) within the
/// guard at every earlier sample. Throws WrapAroundError if already t_1 fails.
double guarded_horizon(const Field& f, double T, int steps, const PropagatorParams& params,
                       double guard_threshold);

StrichartzResult strichartz_tail_experiment(const Field& f, const StrichartzExperiment& ex);

// --- bilinear --------------------------------------------------------------------

struct BilinearReport {
  std::vector<int> M1;
  std::vector<int> M2;
  std::vector<double> ratios;
  double trend_slope = 0.0;  // log ratio against log(M2/M1)
};

/// ‖U(t)P_{M1} f · U(t)P_{M2} g‖_{L²([0,T]×box)} divided by
/// M1^{(N−4)/2} (M1/M2)^{3/2} ‖P_{M1} f‖ ‖P_{M2} g‖.
double bilinear_ratio(const Field& f, const Field& g, int M1, int M2,
                      const PropagatorParams& params, double T, int time_steps = 16);

/// Pairs (M1, M1 * k) for k in `multiples`; M2 is capped at half the Nyquist
/// frequency (ValidationError beyond it).
BilinearReport bilinear_sweep(const Field& f, const Field& g, int M1, std::span<const int> multiples,
                              const PropagatorParams& params, double T, int time_steps = 16);

// --- dilation scale --------------------------------------------------------------

struct Lambda0 {
  double value = 0.0;
  double exponent = 0.0;  // 1 / (N - 4 - 2 gamma)
  bool degenerate = false;  // epsilon = 1
};

/// (log(1/eps) ‖f‖² / δ²)^{1/(N−4−2γ)} with the proportionality constant set to 1.
Lambda0 dilation_scale_lambda0(double epsilon, double f_norm, double gamma, int dim, double delta);

}  // namespace q4nls
