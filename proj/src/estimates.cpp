#include "q4nls/estimates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "q4nls/detail/fft.hpp"
#include "q4nls/errors.hpp"
#include "q4nls/solver.hpp"

namespace q4nls {

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 0; t + 1 < threads; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// --- exponents -------------------------------------------------------------------

ExponentRecord critical_exponents(int dim, int m) {
  if (dim < 1) throw ValidationError("exponents: N must be >= 1");
  if (m < 3) throw ValidationError("exponents: m must be >= 3");
  const double N = dim;
  ExponentRecord r;
  r.dim = dim;
  r.m = m;
  r.gamma_c = (N - 4.0) / 2.0;
  r.gamma_N_first = (N - 1.0) * (N - 4.0) / (2.0 * (N + 5.0));
  r.gamma_N_second = (N - 4.0) / 4.0;
  r.gamma_N = std::max(r.gamma_N_first, r.gamma_N_second);
  r.gamma_N_in_range = dim >= 5;
  r.beta_c = N / 2.0 - 2.0 / (m - 1.0);
  if (dim == 2 && m >= 4)
    r.beta_N = r.beta_c - 0.5 + (m - 2.0) / (3.0 * m - 7.0);
  else if (dim >= 3 && m < 5)
    r.beta_N = r.beta_c - 0.5 + (5.0 - m) / (2.0 * (N - 1.0) * (m - 1.0));
  else if (dim >= 3)
    r.beta_N = r.beta_c - 0.5;
  return r;
}

double scaling_identity_check(const Field& f, double gamma, double lambda) {
  const Field scaled = rescale_field(f, lambda);
  const double lhs = homogeneous_sobolev_norm(scaled, gamma);
  const double rhs = std::pow(lambda, gamma - critical_regularity(f.grid().dimension())) *
                     homogeneous_sobolev_norm(f, gamma);
  if (lhs == 0.0) return rhs == 0.0 ? 0.0 : std::abs(rhs);
  return std::abs(lhs - rhs) / lhs;
}

// --- tails -----------------------------------------------------------------------

TailReport tail_report(std::span<const double> values, std::span<const double> thresholds,
                       std::string descriptor) {
  if (values.empty()) throw ValidationError("tail: no samples");
  if (thresholds.empty()) throw ValidationError("tail: no thresholds");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0)) throw ValidationError("tail: thresholds must be positive");
    if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
      throw ValidationError("tail: thresholds must be strictly increasing");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  TailReport rep;
  rep.samples = static_cast<long long>(values.size());
  rep.norm_descriptor = std::move(descriptor);
  rep.thresholds.assign(thresholds.begin(), thresholds.end());
  std::vector<double> x, y;
  for (double lam : thresholds) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), lam);
    rep.counts.push_back(above);
    const double p = static_cast<double>(above) / rep.samples;
    rep.empirical_probs.push_back(p);
    if (above > 0) {
      x.push_back(lam * lam);
      y.push_back(std::log(p));
    }
  }
  if (x.empty())
    throw ValidationError("tail: every threshold count is zero (thresholds too high)");
  if (x.size() >= 3) rep.fit = fit_line(x, y);
  return rep;
}

std::vector<double> auto_thresholds(std::span<const double> values, int count) {
  if (values.empty()) throw ValidationError("thresholds: no samples");
  if (count < 3) throw ValidationError("thresholds: need at least 3");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted[sorted.size() / 2];
  const double hi = sorted[sorted.size() - std::min<std::size_t>(sorted.size(), 3)];
  if (!(hi > lo) || !(lo > 0.0)) {
    const double c = sorted.back();
    if (!(c > 0.0)) throw ValidationError("thresholds: samples are identically zero");
    return {0.5 * c, (1.0 - 1e-6) * c, (1.0 + 1e-6) * c, 1.5 * c};
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double s = lo * lo + (hi * hi - lo * lo) * i / (count - 1);
    out[static_cast<std::size_t>(i)] = std::sqrt(s);
  }
  return out;
}

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

RandomizationSpec sample_spec(const RandomizationSpec& base, std::size_t i) {
  RandomizationSpec s = base;
  s.seed = derive_seed(base.seed, i);
  return s;
}

}  // namespace

std::vector<double> randomization_norm_samples(const Field& f, const TailExperiment& ex) {
  if (ex.samples < 1) throw ValidationError("tail: samples must be >= 1");
  if (ex.mode == TailMode::lebesgue && !(ex.p >= 1.0)) throw ValidationError("tail: p must be >= 1");
  ex.spec.validate();
  const BumpFunction bump(ex.bump_steepness);
  std::vector<double> values(static_cast<std::size_t>(ex.samples));
  parallel_for(values.size(), ex.workers, [&](std::size_t i) {
    const Field fw = dilated_randomize(f, sample_spec(ex.spec, i), bump);
    values[i] = ex.mode == TailMode::h_gamma ? sobolev_norm(fw, ex.gamma) : lp_norm(fw, ex.p);
  });
  return values;
}

TailReport randomization_tail_experiment(const Field& f, const TailExperiment& ex) {
  const auto values = randomization_norm_samples(f, ex);
  const auto thresholds = ex.thresholds.empty() ? auto_thresholds(values) : ex.thresholds;
  const std::string desc = ex.mode == TailMode::h_gamma ? "H^" + format_number(ex.gamma)
                                                        : "L^" + format_number(ex.p);
  return tail_report(values, thresholds, desc);
}

double guarded_horizon(const Field& f, double T, int steps, const PropagatorParams& params,
                       double guard_threshold) {
  if (!(T > 0.0) || steps < 1) throw ValidationError("guard: T and steps must be positive");
  std::vector<double> times;
  for (int k = 1; k <= steps; ++k) times.push_back(T * k / steps);
  const Trajectory tr = free_trajectory(f, times, params);
  double ok = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    if (boundary_mass_fraction(tr.state(k)) > guard_threshold) {
      if (k == 0)
        throw WrapAroundError("guard: boundary mass exceeds threshold already at t = " +
                                  format_number(times[0]),
                              times[0]);
      break;
    }
    ok = times[k];
  }
  return ok;
}

namespace {

/// L^q over samples 0..last of a uniform time grid with spacing dt.
double trapezoid_lq(std::span<const double> slice, std::size_t last, double dt, double q) {
  double integral = 0.0;
  for (std::size_t k = 0; k < last; ++k)
    integral += 0.5 * dt * (std::pow(slice[k], q) + std::pow(slice[k + 1], q));
  return std::pow(integral, 1.0 / q);
}

}  // namespace

StrichartzResult strichartz_tail_experiment(const Field& f, const StrichartzExperiment& ex) {
  ex.params.validate();
  ex.spec.validate();
  if (ex.samples < 1) throw ValidationError("strichartz: samples must be >= 1");
  if (!(ex.T > 0.0)) throw ValidationError("strichartz: T must be positive");
  if (ex.time_steps < 4 || ex.time_steps % 4 != 0)
    throw ValidationError("strichartz: time_steps must be a positive multiple of 4");
  const int dim = f.grid().dimension();
  if (ex.global) {
    if (!admissible(ex.q, ex.r, dim))
      throw ValidationError("strichartz: (q, r) = (" + format_number(ex.q) + ", " +
                            format_number(ex.r) + ") is not admissible in dimension " +
                            std::to_string(dim));
    if (std::isinf(ex.r)) throw ValidationError("strichartz: r must be finite");
  } else if (!(ex.q >= 2.0 && ex.r >= 2.0 && std::isfinite(ex.q) && std::isfinite(ex.r))) {
    throw ValidationError("strichartz: local mode needs 2 <= q, r < inf");
  }

  double horizon = ex.T;
  if (ex.global) horizon = guarded_horizon(f, ex.T, ex.time_steps, ex.params, ex.guard_threshold);
  // Global: quadrature over [0, horizon] at the configured resolution.
  const int steps = ex.global ? std::max(1, static_cast<int>(std::lround(horizon / ex.T * ex.time_steps)))
                              : ex.time_steps;
  const double dt = horizon / steps;

  const Grid& g = f.grid();
  const auto xi2 = g.squared_wavenumbers();
  const BumpFunction bump(ex.bump_steepness);
  const std::size_t S = static_cast<std::size_t>(ex.samples);
  // norms[level][i]: level 0 is the full horizon, 1 and 2 are halvings (local only).
  const int levels = ex.global ? 1 : 3;
  std::vector<std::vector<double>> norms(static_cast<std::size_t>(levels), std::vector<double>(S));
  std::vector<cplx> step_phase(g.size());
  for (std::size_t k = 0; k < g.size(); ++k)
    step_phase[k] = free_phase(dt, xi2[k], ex.params.mu);

  parallel_for(S, ex.workers, [&](std::size_t i) {
    const Field fw =
        transform(dilated_randomize(f, sample_spec(ex.spec, i), bump), Representation::spectral);
    std::vector<cplx> spec(fw.values().begin(), fw.values().end());
    std::vector<cplx> phys(spec.size());
    std::vector<double> slice(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) {
      if (k > 0)
        for (std::size_t j = 0; j < spec.size(); ++j) spec[j] *= step_phase[j];
      phys = spec;
      detail::fft_inplace(phys, g.dimension(), g.points_per_axis(), detail::FftDirection::inverse);
      double sum = 0.0;
      for (cplx v : phys) sum += std::pow(std::abs(v), ex.r);
      slice[static_cast<std::size_t>(k)] = std::pow(sum * g.cell_volume(), 1.0 / ex.r);
    }
    for (int l = 0; l < levels; ++l)
      norms[static_cast<std::size_t>(l)][i] =
          trapezoid_lq(slice, static_cast<std::size_t>(steps >> l), dt, ex.q);
  });

  auto describe = [&](double T) {
    return std::string(ex.global ? "surrogate " : "") + "L^" + format_number(ex.q) + "_t L^" +
           format_number(ex.r) + "_x on [0," + format_number(T) + "]";
  };
  StrichartzResult result;
  result.horizon = horizon;
  const auto th0 = ex.thresholds.empty() ? auto_thresholds(norms[0]) : ex.thresholds;
  result.report = tail_report(norms[0], th0, describe(horizon));
  if (!ex.global) {
    StrichartzScaling sc;
    std::vector<double> x, y;
    for (int l = 0; l < levels; ++l) {
      const double T = horizon / (1 << l);
      const auto& v = norms[static_cast<std::size_t>(l)];
      TailReport rep = l == 0 ? result.report : tail_report(v, auto_thresholds(v), describe(T));
      // A step tail (zero variance) has no decay rate to compare.
      if (!rep.fit) return result;
      const double c = -rep.fit->slope;
      sc.horizons.push_back(T);
      sc.decay_rates.push_back(c);
      sc.reports.push_back(std::move(rep));
      if (c > 0.0) {
        x.push_back(std::log(std::pow(T, -2.0 / ex.q)));
        y.push_back(std::log(c));
      }
    }
    if (x.size() >= 2) sc.c_vs_power = fit_line(x, y);
    result.scaling = std::move(sc);
  }
  return result;
}

// --- bilinear --------------------------------------------------------------------

double bilinear_ratio(const Field& f, const Field& g, int M1, int M2,
                      const PropagatorParams& params, double T, int time_steps) {
  params.validate();
  if (!(f.grid() == g.grid())) throw ValidationError("bilinear: f and g grids differ");
  if (M1 < 1 || M2 < M1) throw ValidationError("bilinear: need 1 <= M1 <= M2");
  if (!(T > 0.0) || time_steps < 1) throw ValidationError("bilinear: T and time_steps must be positive");
  const Field pf = lp_project(f, M1, LpMode::piece);
  const Field pg = lp_project(g, M2, LpMode::piece);
  const double nf = lp_norm(pf, 2.0);
  const double ng = lp_norm(pg, 2.0);
  if (nf == 0.0 || ng == 0.0)
    throw ValidationError("bilinear: empty projection (P_M1 f or P_M2 g vanishes)");

  std::vector<double> times;
  for (int k = 0; k <= time_steps; ++k) times.push_back(T * k / time_steps);
  Trajectory product;
  for (double t : times) {
    const Field a = transform(free_evolve(pf, t, params), Representation::physical);
    const Field b = transform(free_evolve(pg, t, params), Representation::physical);
    Field ab(a.grid(), Representation::physical);
    for (std::size_t i = 0; i < ab.size(); ++i) ab[i] = a[i] * b[i];
    product.push_back(t, std::move(ab));
  }
  const double num = spacetime_norm(product, 2.0, 2.0);
  const int dim = f.grid().dimension();
  const double den = std::pow(M1, (dim - 4) / 2.0) *
                     std::pow(static_cast<double>(M1) / M2, 1.5) * nf * ng;
  return num / den;
}

BilinearReport bilinear_sweep(const Field& f, const Field& g, int M1, std::span<const int> multiples,
                              const PropagatorParams& params, double T, int time_steps) {
  if (multiples.size() < 2) throw ValidationError("bilinear: sweep needs >= 2 pairs");
  const double cap = f.grid().nyquist() / 2.0;
  BilinearReport rep;
  std::vector<double> x, y;
  for (int k : multiples) {
    if (k < 1 || (k & (k - 1)) != 0) throw ValidationError("bilinear: multiples must be dyadic");
    const int M2 = M1 * k;
    if (M2 > cap)
      throw ValidationError("bilinear: M2 = " + std::to_string(M2) + " exceeds half-Nyquist " +
                            format_number(cap));
    const double r = bilinear_ratio(f, g, M1, M2, params, T, time_steps);
    rep.M1.push_back(M1);
    rep.M2.push_back(M2);
    rep.ratios.push_back(r);
    x.push_back(std::log(static_cast<double>(k)));
    y.push_back(std::log(r));
  }
  rep.trend_slope = fit_line(x, y).slope;
  return rep;
}

// --- dilation scale --------------------------------------------------------------

Lambda0 dilation_scale_lambda0(double epsilon, double f_norm, double gamma, int dim, double delta) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("lambda0: epsilon must lie in (0, 1]");
  if (!(f_norm >= 0.0)) throw ValidationError("lambda0: norm must be >= 0");
  if (!(delta > 0.0)) throw ValidationError("lambda0: delta must be positive");
  const double gc = (dim - 4) / 2.0;
  if (!(gamma < gc))
    throw ValidationError("lambda0: gamma = " + format_number(gamma) +
                          " must be below the critical exponent " + format_number(gc));
  Lambda0 out;
  out.exponent = 1.0 / (dim - 4.0 - 2.0 * gamma);
  out.degenerate = epsilon == 1.0;
  out.value = std::pow(std::log(1.0 / epsilon) * f_norm * f_norm / (delta * delta), out.exponent);
  return out;
}

}  // namespace q4nls
