#include "q4nls/solver.hpp"

#include <cmath>
#include <string>
#include <tuple>

#include "q4nls/detail/fft.hpp"
#include "q4nls/errors.hpp"

namespace q4nls {

namespace {

using detail::FftDirection;

void fft(std::vector<cplx>& data, const Grid& g, FftDirection dir) {
  detail::fft_inplace(data, g.dimension(), g.points_per_axis(), dir);
}

std::vector<double> dealias_mask(const Grid& g, double fraction) {
  const double cutoff = fraction * g.points_per_axis() / 2.0;
  std::vector<double> mask(g.size(), 1.0);
  std::vector<int> idx(static_cast<std::size_t>(g.dimension()));
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, idx);
    for (int i : idx)
      if (std::abs(g.signed_index(i)) > cutoff) {
        mask[flat] = 0.0;
        break;
      }
  }
  return mask;
}

bool finite(const std::vector<cplx>& v) {
  for (cplx c : v)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

}  // namespace

std::string_view to_string(Nonlinearity n) {
  return n == Nonlinearity::defocusing ? "defocusing" : "focusing";
}

Nonlinearity nonlinearity_from_string(std::string_view name) {
  if (name == "defocusing" || name == "+") return Nonlinearity::defocusing;
  if (name == "focusing" || name == "-") return Nonlinearity::focusing;
  throw ValidationError("unknown nonlinearity sign '" + std::string(name) + "'");
}

void EvolutionConfig::validate() const {
  params.validate();
  if (!(dt > 0.0)) throw ValidationError("evolution: dt must be positive");
  if (!(T > 0.0)) throw ValidationError("evolution: T must be positive");
  if (dt > T * (1.0 + 1e-12)) throw ValidationError("evolution: dt must not exceed T");
  if (!(dealias > 0.0 && dealias <= 1.0))
    throw ValidationError("evolution: dealias fraction must lie in (0, 1]");
  if (snapshot_stride < 1) throw ValidationError("evolution: snapshot stride must be >= 1");
  const double ratio = T / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw ValidationError("evolution: T must be an integer multiple of dt");
}

long long EvolutionConfig::steps() const { return std::llround(T / dt); }

// --- split step ----------------------------------------------------------------

Trajectory nonlinear_evolve(const Field& u0, const EvolutionConfig& cfg) {
  cfg.validate();
  const Grid& g = u0.grid();
  const auto xi2 = g.squared_wavenumbers();
  const auto mask = dealias_mask(g, cfg.dealias);
  std::vector<cplx> half(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    half[i] = free_phase(0.5 * cfg.dt, xi2[i], cfg.params.mu);

  const double rot = -sign_of(cfg.sign) * cfg.dt;
  const long long steps = cfg.steps();
  Field spec0 = transform(u0, Representation::spectral);
  std::vector<cplx> s(spec0.values().begin(), spec0.values().end());

  Trajectory tr;
  tr.push_back(0.0, transform(u0, Representation::physical));
  double last_good = 0.0;
  for (long long step = 1; step <= steps; ++step) {
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= half[i];
    if (cfg.nonlinear) {
      fft(s, g, FftDirection::inverse);
      for (auto& u : s) u *= std::polar(1.0, rot * std::norm(u));
      if (!finite(s))
        throw BlowUpError("nonlinear_evolve: non-finite state after t = " +
                              std::to_string(last_good),
                          last_good);
      fft(s, g, FftDirection::forward);
      for (std::size_t i = 0; i < s.size(); ++i) s[i] *= mask[i];
    }
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= half[i];
    const double t = static_cast<double>(step) * cfg.dt;
    if (!finite(s))
      throw BlowUpError("nonlinear_evolve: non-finite state after t = " + std::to_string(last_good),
                        last_good);
    last_good = t;
    if (step % cfg.snapshot_stride == 0 || step == steps) {
      std::vector<cplx> phys = s;
      fft(phys, g, FftDirection::inverse);
      tr.push_back(t, Field(g, Representation::physical, std::move(phys)));
    }
  }
  return tr;
}

ConservedQuantities conserved_quantities(const Field& u, const EvolutionConfig& cfg) {
  cfg.params.validate();
  const Field spec = transform(u, Representation::spectral);
  const auto xi2 = u.grid().squared_wavenumbers();
  const double h = u.grid().cell_volume();
  double mass = 0.0, bilap = 0.0, grad = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double a = std::norm(spec[i]);
    mass += a;
    bilap += xi2[i] * xi2[i] * a;
    grad += xi2[i] * a;
  }
  const Field phys = transform(u, Representation::physical);
  double quartic = 0.0;
  for (cplx v : phys.values()) quartic += std::norm(v) * std::norm(v);
  ConservedQuantities q;
  q.mass = mass * h;
  q.energy = 0.5 * bilap * h + 0.5 * cfg.params.mu * grad * h +
             0.25 * sign_of(cfg.sign) * quartic * h;
  return q;
}

// --- Duhamel / Picard ------------------------------------------------------------

namespace {

void require_compatible(const Trajectory& v, const Trajectory& z) {
  if (v.empty() || z.empty()) throw ValidationError("duhamel: empty trajectory");
  if (v.size() != z.size()) throw ValidationError("duhamel: v and z sample counts differ");
  if (!(v.grid() == z.grid())) throw ValidationError("duhamel: v and z grids differ");
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v.time(i) != z.time(i)) throw ValidationError("duhamel: v and z sample times differ");
  if (v.time(0) != 0.0) throw ValidationError("duhamel: sample times must start at 0");
}

}  // namespace

namespace {

/// Weights of int_0^1 e^{i theta x} (1 - x) dx and int_0^1 e^{i theta x} x dx.
std::pair<cplx, cplx> product_trapezoid_weights(double theta) {
  const cplx i(0.0, 1.0);
  if (std::abs(theta) < 0.05) {
    cplx a = 0.0, b = 0.0, term = 1.0;  // term = (i theta)^k / k!
    for (int k = 0; k < 8; ++k) {
      const cplx bk = term / static_cast<double>(k + 2);
      b += bk;
      a += term / static_cast<double>(k + 1) - bk;
      term *= i * theta / static_cast<double>(k + 1);
    }
    return {a, b};
  }
  const cplx e = std::exp(i * theta);
  const cplx mean = (e - 1.0) / (i * theta);
  const cplx b = (e - mean) / (i * theta);
  return {mean - b, b};
}

}  // namespace

Trajectory duhamel_map(const Trajectory& v, const Trajectory& z, const EvolutionConfig& cfg) {
  require_compatible(v, z);
  cfg.params.validate();
  const Grid& g = v.grid();
  const auto xi2 = g.squared_wavenumbers();
  const auto mask = dealias_mask(g, cfg.dealias);
  const double mu = cfg.params.mu;
  std::vector<double> omega(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) omega[k] = dispersion(xi2[k], mu);
  // -+ i: minus for the defocusing (+) sign.
  const cplx prefactor(0.0, -sign_of(cfg.sign));

  // Product trapezoid: N(s) interpolated linearly between samples, the
  // propagator phase integrated exactly.
  std::vector<cplx> accum(g.size(), 0.0);
  std::vector<cplx> prev;
  std::vector<cplx> wa(g.size()), wb(g.size());
  double weights_h = -1.0;
  Trajectory out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = v.time(i);
    const Field vp = transform(v.state(i), Representation::physical);
    const Field zp = transform(z.state(i), Representation::physical);
    std::vector<cplx> nl(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      const cplx w = vp[k] + zp[k];
      nl[k] = std::norm(w) * w;
    }
    fft(nl, g, FftDirection::forward);
    for (std::size_t k = 0; k < g.size(); ++k) nl[k] *= mask[k];
    if (i > 0) {
      const double t0 = v.time(i - 1);
      const double h = t - t0;
      if (h != weights_h) {
        for (std::size_t k = 0; k < g.size(); ++k)
          std::tie(wa[k], wb[k]) = product_trapezoid_weights(omega[k] * h);
        weights_h = h;
      }
      for (std::size_t k = 0; k < g.size(); ++k)
        if (mask[k] != 0.0)
          accum[k] += h * free_phase(-t0, xi2[k], mu) * (wa[k] * prev[k] + wb[k] * nl[k]);
    }
    std::vector<cplx> phi(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
      phi[k] = prefactor * free_phase(t, xi2[k], mu) * accum[k];
    fft(phi, g, FftDirection::inverse);
    out.push_back(t, Field(g, Representation::physical, std::move(phi)));
    prev = std::move(nl);
  }
  return out;
}

void PicardConfig::validate() const {
  if (max_iters < 1) throw ValidationError("picard: max_iters must be >= 1");
  if (!(tol >= 0.0)) throw ValidationError("picard: tol must be >= 0");
  if (!(divergence_threshold > 0.0)) throw ValidationError("picard: divergence threshold must be positive");
  if (!(tol < divergence_threshold))
    throw ValidationError("picard: tol must be below the divergence threshold");
}

double critical_regularity(int dim) noexcept { return (dim - 4) / 2.0; }

double sup_sobolev_distance(const Trajectory& a, const Trajectory& b, double gamma) {
  if (a.size() != b.size()) throw ValidationError("distance: sample counts differ");
  double sup = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Field pa = transform(a.state(i), Representation::physical);
    const Field pb = transform(b.state(i), Representation::physical);
    sup = std::max(sup, sobolev_norm(pa - pb, gamma));
  }
  return sup;
}

PicardResult picard_solve(const Trajectory& z, const EvolutionConfig& cfg, const PicardConfig& pc) {
  pc.validate();
  if (z.empty()) throw ValidationError("picard: empty forcing trajectory");
  const double gamma = critical_regularity(z.grid().dimension());

  Trajectory v;
  for (std::size_t i = 0; i < z.size(); ++i)
    v.push_back(z.time(i), Field(z.grid(), Representation::physical));

  PicardResult result;
  for (int k = 0; k < pc.max_iters; ++k) {
    Trajectory next = duhamel_map(v, z, cfg);
    const double res = sup_sobolev_distance(next, v, gamma);
    result.residuals.push_back(res);
    if (!std::isfinite(res) || res > pc.divergence_threshold)
      throw DivergenceError("picard: residual " + std::to_string(res) + " at iterate " +
                                std::to_string(k + 1) + " exceeds the divergence threshold",
                            result.residuals);
    v = std::move(next);
    if (res <= pc.tol) {
      result.converged = true;
      break;
    }
  }
  result.v = std::move(v);
  return result;
}

// --- scattering ------------------------------------------------------------------

std::vector<ScatteringIncrement> scattering_increments(
    const Trajectory& v, const PropagatorParams& params, double gamma,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  params.validate();
  std::vector<Field> pullback;
  pullback.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    pullback.push_back(free_evolve(transform(v.state(i), Representation::spectral), -v.time(i), params));
  std::vector<ScatteringIncrement> out;
  for (auto [i, j] : pairs) {
    if (i >= v.size() || j >= v.size()) throw ValidationError("scattering: index out of range");
    out.push_back({v.time(i), v.time(j), sobolev_norm(pullback[j] - pullback[i], gamma)});
  }
  return out;
}

std::vector<ScatteringIncrement> scattering_diagnostic(const Trajectory& v,
                                                       const PropagatorParams& params,
                                                       double gamma) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) pairs.emplace_back(i, i + 1);
  if (v.size() > 2) pairs.emplace_back(0, v.size() - 1);
  return scattering_increments(v, params, gamma, pairs);
}

}  // namespace q4nls
