#include "q4nls/propagator.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "q4nls/errors.hpp"

namespace q4nls {

void PropagatorParams::validate() const {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw ValidationError("propagator: mu must be finite and >= 0");
}

cplx free_phase(double t, double xi2, double mu) noexcept {
  constexpr long double two_pi = 6.283185307179586476925286766559L;
  const long double x = static_cast<long double>(xi2);
  const long double phase = std::fmod(static_cast<long double>(t) * (x * x + static_cast<long double>(mu) * x), two_pi);
  return std::polar(1.0, -static_cast<double>(phase));
}

Field free_evolve(const Field& f, double t, const PropagatorParams& params) {
  params.validate();
  if (t == 0.0) return f;
  const double mu = params.mu;
  return apply_radial_multiplier(f, [t, mu](double xi2) { return free_phase(t, xi2, mu); });
}

Trajectory free_trajectory(const Field& f, std::span<const double> times,
                           const PropagatorParams& params) {
  params.validate();
  const Field spec = transform(f, Representation::spectral);
  const auto xi2 = f.grid().squared_wavenumbers();
  Trajectory tr;
  for (double t : times) {
    Field g(spec.grid(), Representation::spectral);
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = spec[i] * free_phase(t, xi2[i], params.mu);
    tr.push_back(t, transform(g, f.representation()));
  }
  return tr;
}

double boundary_mass_fraction(const Field& f) {
  const Field phys = transform(f, Representation::physical);
  const Grid& g = f.grid();
  const double edge = 3.0 * g.box_length() / 8.0;
  std::vector<int> idx(static_cast<std::size_t>(g.dimension()));
  double total = 0.0;
  double outer = 0.0;
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    const double m = std::norm(phys[flat]);
    total += m;
    g.unflatten(flat, idx);
    for (int i : idx) {
      if (std::abs(g.coordinate(i)) > edge) {
        outer += m;
        break;
      }
    }
  }
  return total > 0.0 ? outer / total : 0.0;
}

DecayFit fit_power_law(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw ValidationError("power-law fit: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || !(values[i] > 0.0))
      throw ValidationError("power-law fit: times and values must be positive");
    lx.push_back(std::log(times[i]));
    ly.push_back(std::log(values[i]));
  }
  const LineFit line = fit_line(lx, ly);
  DecayFit out;
  out.slope = line.slope;
  out.intercept = line.intercept;
  out.constant = std::exp(line.intercept);
  out.residual = line.rms_residual;
  out.times.assign(times.begin(), times.end());
  out.sup_norms.assign(values.begin(), values.end());
  return out;
}

DecayFit dispersive_decay_fit(const Field& f, std::span<const double> times,
                              const PropagatorParams& params, double guard_threshold) {
  params.validate();
  if (times.size() < 2) throw ValidationError("decay fit: need at least two times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw ValidationError("decay fit: times must be positive");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw ValidationError("decay fit: times must increase");
  }
  const Field spec = transform(f, Representation::spectral);
  const auto xi2 = f.grid().squared_wavenumbers();
  std::vector<double> sup_norms;
  for (double t : times) {
    Field g(spec.grid(), Representation::spectral);
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = spec[i] * free_phase(t, xi2[i], params.mu);
    const Field u = transform(g, Representation::physical);
    const double leak = boundary_mass_fraction(u);
    if (leak > guard_threshold)
      throw WrapAroundError("decay fit: boundary mass " + std::to_string(leak) +
                                " exceeds guard at t = " + std::to_string(t),
                            t);
    sup_norms.push_back(lp_norm(u, std::numeric_limits<double>::infinity()));
  }
  return fit_power_law(times, sup_norms);
}

bool admissible(double q, double r, int dim) {
  if (!(q >= 2.0) || !(r >= 2.0)) return false;
  const double n = dim;
  const double lhs = (std::isinf(q) ? 0.0 : 4.0 / q) + (std::isinf(r) ? 0.0 : n / r);
  if (std::abs(lhs - n / 2.0) > 1e-12) return false;
  if (dim >= 5) return r <= 2.0 * n / (n - 4.0) + 1e-12;
  if (dim == 4) return !std::isinf(r);
  return true;
}

}  // namespace q4nls
