#include "q4nls/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "q4nls/detail/fft.hpp"
#include "q4nls/errors.hpp"
#include "q4nls/smooth_step.hpp"

namespace q4nls {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void require_same_layout(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw ValidationError("field arithmetic: grids differ");
  if (a.representation() != b.representation())
    throw ValidationError("field arithmetic: representations differ");
}

}  // namespace

// --- Grid ------------------------------------------------------------------

Grid::Grid(int dim, int n, double box_length) : dim_(dim), n_(n), length_(box_length) {
  if (dim < 1) throw ValidationError("grid: dimension must be >= 1");
  if (!is_power_of_two(n) || n < 4)
    throw ValidationError("grid: points per axis must be a power of two >= 4, got " +
                          std::to_string(n));
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw ValidationError("grid: box length must be positive");
  size_ = 1;
  for (int d = 0; d < dim; ++d) size_ *= static_cast<std::size_t>(n);
  cell_volume_ = std::pow(spacing(), dim);
}

double Grid::frequency_spacing() const noexcept { return 2.0 * std::numbers::pi / length_; }

double Grid::nyquist() const noexcept { return std::numbers::pi * n_ / length_; }

void Grid::unflatten(std::size_t flat, std::span<int> out) const noexcept {
  for (int d = dim_ - 1; d >= 0; --d) {
    out[static_cast<std::size_t>(d)] = static_cast<int>(flat % static_cast<std::size_t>(n_));
    flat /= static_cast<std::size_t>(n_);
  }
}

std::size_t Grid::flatten(std::span<const int> idx) const noexcept {
  std::size_t flat = 0;
  for (int d = 0; d < dim_; ++d)
    flat = flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx[static_cast<std::size_t>(d)]);
  return flat;
}

std::vector<double> Grid::squared_wavenumbers() const {
  std::vector<double> axis(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) axis[static_cast<std::size_t>(i)] = wavenumber(i) * wavenumber(i);
  // Built axis by axis: out[flat] = sum_d axis[idx_d].
  std::vector<double> out(size_, 0.0);
  std::size_t stride = 1;
  for (int d = dim_ - 1; d >= 0; --d) {
    for (std::size_t flat = 0; flat < size_; ++flat)
      out[flat] += axis[(flat / stride) % static_cast<std::size_t>(n_)];
    stride *= static_cast<std::size_t>(n_);
  }
  return out;
}

// --- Field -----------------------------------------------------------------

Field::Field(Grid grid, Representation rep) : grid_(grid), rep_(rep), values_(grid.size()) {}

Field::Field(Grid grid, Representation rep, std::vector<cplx> values)
    : grid_(grid), rep_(rep), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw ValidationError("field: expected " + std::to_string(grid_.size()) + " values, got " +
                          std::to_string(values_.size()));
}

Field Field::from_function(const Grid& grid,
                           const std::function<cplx(std::span<const double>)>& fn) {
  Field f(grid, Representation::physical);
  const auto dim = static_cast<std::size_t>(grid.dimension());
  std::vector<int> idx(dim);
  std::vector<double> x(dim);
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    grid.unflatten(flat, idx);
    for (std::size_t d = 0; d < dim; ++d) x[d] = grid.coordinate(idx[d]);
    f.values_[flat] = fn(x);
  }
  return f;
}

Field& Field::operator+=(const Field& other) {
  require_same_layout(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_layout(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(cplx scale) {
  for (auto& v : values_) v *= scale;
  return *this;
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](cplx v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx s, Field a) { return a *= s; }

// --- Trajectory ------------------------------------------------------------

Trajectory::Trajectory(std::vector<double> times, std::vector<Field> states) {
  if (times.size() != states.size())
    throw ValidationError("trajectory: times and states differ in length");
  for (std::size_t i = 0; i < times.size(); ++i) push_back(times[i], std::move(states[i]));
}

void Trajectory::push_back(double t, Field state) {
  if (!times_.empty()) {
    if (!(t > times_.back())) throw ValidationError("trajectory: times must increase strictly");
    if (!(state.grid() == states_.front().grid()))
      throw ValidationError("trajectory: states must share one grid");
  }
  times_.push_back(t);
  states_.push_back(std::move(state));
}

// --- transforms --------------------------------------------------------------

Field transform(const Field& f, Representation target) {
  Field out = f;
  if (f.representation() == target) return out;
  std::vector<cplx> values(f.values().begin(), f.values().end());
  detail::fft_inplace(values, f.grid().dimension(), f.grid().points_per_axis(),
                      target == Representation::spectral ? detail::FftDirection::forward
                                                         : detail::FftDirection::inverse);
  return Field(f.grid(), target, std::move(values));
}

Field apply_multiplier(const Field& f, const Symbol& m) {
  const Grid& g = f.grid();
  Field spec = transform(f, Representation::spectral);
  const auto dim = static_cast<std::size_t>(g.dimension());
  std::vector<int> idx(dim);
  std::vector<double> xi(dim);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, idx);
    for (std::size_t d = 0; d < dim; ++d) xi[d] = g.wavenumber(idx[d]);
    const cplx factor = m(xi);
    if (!std::isfinite(factor.real()) || !std::isfinite(factor.imag()))
      throw ValidationError("multiplier: non-finite symbol value on the lattice");
    spec[flat] *= factor;
  }
  return transform(spec, f.representation());
}

Field apply_radial_multiplier(const Field& f, const std::function<cplx(double)>& m_of_xi2) {
  Field spec = transform(f, Representation::spectral);
  const auto xi2 = f.grid().squared_wavenumbers();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const cplx factor = m_of_xi2(xi2[i]);
    if (!std::isfinite(factor.real()) || !std::isfinite(factor.imag()))
      throw ValidationError("multiplier: non-finite symbol value on the lattice");
    spec[i] *= factor;
  }
  return transform(spec, f.representation());
}

Field dealias(const Field& f, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ValidationError("dealias: fraction must lie in (0, 1]");
  const Grid& g = f.grid();
  const double cutoff = fraction * g.points_per_axis() / 2.0;
  Field spec = transform(f, Representation::spectral);
  std::vector<int> idx(static_cast<std::size_t>(g.dimension()));
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, idx);
    for (int i : idx) {
      if (std::abs(g.signed_index(i)) > cutoff) {
        spec[flat] = 0.0;
        break;
      }
    }
  }
  return transform(spec, f.representation());
}

// --- Littlewood-Paley ----------------------------------------------------------

double lp_cutoff(double xi_abs) { return smooth_step(2.0 - xi_abs); }

double lp_symbol(double xi_abs, int M, LpMode mode) {
  const double scaled = xi_abs / M;
  if (mode == LpMode::up_to || M == 1) return lp_cutoff(scaled);
  return lp_cutoff(scaled) - lp_cutoff(2.0 * scaled);
}

Field lp_project(const Field& f, int M, LpMode mode) {
  if (!is_power_of_two(M)) throw ValidationError("lp_project: M must be dyadic (1, 2, 4, ...)");
  return apply_radial_multiplier(
      f, [M, mode](double xi2) { return cplx(lp_symbol(std::sqrt(xi2), M, mode), 0.0); });
}

// --- norms ---------------------------------------------------------------------

double lp_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw ValidationError("lp_norm: p must be >= 1");
  Field phys = transform(f, Representation::physical);
  if (std::isinf(p)) {
    double m = 0.0;
    for (cplx v : phys.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double sum = 0.0;
  if (p == 2.0) {
    for (cplx v : phys.values()) sum += std::norm(v);
    return std::sqrt(sum * f.grid().cell_volume());
  }
  for (cplx v : phys.values()) sum += std::pow(std::abs(v), p);
  return std::pow(sum * f.grid().cell_volume(), 1.0 / p);
}

namespace {

template <class Weight>
double weighted_spectral_norm(const Field& f, Weight weight) {
  Field spec = transform(f, Representation::spectral);
  const auto xi2 = f.grid().squared_wavenumbers();
  double sum = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) sum += weight(xi2[i]) * std::norm(spec[i]);
  return std::sqrt(sum * f.grid().cell_volume());
}

}  // namespace

double sobolev_norm(const Field& f, double gamma) {
  if (gamma == 0.0) return weighted_spectral_norm(f, [](double) { return 1.0; });
  return weighted_spectral_norm(f, [gamma](double xi2) { return std::pow(1.0 + xi2, gamma); });
}

double homogeneous_sobolev_norm(const Field& f, double gamma) {
  return weighted_spectral_norm(f, [gamma](double xi2) {
    // |0|^gamma = 0 for gamma > 0; the mode is excluded for gamma <= 0.
    if (xi2 == 0.0) return 0.0;
    return std::pow(xi2, gamma);
  });
}

double norm(const Field& f, const NormSpec& spec) {
  switch (spec.kind) {
    case NormKind::lebesgue:
      return lp_norm(f, spec.p);
    case NormKind::sobolev:
      return sobolev_norm(f, spec.gamma);
    case NormKind::homogeneous_sobolev:
      return homogeneous_sobolev_norm(f, spec.gamma);
  }
  return 0.0;
}

double spacetime_norm(const Trajectory& tr, double q, double r) {
  if (!(q >= 1.0) || !(r >= 1.0)) throw ValidationError("spacetime_norm: q, r must be >= 1");
  if (tr.empty()) throw ValidationError("spacetime_norm: empty trajectory");
  std::vector<double> slice(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) slice[i] = lp_norm(tr.state(i), r);
  if (std::isinf(q)) return *std::max_element(slice.begin(), slice.end());
  if (tr.size() < 2) throw ValidationError("spacetime_norm: need >= 2 samples for finite q");
  double integral = 0.0;
  const auto& t = tr.times();
  for (std::size_t i = 0; i + 1 < tr.size(); ++i)
    integral += 0.5 * (t[i + 1] - t[i]) * (std::pow(slice[i], q) + std::pow(slice[i + 1], q));
  return std::pow(integral, 1.0 / q);
}

}  // namespace q4nls
