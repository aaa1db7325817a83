#pragma once

// Periodic box discretization of R^N and the fields that live on it.
//
// Layout conventions (fixed project-wide):
//   * values are stored row-major, last axis fastest;
//   * along each axis, storage index i carries the signed index
//     k = i for i < n/2 and k = i - n otherwise, in BOTH representations.
//     Physical coordinate is x = k * L / n, wavenumber is xi = 2 pi k / L.
//     The origin therefore sits at flat index 0;
//   * the discrete transform is unitary: both directions scale by n^{-N/2}.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace q4nls {

using cplx = std::complex<double>;

enum class Representation : std::uint8_t { physical = 0, spectral = 1 };

class Grid {
 public:
  /// Throws ValidationError unless dim >= 1, n is a power of two >= 4, L > 0.
  Grid(int dim, int n, double box_length);

  int dimension() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return n_; }
  double box_length() const noexcept { return length_; }
  std::size_t size() const noexcept { return size_; }

  double spacing() const noexcept { return length_ / n_; }
  double cell_volume() const noexcept { return cell_volume_; }
  double frequency_spacing() const noexcept;
  /// Largest resolved |xi_j| on one axis (pi n / L).
  double nyquist() const noexcept;

  /// Signed index carried by storage position i on one axis.
  int signed_index(int i) const noexcept { return i < n_ / 2 ? i : i - n_; }
  /// Storage position of signed index k, which must lie in [-n/2, n/2).
  int storage_index(int k) const noexcept { return k >= 0 ? k : k + n_; }
  double coordinate(int i) const noexcept { return signed_index(i) * spacing(); }
  double wavenumber(int i) const noexcept { return signed_index(i) * frequency_spacing(); }

  /// Per-axis storage positions of a flat index.
  void unflatten(std::size_t flat, std::span<int> out) const noexcept;
  std::size_t flatten(std::span<const int> idx) const noexcept;

  /// |xi|^2 at every lattice point, flat order.
  std::vector<double> squared_wavenumbers() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int dim_;
  int n_;
  double length_;
  std::size_t size_;
  double cell_volume_;
};

class Field {
 public:
  Field(Grid grid, Representation rep);
  Field(Grid grid, Representation rep, std::vector<cplx> values);

  /// Samples fn(x) on the physical grid.
  static Field from_function(const Grid& grid,
                             const std::function<cplx(std::span<const double>)>& fn);

  const Grid& grid() const noexcept { return grid_; }
  Representation representation() const noexcept { return rep_; }
  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> values() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  cplx operator[](std::size_t i) const noexcept { return values_[i]; }
  cplx& operator[](std::size_t i) noexcept { return values_[i]; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(cplx scale);

  bool all_finite() const noexcept;

 private:
  Grid grid_;
  Representation rep_;
  std::vector<cplx> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);

/// Sampled flow u(t_0), u(t_1), ... on a common grid.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<double> times, std::vector<Field> states);

  /// Appends a state; time must exceed the last one and grids must agree.
  void push_back(double t, Field state);

  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Field>& states() const noexcept { return states_; }
  const Field& state(std::size_t i) const { return states_.at(i); }
  double time(std::size_t i) const { return times_.at(i); }
  const Grid& grid() const { return states_.at(0).grid(); }

 private:
  std::vector<double> times_;
  std::vector<Field> states_;
};

// --- transforms and multipliers ------------------------------------------

/// Unitary DFT between representations; returns a copy if already there.
Field transform(const Field& f, Representation target);

/// Symbol evaluated at a wavenumber vector xi (length N).
using Symbol = std::function<cplx(std::span<const double>)>;

/// Pointwise multiplication of the spectral coefficients by m(xi_k).
/// Output keeps the input representation. Non-finite m on the lattice throws.
Field apply_multiplier(const Field& f, const Symbol& m);

/// Same, for a symbol depending only on |xi|^2 (the fast path).
Field apply_radial_multiplier(const Field& f, const std::function<cplx(double)>& m_of_xi2);

/// Keeps |k_j| <= fraction * n/2 on every axis, zeroes the rest.
Field dealias(const Field& f, double fraction);

// --- Littlewood-Paley ------------------------------------------------------

enum class LpMode { piece, up_to };

/// Radial cutoff phi: 1 on |xi| <= 1, 0 on |xi| >= 2, smooth in between.
double lp_cutoff(double xi_abs);
/// Symbol of P_M (mode piece) or P_{<=M} (mode up_to) at |xi|.
double lp_symbol(double xi_abs, int M, LpMode mode);
/// Throws ValidationError unless M is a positive power of two (or 1).
Field lp_project(const Field& f, int M, LpMode mode);

// --- norms -------------------------------------------------------------------

/// (sum |f|^p h^N)^{1/p}; p = +inf gives the max over grid points.
double lp_norm(const Field& f, double p);
/// <xi>^gamma weighted, via discrete Parseval.
double sobolev_norm(const Field& f, double gamma);
/// |xi|^gamma weighted; the zero mode is dropped when gamma <= 0.
double homogeneous_sobolev_norm(const Field& f, double gamma);

enum class NormKind { lebesgue, sobolev, homogeneous_sobolev };

struct NormSpec {
  NormKind kind = NormKind::lebesgue;
  double gamma = 0.0;
  double p = 2.0;
};

double norm(const Field& f, const NormSpec& spec);

/// L^q_t L^r_x over the sampled times: trapezoid in t, max when q = inf.
double spacetime_norm(const Trajectory& tr, double q, double r);

}  // namespace q4nls
