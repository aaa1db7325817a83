#pragma once

// Wiener randomization on unit and dilated frequency cubes.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "q4nls/grid.hpp"

namespace q4nls {

/// Partition-of-unity generator. The 1-D window h(x) = s(x+1) - s(x) built
/// from the smooth step s is supported in [-1, 1] and its integer translates
/// telescope to 1; psi is the tensor product of h over the axes.
class BumpFunction {
 public:
  explicit BumpFunction(double steepness = 1.0);

  double steepness() const noexcept { return steepness_; }
  double step(double x) const noexcept;
  double window(double x) const noexcept;
  double operator()(std::span<const double> xi) const noexcept;

 private:
  double steepness_;
};

/// Throws ValidationError for steepness <= 0.
BumpFunction build_bump(double steepness);

enum class CoefficientKind {
  gaussian,      // each part N(0, 1/2)
  bernoulli,     // each part +-1/sqrt(2)
  uniform_disk,  // uniform on |g| <= sqrt(2)
  degenerate,    // g = 1; reassembly hook, not mean zero
};

std::string_view to_string(CoefficientKind kind);
/// Throws ValidationError on unknown names.
CoefficientKind coefficient_kind_from_string(std::string_view name);

struct CoefficientDistribution {
  CoefficientKind kind = CoefficientKind::gaussian;

  /// c with E e^{delta X} <= e^{c delta^2} for each real part X.
  double mgf_constant() const;
  /// Largest |part| for bounded kinds, +inf for the Gaussian.
  double part_bound() const;
};

struct RandomizationSpec {
  CoefficientDistribution distribution;
  std::uint64_t seed = 0;
  double scale = 1.0;  // dilation lambda; 1 means unit cubes

  void validate() const;
};

using LatticePoint = std::vector<std::int64_t>;

/// g_n as a pure function of (seed, n): independent of enumeration order and
/// of which other indices are drawn.
cplx sample_coefficient(const RandomizationSpec& spec, std::span<const std::int64_t> n);
std::vector<cplx> sample_coefficients(const RandomizationSpec& spec,
                                      std::span<const LatticePoint> indices);

/// Derives the seed of Monte Carlo draw `sample` from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t sample) noexcept;

/// Cube centers n whose dilated cube meets the grid's frequency band.
std::vector<LatticePoint> active_cubes(const Grid& grid, double scale);

/// psi(lambda D - n) f, one term of the randomization sum.
Field cube_piece(const Field& f, std::span<const std::int64_t> n, const BumpFunction& bump,
                 double scale);

/// f^omega = sum_n g_n psi(D - n) f. Requires spec.scale == 1 and
/// frequency spacing 2 pi / L <= 1/2.
Field wiener_randomize(const Field& f, const RandomizationSpec& spec, const BumpFunction& bump);

/// f^{omega,lambda} = sum_n g_n psi(lambda D - n) f on cubes of side 1/lambda.
Field dilated_randomize(const Field& f, const RandomizationSpec& spec, const BumpFunction& bump);

/// f_lambda = lambda^2 f(lambda x) for lambda = 2^j, as an exact remapping of
/// lattice modes k -> lambda k. On the torus this is the L/lambda-periodic
/// copy of the dilated profile, normalized per period so that
/// ||f_lambda||_{H^gamma dot} = lambda^{gamma - (N-4)/2} ||f||_{H^gamma dot} holds
/// exactly. Throws if lambda is not a power of two or if content would leave
/// the lattice (relative l2 loss above `loss_tolerance`).
Field rescale_field(const Field& f, double lambda, double loss_tolerance = 1e-12);

/// CSV rows "n1,...,nN,re,im" with header.
void write_coefficients_csv(std::ostream& out, std::span<const LatticePoint> indices,
                            std::span<const cplx> coefficients);

}  // namespace q4nls
