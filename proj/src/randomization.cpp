#include "q4nls/randomization.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "q4nls/errors.hpp"
#include "q4nls/smooth_step.hpp"

namespace q4nls {

// --- bump ----------------------------------------------------------------------

BumpFunction::BumpFunction(double steepness) : steepness_(steepness) {
  if (!(steepness > 0.0) || !std::isfinite(steepness))
    throw ValidationError("bump: steepness must be positive");
}

double BumpFunction::step(double x) const noexcept { return smooth_step(x, steepness_); }

double BumpFunction::window(double x) const noexcept { return step(x + 1.0) - step(x); }

double BumpFunction::operator()(std::span<const double> xi) const noexcept {
  double v = 1.0;
  for (double x : xi) {
    v *= window(x);
    if (v == 0.0) break;
  }
  return v;
}

BumpFunction build_bump(double steepness) { return BumpFunction(steepness); }

// --- distributions -------------------------------------------------------------

std::string_view to_string(CoefficientKind kind) {
  switch (kind) {
    case CoefficientKind::gaussian: return "gaussian";
    case CoefficientKind::bernoulli: return "bernoulli";
    case CoefficientKind::uniform_disk: return "uniform_disk";
    case CoefficientKind::degenerate: return "degenerate";
  }
  return "?";
}

CoefficientKind coefficient_kind_from_string(std::string_view name) {
  for (auto k : {CoefficientKind::gaussian, CoefficientKind::bernoulli,
                 CoefficientKind::uniform_disk, CoefficientKind::degenerate})
    if (to_string(k) == name) return k;
  throw ValidationError("unknown coefficient distribution '" + std::string(name) + "'");
}

double CoefficientDistribution::part_bound() const {
  switch (kind) {
    case CoefficientKind::gaussian: return std::numeric_limits<double>::infinity();
    case CoefficientKind::bernoulli: return 1.0 / std::numbers::sqrt2;
    case CoefficientKind::uniform_disk: return std::numbers::sqrt2;
    case CoefficientKind::degenerate: return 1.0;
  }
  return 0.0;
}

double CoefficientDistribution::mgf_constant() const {
  // Gaussian with variance 1/2: E e^{dX} = e^{d^2/4}. Bounded mean-zero parts
  // with |X| <= b: Hoeffding gives e^{d^2 (2b)^2 / 8} = e^{d^2 b^2 / 2}.
  if (kind == CoefficientKind::gaussian) return 0.25;
  const double b = part_bound();
  return b * b / 2.0;
}

void RandomizationSpec::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw ValidationError("randomization: scale lambda must be positive");
}

// --- counter-based sampling ----------------------------------------------------

namespace {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in (0, 1), never 0 or 1.
double to_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t sample) noexcept {
  return mix64(mix64(base) ^ mix64(sample + 0x5851f42d4c957f2dULL));
}

cplx sample_coefficient(const RandomizationSpec& spec, std::span<const std::int64_t> n) {
  if (spec.distribution.kind == CoefficientKind::degenerate) return {1.0, 0.0};
  std::uint64_t key = mix64(spec.seed);
  key = mix64(key ^ static_cast<std::uint64_t>(n.size()));
  for (std::int64_t c : n) key = mix64(key ^ static_cast<std::uint64_t>(c));
  const std::uint64_t b1 = mix64(key ^ 0x1ULL);
  const std::uint64_t b2 = mix64(key ^ 0x2ULL);

  switch (spec.distribution.kind) {
    case CoefficientKind::gaussian: {
      // Box-Muller: two independent N(0,1), scaled to variance 1/2.
      const double r = std::sqrt(-2.0 * std::log(to_unit(b1)));
      const double theta = 2.0 * std::numbers::pi * to_unit(b2);
      return {r * std::cos(theta) / std::numbers::sqrt2, r * std::sin(theta) / std::numbers::sqrt2};
    }
    case CoefficientKind::bernoulli: {
      const double a = 1.0 / std::numbers::sqrt2;
      return {(b1 >> 63) ? a : -a, (b2 >> 63) ? a : -a};
    }
    case CoefficientKind::uniform_disk: {
      const double r = std::numbers::sqrt2 * std::sqrt(to_unit(b1));
      const double theta = 2.0 * std::numbers::pi * to_unit(b2);
      return std::polar(r, theta);
    }
    case CoefficientKind::degenerate:
      break;
  }
  return {1.0, 0.0};
}

std::vector<cplx> sample_coefficients(const RandomizationSpec& spec,
                                      std::span<const LatticePoint> indices) {
  std::vector<cplx> out;
  out.reserve(indices.size());
  for (const auto& n : indices) out.push_back(sample_coefficient(spec, n));
  return out;
}

// --- randomization -------------------------------------------------------------

namespace {

void require_resolvable(const Grid& g, double scale) {
  if (g.frequency_spacing() * scale > 0.5 + 1e-15)
    throw ValidationError("randomization: cubes of side 1/lambda are not resolved; need "
                          "lambda * 2 pi / L <= 1/2");
}

struct AxisCubes {
  std::vector<std::int64_t> base;  // floor(lambda xi_i)
  std::vector<double> w0;          // h(lambda xi_i - base)
  std::vector<double> w1;          // h(lambda xi_i - base - 1)
  std::int64_t lo = 0;
  std::int64_t hi = 0;  // candidate centers lie in [lo, hi]
};

AxisCubes axis_cubes(const Grid& g, const BumpFunction& bump, double scale) {
  const auto n = static_cast<std::size_t>(g.points_per_axis());
  AxisCubes a;
  a.base.resize(n);
  a.w0.resize(n);
  a.w1.resize(n);
  a.lo = std::numeric_limits<std::int64_t>::max();
  a.hi = std::numeric_limits<std::int64_t>::min();
  for (std::size_t i = 0; i < n; ++i) {
    const double eta = scale * g.wavenumber(static_cast<int>(i));
    const auto b = static_cast<std::int64_t>(std::floor(eta));
    a.base[i] = b;
    a.w0[i] = bump.window(eta - static_cast<double>(b));
    a.w1[i] = bump.window(eta - static_cast<double>(b) - 1.0);
    a.lo = std::min(a.lo, b);
    a.hi = std::max(a.hi, b + 1);
  }
  return a;
}

}  // namespace

std::vector<LatticePoint> active_cubes(const Grid& grid, double scale) {
  const AxisCubes a = axis_cubes(grid, BumpFunction(1.0), scale);
  const auto dim = static_cast<std::size_t>(grid.dimension());
  const auto width = static_cast<std::size_t>(a.hi - a.lo + 1);
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= width;
  std::vector<LatticePoint> out;
  out.reserve(total);
  LatticePoint n(dim);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t d = dim; d-- > 0;) {
      n[d] = a.lo + static_cast<std::int64_t>(rem % width);
      rem /= width;
    }
    out.push_back(n);
  }
  return out;
}

Field cube_piece(const Field& f, std::span<const std::int64_t> n, const BumpFunction& bump,
                 double scale) {
  if (n.size() != static_cast<std::size_t>(f.grid().dimension()))
    throw ValidationError("cube_piece: index dimension mismatch");
  std::vector<std::int64_t> center(n.begin(), n.end());
  return apply_multiplier(f, [&](std::span<const double> xi) {
    double v = 1.0;
    for (std::size_t d = 0; d < xi.size() && v != 0.0; ++d)
      v *= bump.window(scale * xi[d] - static_cast<double>(center[d]));
    return cplx(v, 0.0);
  });
}

Field dilated_randomize(const Field& f, const RandomizationSpec& spec, const BumpFunction& bump) {
  spec.validate();
  const Grid& g = f.grid();
  require_resolvable(g, spec.scale);

  const AxisCubes a = axis_cubes(g, bump, spec.scale);
  const auto dim = static_cast<std::size_t>(g.dimension());
  const auto width = static_cast<std::size_t>(a.hi - a.lo + 1);

  // Dense table of g_n over the candidate box, row-major in (n_1, ..., n_N).
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= width;
  std::vector<cplx> coeff(total);
  {
    LatticePoint n(dim);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      for (std::size_t d = dim; d-- > 0;) {
        n[d] = a.lo + static_cast<std::int64_t>(rem % width);
        rem /= width;
      }
      coeff[flat] = sample_coefficient(spec, n);
    }
  }

  Field spec_f = transform(f, Representation::spectral);
  std::vector<int> idx(dim);
  const std::size_t corners = std::size_t{1} << dim;
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, idx);
    cplx m = 0.0;
    // Each lattice point meets at most two cubes per axis.
    for (std::size_t c = 0; c < corners; ++c) {
      double w = 1.0;
      std::size_t cell = 0;
      for (std::size_t d = 0; d < dim; ++d) {
        const auto i = static_cast<std::size_t>(idx[d]);
        const bool upper = (c >> d) & 1U;
        w *= upper ? a.w1[i] : a.w0[i];
        if (w == 0.0) break;
        cell = cell * width + static_cast<std::size_t>(a.base[i] + (upper ? 1 : 0) - a.lo);
      }
      if (w != 0.0) m += w * coeff[cell];
    }
    spec_f[flat] *= m;
  }
  return transform(spec_f, f.representation());
}

Field wiener_randomize(const Field& f, const RandomizationSpec& spec, const BumpFunction& bump) {
  if (spec.scale != 1.0)
    throw ValidationError("wiener_randomize: unit cubes require scale = 1; use dilated_randomize");
  return dilated_randomize(f, spec, bump);
}

// --- dilation ------------------------------------------------------------------

Field rescale_field(const Field& f, double lambda, double loss_tolerance) {
  int exponent = 0;
  if (!(lambda > 0.0) || !std::isfinite(lambda) || std::frexp(lambda, &exponent) != 0.5)
    throw ValidationError("rescale_field: lambda must be a power of two");
  const int j = exponent - 1;  // lambda = 2^j
  const Grid& g = f.grid();
  const int n = g.points_per_axis();
  const auto dim = static_cast<std::size_t>(g.dimension());
  const Field src = transform(f, Representation::spectral);
  if (j == 0) return transform(src, f.representation());

  const double factor = std::pow(lambda, 2.0 - 0.5 * static_cast<double>(dim));
  Field dst(g, Representation::spectral);
  double total = 0.0;
  double lost = 0.0;
  std::vector<int> idx(dim);
  std::vector<int> target(dim);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    const double mass = std::norm(src[flat]);
    total += mass;
    if (mass == 0.0) continue;
    g.unflatten(flat, idx);
    bool ok = true;
    for (std::size_t d = 0; d < dim && ok; ++d) {
      const int k = g.signed_index(idx[d]);
      long long mapped = 0;
      if (j > 0) {
        mapped = static_cast<long long>(k) << j;
      } else {
        const int div = 1 << (-j);
        if (k % div != 0) ok = false;
        mapped = k / div;
      }
      if (mapped < -n / 2 || mapped >= n / 2) ok = false;
      if (ok) target[d] = g.storage_index(static_cast<int>(mapped));
    }
    if (!ok) {
      lost += mass;
      continue;
    }
    dst[g.flatten(target)] = factor * src[flat];
  }
  if (total > 0.0 && std::sqrt(lost / total) > loss_tolerance)
    throw ValidationError("rescale_field: frequency content leaves the lattice band "
                          "(relative loss " + std::to_string(std::sqrt(lost / total)) + ")");
  return transform(dst, f.representation());
}

void write_coefficients_csv(std::ostream& out, std::span<const LatticePoint> indices,
                            std::span<const cplx> coefficients) {
  if (indices.size() != coefficients.size())
    throw ValidationError("coefficient dump: size mismatch");
  const std::size_t dim = indices.empty() ? 0 : indices.front().size();
  for (std::size_t d = 0; d < dim; ++d) out << 'n' << (d + 1) << ',';
  out << "re,im\n";
  char buf[64];
  for (std::size_t i = 0; i < indices.size(); ++i) {
    for (auto c : indices[i]) out << c << ',';
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", coefficients[i].real(), coefficients[i].imag());
    out << buf << '\n';
  }
}

}  // namespace q4nls
