#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "q4nls/errors.hpp"
#include "q4nls/randomization.hpp"
#include "q4nls/smooth_step.hpp"

using namespace q4nls;
using std::numbers::pi;

namespace {

Field gaussian(const Grid& g, double width, std::array<double, 3> center = {0, 0, 0}) {
  return Field::from_function(g, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) r2 += (x[j] - center[j]) * (x[j] - center[j]);
    return cplx(std::exp(-r2 / (2 * width * width)), 0.3 * std::exp(-r2 / (width * width)));
  });
}

double rel_l2(const Field& a, const Field& b) { return lp_norm(a - b, 2.0) / lp_norm(b, 2.0); }

RandomizationSpec spec_of(CoefficientKind k, std::uint64_t seed, double scale = 1.0) {
  RandomizationSpec s;
  s.distribution.kind = k;
  s.seed = seed;
  s.scale = scale;
  return s;
}

}  // namespace

TEST(SmoothStep, EndpointsAndSymmetry) {
  EXPECT_EQ(smooth_step(0.0), 0.0);
  EXPECT_EQ(smooth_step(-3.0), 0.0);
  EXPECT_EQ(smooth_step(1.0), 1.0);
  EXPECT_EQ(smooth_step(4.0), 1.0);
  EXPECT_NEAR(smooth_step(0.5), 0.5, 1e-15);
  for (double x : {0.1, 0.27, 0.4}) EXPECT_NEAR(smooth_step(x) + smooth_step(1 - x), 1.0, 1e-15);
}

TEST(Bump, CenterValueAndHalfPoint) {
  const BumpFunction b = build_bump(1.0);
  const double zero[] = {0.0, 0.0, 0.0};
  EXPECT_EQ(b(zero), 1.0);
  EXPECT_NEAR(b.window(0.5), 0.5, 1e-15);
}

TEST(Bump, RejectsNonPositiveSteepness) {
  EXPECT_THROW(build_bump(0.0), ValidationError);
  EXPECT_THROW(build_bump(-1.0), ValidationError);
}

TEST(Bump, OneDimensionalPartitionOfUnity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double a : {0.5, 1.0, 3.0}) {
    const BumpFunction b(a);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double x = u(rng);
      double s = 0.0;
      for (int k = -3; k <= 3; ++k) s += b.window(x - k);
      worst = std::max(worst, std::abs(s - 1.0));
    }
    EXPECT_LE(worst, 1e-12) << "steepness " << a;
  }
}

TEST(Bump, SupportAndRange) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const BumpFunction b(1.0);
  for (int i = 0; i < 2000; ++i) {
    const double xi[] = {u(rng), u(rng)};
    const double v = b(xi);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    if (std::abs(xi[0]) >= 1.0 || std::abs(xi[1]) >= 1.0) {
      EXPECT_EQ(v, 0.0);
    }
  }
}

TEST(Bump, TensorPartitionOfUnity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const BumpFunction b(1.0);
  for (int i = 0; i < 500; ++i) {
    const double xi[] = {u(rng), u(rng), u(rng)};
    double s = 0.0;
    for (int a = -7; a <= 7; ++a)
      for (int c = -7; c <= 7; ++c)
        for (int d = -7; d <= 7; ++d) {
          const double y[] = {xi[0] - a, xi[1] - c, xi[2] - d};
          s += b(y);
        }
    ASSERT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Coefficients, DeterministicAndOrderIndependent) {
  const auto spec = spec_of(CoefficientKind::gaussian, 42);
  std::vector<LatticePoint> idx;
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b) idx.push_back({a, b});
  const auto first = sample_coefficients(spec, idx);
  auto shuffled = idx;
  std::mt19937_64 rng(4);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto second = sample_coefficients(spec, shuffled);
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    const auto pos = std::find(idx.begin(), idx.end(), shuffled[i]) - idx.begin();
    EXPECT_EQ(second[i], first[static_cast<std::size_t>(pos)]);
  }
  const std::int64_t one[] = {1, 2};
  EXPECT_EQ(sample_coefficient(spec, one), sample_coefficient(spec, one));
  EXPECT_NE(sample_coefficient(spec, one), sample_coefficient(spec_of(CoefficientKind::gaussian, 43), one));
}

TEST(Coefficients, GaussianMoments) {
  const auto spec = spec_of(CoefficientKind::gaussian, 7);
  const int n = 100000;
  cplx mean = 0.0;
  double second = 0.0, cross = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t k[] = {i};
    const cplx g = sample_coefficient(spec, k);
    mean += g;
    second += std::norm(g);
    cross += g.real() * g.imag();
  }
  mean /= n;
  EXPECT_LE(std::abs(mean.real()), 4.0 / std::sqrt(n));
  EXPECT_LE(std::abs(mean.imag()), 4.0 / std::sqrt(n));
  EXPECT_GE(second / n, 0.98);
  EXPECT_LE(second / n, 1.02);
  EXPECT_LE(std::abs(cross / n), 4.0 * 0.5 / std::sqrt(n));
}

TEST(Coefficients, BernoulliSupport) {
  const auto spec = spec_of(CoefficientKind::bernoulli, 8);
  const double a = 1.0 / std::sqrt(2.0);
  int positive = 0;
  for (std::int64_t i = 0; i < 10000; ++i) {
    const std::int64_t k[] = {i, -i};
    const cplx g = sample_coefficient(spec, k);
    EXPECT_TRUE(g.real() == a || g.real() == -a);
    EXPECT_TRUE(g.imag() == a || g.imag() == -a);
    positive += g.real() > 0;
  }
  EXPECT_NEAR(positive / 10000.0, 0.5, 0.02);
}

TEST(Coefficients, UniformDiskSupportAndMoments) {
  const auto spec = spec_of(CoefficientKind::uniform_disk, 9);
  double second = 0.0;
  cplx mean = 0.0;
  const int n = 50000;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t k[] = {i};
    const cplx g = sample_coefficient(spec, k);
    EXPECT_LE(std::abs(g), std::sqrt(2.0) + 1e-15);
    second += std::norm(g);
    mean += g;
  }
  EXPECT_NEAR(second / n, 1.0, 0.02);
  EXPECT_LE(std::abs(mean / static_cast<double>(n)), 0.03);
}

TEST(Coefficients, SubGaussianConstants) {
  EXPECT_EQ(CoefficientDistribution{CoefficientKind::gaussian}.mgf_constant(), 0.25);
  EXPECT_NEAR(CoefficientDistribution{CoefficientKind::bernoulli}.mgf_constant(), 0.25, 1e-15);
  EXPECT_NEAR(CoefficientDistribution{CoefficientKind::uniform_disk}.mgf_constant(), 1.0, 1e-15);
  // Analytic MGF of a N(0, 1/2) part, e^{d^2/4}, against the certificate.
  for (double d : {0.1, 1.0, 5.0})
    EXPECT_LE(std::exp(d * d / 4), std::exp(0.25 * d * d) * (1 + 1e-15));
  // Bernoulli: cosh(d / sqrt 2) <= e^{c d^2}.
  for (double d : {0.1, 1.0, 5.0}) EXPECT_LE(std::cosh(d / std::sqrt(2.0)), std::exp(0.25 * d * d));
}

TEST(Coefficients, KindNamesRoundTrip) {
  for (auto k : {CoefficientKind::gaussian, CoefficientKind::bernoulli, CoefficientKind::uniform_disk,
                 CoefficientKind::degenerate})
    EXPECT_EQ(coefficient_kind_from_string(to_string(k)), k);
  EXPECT_THROW(coefficient_kind_from_string("cauchy"), ValidationError);
}

TEST(Wiener, DegenerateReassemblesInput) {
  for (int dim : {1, 2}) {
    const Grid g(dim, dim == 1 ? 128 : 64, 8 * pi);
    const Field f = gaussian(g, 1.0, {0.5, -1.0, 0});
    const Field fw = wiener_randomize(f, spec_of(CoefficientKind::degenerate, 0), BumpFunction(1.0));
    EXPECT_LE(rel_l2(fw, f), 1e-12);
  }
}

TEST(Wiener, DilatedDegenerateReassemblesInput) {
  const Grid g(2, 64, 16 * pi);
  const Field f = gaussian(g, 2.0);
  for (double lambda : {1.0, 2.0}) {
    const Field fw = dilated_randomize(f, spec_of(CoefficientKind::degenerate, 0, lambda), BumpFunction(1.0));
    EXPECT_LE(rel_l2(fw, f), 1e-12) << "lambda " << lambda;
  }
}

TEST(Wiener, UnitScaleMatchesDilatedBitForBit) {
  const Grid g(2, 32, 8 * pi);
  const Field f = gaussian(g, 1.0);
  const auto spec = spec_of(CoefficientKind::gaussian, 5);
  const Field a = wiener_randomize(f, spec, BumpFunction(1.0));
  const Field b = dilated_randomize(f, spec, BumpFunction(1.0));
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i], b[i]);
}

TEST(Wiener, CoarseGridRejected) {
  const Grid g(1, 32, 2 * pi);  // spacing 1 > 1/2
  const Field f(g, Representation::physical);
  EXPECT_THROW(wiener_randomize(f, spec_of(CoefficientKind::gaussian, 1), BumpFunction(1.0)), ValidationError);
  const Grid h(1, 32, 4 * pi);  // spacing 1/2: unit cubes fine, cubes of side 1/2 not
  EXPECT_THROW(dilated_randomize(Field(h, Representation::physical), spec_of(CoefficientKind::gaussian, 1, 2.0),
                                 BumpFunction(1.0)),
               ValidationError);
  EXPECT_THROW(wiener_randomize(Field(h, Representation::physical), spec_of(CoefficientKind::gaussian, 1, 2.0),
                                BumpFunction(1.0)),
               ValidationError);
}

TEST(Wiener, Linearity) {
  const Grid g(2, 32, 8 * pi);
  const Field f = gaussian(g, 1.0);
  const Field h = gaussian(g, 0.7, {1.0, 2.0, 0});
  const auto spec = spec_of(CoefficientKind::bernoulli, 11);
  const BumpFunction b(1.0);
  const cplx alpha(0.3, -1.2), beta(2.0, 0.5);
  const Field lhs = dilated_randomize(alpha * f + beta * h, spec, b);
  const Field rhs = alpha * dilated_randomize(f, spec, b) + beta * dilated_randomize(h, spec, b);
  EXPECT_LE(rel_l2(lhs, rhs), 1e-12);
}

TEST(Wiener, MeanZeroAndSecondMoment) {
  const Grid g(1, 64, 8 * pi);
  const Field f = gaussian(g, 1.0);
  const BumpFunction b(1.0);
  const int draws = 10000;
  std::vector<cplx> sum(g.size()), sumsq(g.size());
  std::vector<double> energy(draws);
  for (int d = 0; d < draws; ++d) {
    const Field fw = transform(dilated_randomize(f, spec_of(CoefficientKind::gaussian, derive_seed(3, d)), b),
                               Representation::physical);
    for (std::size_t i = 0; i < g.size(); ++i) {
      sum[i] += fw[i];
      sumsq[i] += cplx(fw[i].real() * fw[i].real(), fw[i].imag() * fw[i].imag());
    }
    energy[static_cast<std::size_t>(d)] = std::pow(lp_norm(fw, 2.0), 2);
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cplx mean = sum[i] / static_cast<double>(draws);
    const double sr = std::sqrt(sumsq[i].real() / draws - mean.real() * mean.real());
    const double si = std::sqrt(sumsq[i].imag() / draws - mean.imag() * mean.imag());
    EXPECT_LE(std::abs(mean.real()), 5 * sr / std::sqrt(draws) + 1e-300);
    EXPECT_LE(std::abs(mean.imag()), 5 * si / std::sqrt(draws) + 1e-300);
  }
  // E ||f^w||^2 = sum_n ||psi(D - n) f||^2 for independent mean-zero, unit-variance g_n.
  double expected = 0.0;
  for (const auto& n : active_cubes(g, 1.0)) expected += std::pow(lp_norm(cube_piece(f, n, b, 1.0), 2.0), 2);
  double m = 0.0, v = 0.0;
  for (double e : energy) m += e;
  m /= draws;
  for (double e : energy) v += (e - m) * (e - m);
  const double se = std::sqrt(v / (draws - 1) / draws);
  EXPECT_LE(std::abs(m - expected), 3 * se);
}

TEST(Rescale, IdentityAtOne) {
  const Grid g(2, 16, 2 * pi);
  const Field f = dealias(gaussian(g, 1.0), 0.5);
  EXPECT_LE(rel_l2(rescale_field(f, 1.0), f), 1e-15);
}

TEST(Rescale, HomogeneousSobolevScaling) {
  const Grid g(5, 16, 2 * pi);
  const Field f = dealias(gaussian(g, 1.0), 0.25);
  const double gc = 0.5;
  for (double gamma : {0.0, 0.25, gc, 1.0}) {
    const double lhs = homogeneous_sobolev_norm(rescale_field(f, 2.0), gamma);
    const double rhs = std::pow(2.0, gamma - gc) * homogeneous_sobolev_norm(f, gamma);
    EXPECT_LE(std::abs(lhs - rhs) / lhs, 1e-10) << "gamma " << gamma;
  }
}

TEST(Rescale, InverseMapUndoesDilation) {
  const Grid g(1, 64, 2 * pi);
  const Field f = dealias(gaussian(g, 1.0), 0.25);
  EXPECT_LE(rel_l2(rescale_field(rescale_field(f, 2.0), 0.5), f), 1e-14);
}

TEST(Rescale, Rejections) {
  const Grid g(1, 64, 2 * pi);
  const Field f = gaussian(g, 0.2);  // broad spectrum: does not survive lambda = 2
  EXPECT_THROW(rescale_field(f, 3.0), ValidationError);
  EXPECT_THROW(rescale_field(f, 2.0), ValidationError);
}

TEST(CoefficientsCsv, HeaderAndRows) {
  const auto spec = spec_of(CoefficientKind::bernoulli, 1);
  const std::vector<LatticePoint> idx{{0, 1}, {-2, 3}};
  const auto c = sample_coefficients(spec, idx);
  std::ostringstream out;
  write_coefficients_csv(out, idx, c);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n1,n2,re,im");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
}
