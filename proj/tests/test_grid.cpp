#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "q4nls/errors.hpp"
#include "q4nls/field_io.hpp"
#include "q4nls/grid.hpp"

using namespace q4nls;
using std::numbers::pi;

namespace {

Field random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Field f(g, Representation::physical);
  for (auto& v : f.values()) v = {d(rng), d(rng)};
  return f;
}

Field plane_wave(const Grid& g, std::span<const int> k) {
  return Field::from_function(g, [&](std::span<const double> x) {
    double phase = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) phase += 2.0 * pi * k[j] / g.box_length() * x[j];
    return std::polar(1.0, phase);
  });
}

double max_abs_diff(const Field& a, const Field& b) {
  const Field pa = transform(a, Representation::physical);
  const Field pb = transform(b, Representation::physical);
  double m = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) m = std::max(m, std::abs(pa[i] - pb[i]));
  return m;
}

}  // namespace

TEST(Grid, OneDimensionalLatticeIsIntegerOnTwoPiBox) {
  const Grid g(1, 8, 2 * pi);
  std::vector<double> ks;
  for (int i = 0; i < 8; ++i) ks.push_back(g.wavenumber(i));
  std::sort(ks.begin(), ks.end());
  for (int k = -4; k <= 3; ++k) EXPECT_NEAR(ks[static_cast<std::size_t>(k + 4)], k, 1e-15);
}

TEST(Grid, FiveDimensionalPointCount) { EXPECT_EQ(Grid(5, 16, 2 * pi).size(), 1048576u); }

TEST(Grid, RejectsInvalidParameters) {
  EXPECT_THROW(Grid(2, 7, 1.0), ValidationError);
  EXPECT_THROW(Grid(1, 2, 1.0), ValidationError);
  EXPECT_THROW(Grid(0, 8, 1.0), ValidationError);
  EXPECT_THROW(Grid(1, 8, 0.0), ValidationError);
  EXPECT_THROW(Grid(1, 8, -1.0), ValidationError);
}

TEST(Grid, FlattenInvertsUnflatten) {
  const Grid g(3, 8, 1.0);
  std::vector<int> idx(3);
  for (std::size_t flat = 0; flat < g.size(); flat += 37) {
    g.unflatten(flat, idx);
    EXPECT_EQ(g.flatten(idx), flat);
  }
}

TEST(Transform, DeltaHasConstantSpectrum) {
  const Grid g(2, 8, 1.0);
  Field f(g, Representation::physical);
  f[0] = 1.0;
  const Field s = transform(f, Representation::spectral);
  for (cplx c : s.values()) EXPECT_NEAR(std::abs(c - cplx(1.0 / 8.0, 0.0)), 0.0, 1e-15);
}

TEST(Transform, RoundTripIsIdentity) {
  std::mt19937_64 rng(1);
  for (int dim : {1, 2, 3}) {
    const Grid g(dim, 16, 3.0);
    const Field f = random_field(g, rng);
    const Field back = transform(transform(f, Representation::spectral), Representation::physical);
    EXPECT_LE(max_abs_diff(f, back), 1e-12 * lp_norm(f, INFINITY));
  }
}

TEST(Transform, PlaneWaveHasSingleCoefficient) {
  const Grid g(2, 16, 5.0);
  const int k[] = {3, -2};
  const Field s = transform(plane_wave(g, k), Representation::spectral);
  const int idx[] = {g.storage_index(3), g.storage_index(-2)};
  const std::size_t hit = g.flatten(idx);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i == hit)
      EXPECT_NEAR(std::abs(s[i]), 16.0, 1e-12);
    else
      EXPECT_LE(std::abs(s[i]), 1e-12);
  }
}

TEST(Transform, NoOpWhenAlreadyInTarget) {
  std::mt19937_64 rng(2);
  const Field f = random_field(Grid(1, 8, 1.0), rng);
  const Field g = transform(f, Representation::physical);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], g[i]);
}

TEST(Transform, ParsevalOnRandomFields) {
  std::mt19937_64 rng(3);
  const Grid g(2, 8, 2.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const Field f = random_field(g, rng);
    const Field s = transform(f, Representation::spectral);
    double spec = 0.0;
    for (cplx c : s.values()) spec += std::norm(c);
    spec = std::sqrt(spec * g.cell_volume());
    const double phys = lp_norm(f, 2.0);
    ASSERT_LE(std::abs(phys - spec), 1e-12 * phys);
    ASSERT_NEAR(lp_norm(s, 2.0), phys, 1e-12 * phys);
  }
}

TEST(Multiplier, IdentitySymbol) {
  std::mt19937_64 rng(4);
  const Field f = random_field(Grid(2, 8, 1.0), rng);
  const Field g = apply_multiplier(f, [](std::span<const double>) { return cplx(1.0, 0.0); });
  EXPECT_LE(max_abs_diff(f, g), 1e-13);
  EXPECT_EQ(g.representation(), Representation::physical);
}

TEST(Multiplier, LaplacianSymbolOnPlaneWave) {
  const Grid g(2, 16, 7.0);
  const int k[] = {2, 5};
  const Field f = plane_wave(g, k);
  const Field h = apply_radial_multiplier(f, [](double xi2) { return cplx(xi2, 0.0); });
  const double xi2 = std::pow(2 * pi / 7.0, 2) * (4 + 25);
  Field expected = f;
  expected *= cplx(xi2, 0.0);
  EXPECT_LE(max_abs_diff(h, expected), 1e-11 * xi2);
}

TEST(Multiplier, HalfSpaceIndicatorIsIdempotent) {
  std::mt19937_64 rng(5);
  const Field f = random_field(Grid(2, 16, 3.0), rng);
  auto ind = [](std::span<const double> xi) { return cplx(xi[0] > 0.0 ? 1.0 : 0.0, 0.0); };
  const Field once = apply_multiplier(f, ind);
  const Field twice = apply_multiplier(once, ind);
  EXPECT_LE(max_abs_diff(once, twice), 1e-13);
}

TEST(Multiplier, CompositionIsPointwiseProduct) {
  std::mt19937_64 rng(6);
  const Field f = transform(random_field(Grid(2, 16, 3.0), rng), Representation::spectral);
  auto m1 = [](std::span<const double> xi) { return std::polar(1.0, xi[0] - 0.3 * xi[1]); };
  auto m2 = [](std::span<const double> xi) { return cplx(1.0 / (1.0 + xi[0] * xi[0] + xi[1] * xi[1]), xi[1]); };
  const Field a = apply_multiplier(apply_multiplier(f, m1), m2);
  const Field b = apply_multiplier(f, [&](std::span<const double> xi) { return m1(xi) * m2(xi); });
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_LE(std::abs(a[i] - b[i]), 1e-13 * (1.0 + std::abs(b[i])));
}

TEST(Multiplier, NonFiniteSymbolThrows) {
  const Field f(Grid(1, 8, 1.0), Representation::physical);
  EXPECT_THROW(apply_multiplier(f, [](std::span<const double> xi) { return cplx(1.0 / xi[0], 0.0); }),
               ValidationError);
}

TEST(LittlewoodPaley, ResolutionOfIdentityOnBandLimitedFields) {
  std::mt19937_64 rng(7);
  for (int dim : {1, 2, 5}) {
    const int n = dim == 5 ? 8 : 32;
    const Grid g(dim, n, 2 * pi);
    // band-limited: |xi| well below the largest dyadic block.
    Field f = dealias(random_field(g, rng), 0.5);
    Field sum(g, Representation::physical);
    int M = 1;
    for (; M <= g.nyquist() * 2; M *= 2) sum += lp_project(f, M, LpMode::piece);
    EXPECT_LE(max_abs_diff(sum, f), 1e-12 * lp_norm(f, INFINITY)) << "dim " << dim;
    EXPECT_LE(max_abs_diff(lp_project(f, M / 2, LpMode::up_to), f), 1e-12 * lp_norm(f, INFINITY));
  }
}

TEST(LittlewoodPaley, PlaneWaveAtMPassesUnchanged) {
  const Grid g(1, 64, 2 * pi);
  const int k[] = {4};
  const Field f = plane_wave(g, k);
  EXPECT_LE(max_abs_diff(lp_project(f, 4, LpMode::piece), f), 1e-12);
}

TEST(LittlewoodPaley, PlaneWaveAtFourMIsAnnihilated) {
  const Grid g(1, 64, 2 * pi);
  const int k[] = {16};
  EXPECT_LE(lp_norm(lp_project(plane_wave(g, k), 4, LpMode::piece), INFINITY), 1e-15);
}

TEST(LittlewoodPaley, NonDyadicThrows) {
  const Field f(Grid(1, 8, 1.0), Representation::physical);
  EXPECT_THROW(lp_project(f, 3, LpMode::piece), ValidationError);
  EXPECT_THROW(lp_project(f, 0, LpMode::up_to), ValidationError);
}

TEST(LittlewoodPaley, LowPassIsNonexpansive) {
  std::mt19937_64 rng(8);
  const Grid g(2, 32, 2 * pi);
  for (int trial = 0; trial < 20; ++trial) {
    const Field f = random_field(g, rng);
    for (int M : {1, 2, 4, 8}) EXPECT_LE(lp_norm(lp_project(f, M, LpMode::up_to), 2.0), lp_norm(f, 2.0));
  }
}

TEST(Norms, SobolevZeroIsL2) {
  std::mt19937_64 rng(9);
  const Field f = random_field(Grid(2, 16, 4.0), rng);
  EXPECT_NEAR(sobolev_norm(f, 0.0), lp_norm(f, 2.0), 1e-12 * lp_norm(f, 2.0));
}

TEST(Norms, GaussianL2OnLargeBox) {
  const Grid g(1, 256, 40.0);
  const Field f = Field::from_function(g, [](std::span<const double> x) { return cplx(std::exp(-x[0] * x[0] / 2), 0.0); });
  EXPECT_NEAR(std::pow(lp_norm(f, 2.0), 2), std::sqrt(pi), 1e-6);
}

TEST(Norms, LebesgueExponentBelowOneThrows) {
  const Field f(Grid(1, 8, 1.0), Representation::physical);
  EXPECT_THROW(lp_norm(f, 0.5), ValidationError);
}

TEST(Norms, HomogeneousDropsZeroMode) {
  const Grid g(1, 8, 2 * pi);
  Field f(g, Representation::physical);
  for (auto& v : f.values()) v = 1.0;  // pure zero mode
  EXPECT_EQ(homogeneous_sobolev_norm(f, 0.5), 0.0);
  EXPECT_EQ(homogeneous_sobolev_norm(f, -0.5), 0.0);
  const int k[] = {2};
  const Field w = plane_wave(g, k);
  EXPECT_NEAR(homogeneous_sobolev_norm(w, 1.0), 2.0 * lp_norm(w, 2.0), 1e-12);
}

TEST(Norms, DispatcherMatchesDirectCalls) {
  std::mt19937_64 rng(10);
  const Field f = random_field(Grid(2, 8, 3.0), rng);
  EXPECT_EQ(norm(f, {NormKind::lebesgue, 0.0, 3.0}), lp_norm(f, 3.0));
  EXPECT_EQ(norm(f, {NormKind::sobolev, 0.7, 2.0}), sobolev_norm(f, 0.7));
  EXPECT_EQ(norm(f, {NormKind::homogeneous_sobolev, -0.3, 2.0}), homogeneous_sobolev_norm(f, -0.3));
}

TEST(SpacetimeNorm, SingleSampleSupremum) {
  std::mt19937_64 rng(11);
  Trajectory tr;
  const Field f = random_field(Grid(1, 16, 1.0), rng);
  tr.push_back(0.3, f);
  EXPECT_EQ(spacetime_norm(tr, INFINITY, 4.0), lp_norm(f, 4.0));
  EXPECT_THROW(spacetime_norm(tr, 2.0, 2.0), ValidationError);
}

TEST(SpacetimeNorm, ConstantTrajectory) {
  std::mt19937_64 rng(12);
  const Field f = random_field(Grid(1, 16, 1.0), rng);
  Trajectory tr;
  for (int i = 0; i <= 10; ++i) tr.push_back(0.25 * i, f);
  EXPECT_NEAR(spacetime_norm(tr, 2.0, 3.0), std::sqrt(2.5) * lp_norm(f, 3.0), 1e-12);
}

TEST(Trajectory, RejectsNonIncreasingTimesAndMixedGrids) {
  Trajectory tr;
  tr.push_back(0.0, Field(Grid(1, 8, 1.0), Representation::physical));
  EXPECT_THROW(tr.push_back(0.0, Field(Grid(1, 8, 1.0), Representation::physical)), ValidationError);
  EXPECT_THROW(tr.push_back(1.0, Field(Grid(1, 16, 1.0), Representation::physical)), ValidationError);
}

TEST(Snapshot, BitExactRoundTrip) {
  std::mt19937_64 rng(13);
  for (auto rep : {Representation::physical, Representation::spectral}) {
    const Field f = transform(random_field(Grid(3, 4, 1.7), rng), rep);
    std::stringstream ss;
    write_snapshot(ss, f);
    const std::string bytes = ss.str();
    EXPECT_EQ(bytes.substr(0, 4), "Q4NL");
    EXPECT_EQ(bytes.size(), 4u + 2 + 2 + 4 + 8 + 1 + 64 * 16);
    const Field g = read_snapshot(ss);
    EXPECT_EQ(g.grid(), f.grid());
    EXPECT_EQ(g.representation(), rep);
    for (std::size_t i = 0; i < f.size(); ++i) ASSERT_EQ(f[i], g[i]);
    std::stringstream again;
    write_snapshot(again, g);
    EXPECT_EQ(again.str(), bytes);
  }
}

TEST(Snapshot, RejectsBadMagic) {
  std::stringstream ss("XXXXgarbage");
  EXPECT_THROW(read_snapshot(ss), ValidationError);
}

TEST(Snapshot, TrajectoryIndexRoundTrip) {
  std::mt19937_64 rng(14);
  const auto dir = std::filesystem::temp_directory_path() / "q4nls_traj_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  Trajectory tr;
  const Grid g(1, 8, 1.0);
  for (int i = 0; i < 3; ++i) tr.push_back(0.5 * i, random_field(g, rng));
  const auto files = write_trajectory(dir, "u", tr);
  ASSERT_EQ(files.size(), 4u);
  const Trajectory back = read_trajectory(dir / files.back().filename());
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.time(i), tr.time(i));
    for (std::size_t k = 0; k < g.size(); ++k) ASSERT_EQ(back.state(i)[k], tr.state(i)[k]);
  }
  std::filesystem::remove_all(dir);
}
