#pragma once

// Flat "key = value" run configuration. One pair per line, '#' starts a
// comment, lists are comma-separated. Time keys carry the suffix _seconds;
// they are dimensionless PDE time.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "q4nls/grid.hpp"
#include "q4nls/randomization.hpp"
#include "q4nls/solver.hpp"

namespace q4nls {

/// Registered experiment names, in documentation order.
const std::vector<std::string>& experiment_names();
bool is_experiment(std::string_view name);

enum class Profile { gaussian, gaussian_spectrum, zero };

struct RunConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "q4nls_out";
  int workers = 1;

  // grid and data
  int dim = 1;
  int points_per_axis = 64;
  double box_length = 20.0;
  Profile profile = Profile::gaussian;
  double amplitude = 1.0;      // peak value (gaussian) or L2 norm (gaussian_spectrum)
  double width = 1.0;          // physical width (gaussian) or spectral width (gaussian_spectrum)
  double band_fraction = 1.0;  // keeps |k_j| <= band_fraction * n/2 of the profile
  bool randomize_data = false;

  // randomization
  CoefficientKind coefficients = CoefficientKind::gaussian;
  double lambda_scale = 1.0;
  double bump_steepness = 1.0;

  // evolution and fixed point
  double mu = 0.0;
  Nonlinearity sign = Nonlinearity::defocusing;
  double dt_seconds = 1e-3;
  double T_seconds = 1.0;
  double dealias = 0.5;
  int snapshot_stride = 1;
  double epsilon = 0.01;
  int max_iters = 50;
  double tol = 1e-10;
  double divergence_threshold = 1e6;

  // norms and tails
  double gamma = 0.0;
  double p = 4.0;
  double q = 4.0;
  double r = 4.0;
  int samples = 10000;
  int threshold_count = 12;
  std::vector<double> thresholds;
  int time_steps = 64;
  double guard = 1e-6;

  // bilinear
  int M1 = 1;
  std::vector<int> M2_multiples{1, 2, 4};

  // dispersive fit
  double t_min_seconds = 0.5;
  double t_max_seconds = 4.0;
  int time_count = 6;

  // scaling check
  std::vector<double> gammas{0.0, 0.25};
  double scale_factor = 2.0;

  // exponents and dilation scale
  int m = 3;
  std::vector<double> epsilons{0.5, 0.1, 0.01, 0.001};
  double delta = 1.0;
  double f_norm = 1.0;

  Grid grid() const;
  RandomizationSpec randomization() const;
  EvolutionConfig evolution() const;
  PicardConfig picard() const;

  /// Checks every field the experiment reads; throws ValidationError naming
  /// the offending key.
  void validate() const;

  /// Sorted "key = value" lines of every setting that affects results
  /// (output_dir and workers excluded). Hash input for the manifest.
  std::string canonical() const;
};

/// Parses the flat format. Unknown or duplicate keys and malformed values
/// throw ValidationError with the line number.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

std::string_view to_string(Profile p);

}  // namespace q4nls
