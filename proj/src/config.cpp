#include "q4nls/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <set>
#include <sstream>

#include "q4nls/errors.hpp"

namespace q4nls {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "randomize", "evolve",        "picard",        "scatter",
      "tail-hgamma", "tail-lp",     "tail-strichartz-local", "tail-strichartz-global",
      "bilinear",  "dispersive-fit", "scaling-check", "exponents",
      "lambda0"};
  return names;
}

bool is_experiment(std::string_view name) {
  const auto& n = experiment_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

std::string_view to_string(Profile p) {
  switch (p) {
    case Profile::gaussian: return "gaussian";
    case Profile::gaussian_spectrum: return "gaussian_spectrum";
    case Profile::zero: return "zero";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string& key, const std::string& msg) {
  throw ValidationError("config: " + key + ": " + msg);
}

double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf") return INFINITY;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, "expected a number, got '" + v + "'");
  return out;
}

long long parse_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, "expected an integer, got '" + v + "'");
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  const long long x = parse_integer(key, v);
  if (x < -2147483647LL || x > 2147483647LL) bad(key, "integer out of range");
  return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, "expected an unsigned 64-bit integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, "expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F f) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + f(xs[i]);
  return s;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [&t](const char* k, double RunConfig::*m) {
      t[k] = [m](RunConfig& c, const std::string& key, const std::string& v) { c.*m = parse_double(key, v); };
    };
    auto integer = [&t](const char* k, int RunConfig::*m) {
      t[k] = [m](RunConfig& c, const std::string& key, const std::string& v) { c.*m = parse_int(key, v); };
    };
    t["experiment"] = [](RunConfig& c, const std::string&, const std::string& v) { c.experiment = v; };
    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = parse_u64(k, v); };
    t["output_dir"] = [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; };
    integer("workers", &RunConfig::workers);
    integer("dim", &RunConfig::dim);
    integer("points_per_axis", &RunConfig::points_per_axis);
    dbl("box_length", &RunConfig::box_length);
    t["profile"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      for (auto p : {Profile::gaussian, Profile::gaussian_spectrum, Profile::zero})
        if (to_string(p) == v) {
          c.profile = p;
          return;
        }
      bad(k, "unknown profile '" + v + "' (gaussian, gaussian_spectrum, zero)");
    };
    dbl("amplitude", &RunConfig::amplitude);
    dbl("width", &RunConfig::width);
    dbl("band_fraction", &RunConfig::band_fraction);
    t["randomize_data"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.randomize_data = parse_bool(k, v);
    };
    t["coefficients"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      try {
        c.coefficients = coefficient_kind_from_string(v);
      } catch (const ValidationError& e) {
        bad(k, e.what());
      }
    };
    dbl("lambda_scale", &RunConfig::lambda_scale);
    dbl("bump_steepness", &RunConfig::bump_steepness);
    dbl("mu", &RunConfig::mu);
    t["sign"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      try {
        c.sign = nonlinearity_from_string(v);
      } catch (const ValidationError& e) {
        bad(k, e.what());
      }
    };
    dbl("dt_seconds", &RunConfig::dt_seconds);
    dbl("T_seconds", &RunConfig::T_seconds);
    dbl("dealias", &RunConfig::dealias);
    integer("snapshot_stride", &RunConfig::snapshot_stride);
    dbl("epsilon", &RunConfig::epsilon);
    integer("max_iters", &RunConfig::max_iters);
    dbl("tol", &RunConfig::tol);
    dbl("divergence_threshold", &RunConfig::divergence_threshold);
    dbl("gamma", &RunConfig::gamma);
    dbl("p", &RunConfig::p);
    dbl("q", &RunConfig::q);
    dbl("r", &RunConfig::r);
    integer("samples", &RunConfig::samples);
    integer("threshold_count", &RunConfig::threshold_count);
    t["thresholds"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.thresholds.clear();
      for (const auto& s : split_list(v)) c.thresholds.push_back(parse_double(k, s));
    };
    integer("time_steps", &RunConfig::time_steps);
    dbl("guard", &RunConfig::guard);
    integer("M1", &RunConfig::M1);
    t["M2_multiples"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.M2_multiples.clear();
      for (const auto& s : split_list(v)) c.M2_multiples.push_back(parse_int(k, s));
    };
    dbl("t_min_seconds", &RunConfig::t_min_seconds);
    dbl("t_max_seconds", &RunConfig::t_max_seconds);
    integer("time_count", &RunConfig::time_count);
    t["gammas"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.gammas.clear();
      for (const auto& s : split_list(v)) c.gammas.push_back(parse_double(k, s));
    };
    dbl("scale_factor", &RunConfig::scale_factor);
    integer("m", &RunConfig::m);
    t["epsilons"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.epsilons.clear();
      for (const auto& s : split_list(v)) c.epsilons.push_back(parse_double(k, s));
    };
    dbl("delta", &RunConfig::delta);
    dbl("f_norm", &RunConfig::f_norm);
    return t;
  }();
  return table;
}

bool is_pow2(long long n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config: line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ValidationError("config: line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ValidationError("config: line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    if (value.empty()) bad(key, "empty value");
    it->second(cfg, key, value);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path.string() + "'");
  return parse_config(in);
}

Grid RunConfig::grid() const { return Grid(dim, points_per_axis, box_length); }

RandomizationSpec RunConfig::randomization() const {
  RandomizationSpec s;
  s.distribution.kind = coefficients;
  s.seed = seed;
  s.scale = lambda_scale;
  return s;
}

EvolutionConfig RunConfig::evolution() const {
  EvolutionConfig e;
  e.params.mu = mu;
  e.sign = sign;
  e.dt = dt_seconds;
  e.T = T_seconds;
  e.dealias = dealias;
  e.snapshot_stride = snapshot_stride;
  return e;
}

PicardConfig RunConfig::picard() const {
  PicardConfig p;
  p.max_iters = max_iters;
  p.tol = tol;
  p.divergence_threshold = divergence_threshold;
  return p;
}

void RunConfig::validate() const {
  if (experiment.empty()) bad("experiment", "missing");
  if (!is_experiment(experiment)) bad("experiment", "unknown experiment '" + experiment + "'");
  if (workers < 1) bad("workers", "must be >= 1");

  auto positive = [](const char* key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) bad(key, "must be a positive finite number");
  };
  auto rethrow_as = [](const char* key, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const ValidationError& e) {
      bad(key, e.what());
    }
  };

  const std::string& e = experiment;
  // exponents and lambda0 are pure formulas; everything else builds data on the grid.
  const bool uses_grid = e != "exponents" && e != "lambda0";
  if (dim < 1) bad("dim", "must be >= 1");
  if (uses_grid) {
    if (dim > 8) bad("dim", "must lie in [1, 8]");
    if (points_per_axis < 4 || !is_pow2(points_per_axis)) bad("points_per_axis", "must be a power of two >= 4");
    positive("box_length", box_length);
    if (std::pow(static_cast<double>(points_per_axis), dim) > 6.7e7)
      bad("points_per_axis", "grid exceeds 2^26 points");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) bad("amplitude", "must be finite and >= 0");
    positive("width", width);
    if (!(band_fraction > 0.0 && band_fraction <= 1.0)) bad("band_fraction", "must lie in (0, 1]");
  }

  const bool randomizes = e == "randomize" || e.rfind("tail-", 0) == 0 || randomize_data;
  if (randomizes) {
    positive("lambda_scale", lambda_scale);
    positive("bump_steepness", bump_steepness);
    if (2.0 * 3.141592653589793 / box_length * lambda_scale > 0.5 + 1e-12)
      bad("lambda_scale", "cubes of side 1/lambda_scale are not resolved: need 2 pi / box_length * lambda_scale <= 1/2");
  }
  if (!(mu >= 0.0) || !std::isfinite(mu)) bad("mu", "must be finite and >= 0");

  if (e == "evolve" || e == "picard" || e == "scatter") {
    positive("dt_seconds", dt_seconds);
    positive("T_seconds", T_seconds);
    if (dt_seconds > T_seconds) bad("dt_seconds", "must not exceed T_seconds");
    if (!(dealias > 0.0 && dealias <= 1.0)) bad("dealias", "must lie in (0, 1]");
    if (snapshot_stride < 1) bad("snapshot_stride", "must be >= 1");
    const double ratio = T_seconds / dt_seconds;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) bad("T_seconds", "must be an integer multiple of dt_seconds");
  }
  if (e == "picard" || e == "scatter") {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) bad("epsilon", "must be finite and >= 0");
    if (max_iters < 1) bad("max_iters", "must be >= 1");
    if (!(tol >= 0.0)) bad("tol", "must be >= 0");
    positive("divergence_threshold", divergence_threshold);
    if (!(tol < divergence_threshold)) bad("tol", "must be below divergence_threshold");
  }
  if (e == "scatter") {
    const long long steps = std::llround(T_seconds / dt_seconds);
    if (steps % snapshot_stride != 0 || (steps / snapshot_stride) % 2 != 0)
      bad("snapshot_stride", "T_seconds / dt_seconds must be an even multiple of snapshot_stride");
  }
  if (e.rfind("tail-", 0) == 0) {
    if (samples < 10) bad("samples", "must be >= 10");
    if (threshold_count < 3) bad("threshold_count", "must be >= 3");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (!(thresholds[i] > 0.0)) bad("thresholds", "must be positive");
      if (i && !(thresholds[i] > thresholds[i - 1])) bad("thresholds", "must be strictly increasing");
    }
  }
  if (e == "tail-lp" && !(p >= 1.0)) bad("p", "must be >= 1");
  if (e == "tail-strichartz-local" || e == "tail-strichartz-global") {
    if (!(q >= 2.0) || !std::isfinite(q)) bad("q", "must be finite and >= 2");
    if (!(r >= 2.0) || !std::isfinite(r)) bad("r", "must be finite and >= 2");
    positive("T_seconds", T_seconds);
    if (time_steps < 4 || time_steps % 4 != 0) bad("time_steps", "must be a positive multiple of 4");
    positive("guard", guard);
    if (e == "tail-strichartz-global" && !admissible(q, r, dim))
      bad("q", "(q, r) must satisfy 4/q + N/r = N/2 within the admissible range");
  }
  if (e == "bilinear") {
    if (dim < 5) bad("dim", "the bilinear estimate needs N >= 5");
    if (M1 < 1 || !is_pow2(M1)) bad("M1", "must be dyadic");
    if (M2_multiples.size() < 2) bad("M2_multiples", "need at least two entries");
    for (int k : M2_multiples)
      if (k < 1 || !is_pow2(k)) bad("M2_multiples", "entries must be dyadic");
    const double cap = 3.141592653589793 * points_per_axis / box_length / 2.0;
    for (int k : M2_multiples)
      if (static_cast<double>(M1) * k > cap + 1e-12) bad("M2_multiples", "M1 * multiple exceeds half-Nyquist");
    positive("T_seconds", T_seconds);
    if (time_steps < 1) bad("time_steps", "must be >= 1");
  }
  if (e == "dispersive-fit") {
    positive("t_min_seconds", t_min_seconds);
    positive("t_max_seconds", t_max_seconds);
    if (!(t_max_seconds > t_min_seconds)) bad("t_max_seconds", "must exceed t_min_seconds");
    if (time_count < 2) bad("time_count", "must be >= 2");
    positive("guard", guard);
  }
  if (e == "scaling-check") {
    if (gammas.empty()) bad("gammas", "need at least one entry");
    if (!(scale_factor > 0.0) || std::abs(std::log2(scale_factor) - std::round(std::log2(scale_factor))) > 1e-12)
      bad("scale_factor", "must be a power of two");
  }
  if (e == "exponents" && m < 3) bad("m", "must be >= 3");
  if (e == "lambda0") {
    if (epsilons.empty()) bad("epsilons", "need at least one entry");
    for (double x : epsilons)
      if (!(x > 0.0 && x <= 1.0)) bad("epsilons", "entries must lie in (0, 1]");
    positive("delta", delta);
    if (!(f_norm >= 0.0)) bad("f_norm", "must be >= 0");
    if (!(gamma < (dim - 4) / 2.0)) bad("gamma", "must be below the critical exponent (N - 4)/2");
  }
  if (uses_grid) rethrow_as("points_per_axis", [&] { (void)grid(); });
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["experiment"] = experiment;
  kv["seed"] = std::to_string(seed);
  kv["dim"] = std::to_string(dim);
  kv["points_per_axis"] = std::to_string(points_per_axis);
  kv["box_length"] = fmt(box_length);
  kv["profile"] = std::string(to_string(profile));
  kv["amplitude"] = fmt(amplitude);
  kv["width"] = fmt(width);
  kv["band_fraction"] = fmt(band_fraction);
  kv["randomize_data"] = randomize_data ? "true" : "false";
  kv["coefficients"] = std::string(to_string(coefficients));
  kv["lambda_scale"] = fmt(lambda_scale);
  kv["bump_steepness"] = fmt(bump_steepness);
  kv["mu"] = fmt(mu);
  kv["sign"] = std::string(to_string(sign));
  kv["dt_seconds"] = fmt(dt_seconds);
  kv["T_seconds"] = fmt(T_seconds);
  kv["dealias"] = fmt(dealias);
  kv["snapshot_stride"] = std::to_string(snapshot_stride);
  kv["epsilon"] = fmt(epsilon);
  kv["max_iters"] = std::to_string(max_iters);
  kv["tol"] = fmt(tol);
  kv["divergence_threshold"] = fmt(divergence_threshold);
  kv["gamma"] = fmt(gamma);
  kv["p"] = fmt(p);
  kv["q"] = fmt(q);
  kv["r"] = fmt(r);
  kv["samples"] = std::to_string(samples);
  kv["threshold_count"] = std::to_string(threshold_count);
  kv["thresholds"] = join(thresholds, fmt);
  kv["time_steps"] = std::to_string(time_steps);
  kv["guard"] = fmt(guard);
  kv["M1"] = std::to_string(M1);
  kv["M2_multiples"] = join(M2_multiples, [](int v) { return std::to_string(v); });
  kv["t_min_seconds"] = fmt(t_min_seconds);
  kv["t_max_seconds"] = fmt(t_max_seconds);
  kv["time_count"] = std::to_string(time_count);
  kv["gammas"] = join(gammas, fmt);
  kv["scale_factor"] = fmt(scale_factor);
  kv["m"] = std::to_string(m);
  kv["epsilons"] = join(epsilons, fmt);
  kv["delta"] = fmt(delta);
  kv["f_norm"] = fmt(f_norm);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

}  // namespace q4nls
