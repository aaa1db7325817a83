#include "q4nls/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "q4nls/errors.hpp"
#include "q4nls/estimates.hpp"
#include "q4nls/field_io.hpp"
#include "q4nls/propagator.hpp"
#include "q4nls/randomization.hpp"
#include "q4nls/solver.hpp"

#ifndef Q4NLS_VERSION
#define Q4NLS_VERSION "0.0.0"
#endif

namespace q4nls {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string software_version() { return Q4NLS_VERSION; }

// --- hashing ---------------------------------------------------------------------

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256: digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("sha256: cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

// --- data ------------------------------------------------------------------------

namespace {

Field profile_stream(const RunConfig& cfg, std::uint64_t stream) {
  const Grid g = cfg.grid();
  Field f(g, Representation::physical);
  switch (cfg.profile) {
    case Profile::zero:
      break;
    case Profile::gaussian: {
      const double a = cfg.amplitude, w = cfg.width;
      f = Field::from_function(g, [a, w](std::span<const double> x) {
        double r2 = 0.0;
        for (double xi : x) r2 += xi * xi;
        return cplx(a * std::exp(-r2 / (2.0 * w * w)), 0.0);
      });
      break;
    }
    case Profile::gaussian_spectrum: {
      RandomizationSpec rs;
      rs.seed = derive_seed(cfg.seed ^ 0x70726f66696c65ULL, stream);
      Field s(g, Representation::spectral);
      const auto xi2 = g.squared_wavenumbers();
      std::vector<int> idx(static_cast<std::size_t>(g.dimension()));
      std::vector<std::int64_t> k(idx.size());
      for (std::size_t flat = 0; flat < g.size(); ++flat) {
        g.unflatten(flat, idx);
        for (std::size_t j = 0; j < idx.size(); ++j) k[j] = g.signed_index(idx[j]);
        s[flat] = std::exp(-xi2[flat] / (2.0 * cfg.width * cfg.width)) * sample_coefficient(rs, k);
      }
      f = transform(s, Representation::physical);
      const double n2 = lp_norm(f, 2.0);
      if (n2 > 0.0) f *= cplx(cfg.amplitude / n2, 0.0);
      break;
    }
  }
  if (cfg.band_fraction < 1.0) f = dealias(f, cfg.band_fraction);
  return f;
}

Field initial_data(const RunConfig& cfg) {
  Field f = make_profile(cfg);
  if (!cfg.randomize_data) return f;
  return transform(dilated_randomize(f, cfg.randomization(), BumpFunction(cfg.bump_steepness)),
                   Representation::physical);
}

/// Initial data for the nonlinear flows, projected onto the dealias band.
Field evolution_data(const RunConfig& cfg) { return dealias(initial_data(cfg), cfg.dealias); }

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ojson jnum(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

/// Tracks everything written so a failed run can be rolled back.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_dir_ = true;
    }
  }

  const fs::path& dir() const { return dir_; }

  void text(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    written_.push_back(p);
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  }

  void json(const std::string& name, const ojson& j) { text(name, j.dump(2) + "\n"); }

  void snapshot(const std::string& name, const Field& f) {
    const fs::path p = dir_ / name;
    written_.push_back(p);
    write_snapshot(p, f);
  }

  void trajectory(const std::string& stem, const Trajectory& tr) {
    for (auto& p : write_trajectory(dir_, stem, tr)) written_.push_back(dir_ / p.filename());
  }

  const std::vector<fs::path>& written() const { return written_; }

  void rollback() noexcept {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

 private:
  fs::path dir_;
  bool created_dir_ = false;
  std::vector<fs::path> written_;
};

std::string tail_csv(const TailReport& rep) {
  std::string s = "lambda,lambda_sq,count,prob,log_prob\n";
  for (std::size_t i = 0; i < rep.thresholds.size(); ++i) {
    const double l = rep.thresholds[i];
    const double p = rep.empirical_probs[i];
    s += num(l) + "," + num(l * l) + "," + std::to_string(rep.counts[i]) + "," + num(p) + "," +
         (p > 0.0 ? num(std::log(p)) : "-inf") + "\n";
  }
  return s;
}

ojson tail_json(const TailReport& rep) {
  ojson j;
  j["norm"] = rep.norm_descriptor;
  j["samples"] = rep.samples;
  j["thresholds"] = rep.thresholds.size();
  if (rep.fit) {
    j["fit"] = {{"slope", jnum(rep.fit->slope)},
                {"intercept", jnum(rep.fit->intercept)},
                {"r_squared", jnum(rep.fit->r_squared)}};
  } else {
    j["fit"] = nullptr;
  }
  return j;
}

struct Context {
  const RunConfig& cfg;
  Outputs& out;
  ojson summary;
  std::string primary;
};

Trajectory subsample(const Trajectory& tr, int stride) {
  Trajectory out;
  for (std::size_t i = 0; i < tr.size(); i += static_cast<std::size_t>(stride))
    out.push_back(tr.time(i), tr.state(i));
  if ((tr.size() - 1) % static_cast<std::size_t>(stride) != 0)
    out.push_back(tr.time(tr.size() - 1), tr.state(tr.size() - 1));
  return out;
}

std::vector<double> step_times(const EvolutionConfig& e) {
  std::vector<double> t;
  for (long long k = 0; k <= e.steps(); ++k) t.push_back(static_cast<double>(k) * e.dt);
  return t;
}

// --- experiments -------------------------------------------------------------------

void run_randomize(Context& c) {
  const Field f = make_profile(c.cfg);
  const RandomizationSpec spec = c.cfg.randomization();
  const Field fw =
      transform(dilated_randomize(f, spec, BumpFunction(c.cfg.bump_steepness)), Representation::physical);
  const auto cubes = active_cubes(f.grid(), spec.scale);
  const auto coeffs = sample_coefficients(spec, cubes);
  std::ostringstream csv;
  write_coefficients_csv(csv, cubes, coeffs);
  c.out.snapshot("input.q4nl", f);
  c.out.snapshot("randomized.q4nl", fw);
  c.out.text("coefficients.csv", csv.str());
  const double nf = lp_norm(f, 2.0);
  c.summary["l2_input"] = jnum(nf);
  c.summary["l2_randomized"] = jnum(lp_norm(fw, 2.0));
  c.summary["relative_l2_difference"] = jnum(nf > 0.0 ? lp_norm(fw - f, 2.0) / nf : 0.0);
  c.summary["h_gamma_input"] = jnum(sobolev_norm(f, c.cfg.gamma));
  c.summary["h_gamma_randomized"] = jnum(sobolev_norm(fw, c.cfg.gamma));
  c.summary["cubes"] = cubes.size();
  c.primary = "coefficients.csv";
}

void run_evolve(Context& c) {
  const EvolutionConfig e = c.cfg.evolution();
  const Field u0 = evolution_data(c.cfg);
  const Trajectory tr = nonlinear_evolve(u0, e);
  const auto q0 = conserved_quantities(tr.state(0), e);
  double mass_drift = 0.0, energy_drift = 0.0;
  std::string csv = "t,mass,energy\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto q = conserved_quantities(tr.state(i), e);
    csv += num(tr.time(i)) + "," + num(q.mass) + "," + num(q.energy) + "\n";
    if (q0.mass > 0) mass_drift = std::max(mass_drift, std::abs(q.mass - q0.mass) / q0.mass);
    if (q0.energy != 0) energy_drift = std::max(energy_drift, std::abs(q.energy - q0.energy) / std::abs(q0.energy));
  }
  c.out.text("conserved.csv", csv);
  c.out.trajectory("u", tr);
  c.summary["steps"] = e.steps();
  c.summary["snapshots"] = tr.size();
  c.summary["mass_initial"] = jnum(q0.mass);
  c.summary["energy_initial"] = jnum(q0.energy);
  // Largest deviation from t = 0 over the stored snapshots.
  c.summary["relative_mass_drift"] = jnum(mass_drift);
  c.summary["relative_energy_drift"] = jnum(energy_drift);
  c.primary = "conserved.csv";
}

struct PicardRun {
  Trajectory z;
  PicardResult result;
};

PicardRun picard_run(const RunConfig& cfg) {
  EvolutionConfig e = cfg.evolution();
  e.validate();
  Field u0 = evolution_data(cfg);
  u0 *= cplx(cfg.epsilon, 0.0);
  const auto times = step_times(e);
  PicardRun run;
  run.z = free_trajectory(u0, times, e.params);
  run.result = picard_solve(run.z, e, cfg.picard());
  return run;
}

std::string residual_csv(const std::vector<double>& res) {
  std::string s = "iteration,residual,ratio\n";
  for (std::size_t k = 0; k < res.size(); ++k)
    s += std::to_string(k + 1) + "," + num(res[k]) + "," +
         (k > 0 && res[k - 1] > 0.0 ? num(res[k] / res[k - 1]) : "nan") + "\n";
  return s;
}

double max_ratio_after_first(const std::vector<double>& res) {
  double m = 0.0;
  for (std::size_t k = 1; k < res.size(); ++k)
    if (res[k - 1] > 0.0) m = std::max(m, res[k] / res[k - 1]);
  return m;
}

void run_picard(Context& c) {
  const PicardRun run = picard_run(c.cfg);
  const auto& res = run.result.residuals;
  const double gc = critical_regularity(c.cfg.dim);

  EvolutionConfig e = c.cfg.evolution();
  e.snapshot_stride = 1;
  Trajectory split = nonlinear_evolve(run.z.state(0), e);
  Trajectory full;
  for (std::size_t i = 0; i < run.z.size(); ++i)
    full.push_back(run.z.time(i), run.z.state(i) + transform(run.result.v.state(i), run.z.state(i).representation()));
  const double agreement = sup_sobolev_distance(full, split, gc);

  c.out.text("residuals.csv", residual_csv(res));
  c.summary["gamma_c"] = gc;
  c.summary["converged"] = run.result.converged;
  c.summary["iterations"] = res.size();
  c.summary["final_residual"] = jnum(res.empty() ? 0.0 : res.back());
  c.summary["max_ratio_after_first"] = jnum(max_ratio_after_first(res));
  c.summary["split_step_distance"] = jnum(agreement);
  c.primary = "residuals.csv";
}

void run_scatter(Context& c) {
  const PicardRun run = picard_run(c.cfg);
  const double gc = critical_regularity(c.cfg.dim);
  const Trajectory v = subsample(run.result.v, c.cfg.snapshot_stride);
  const PropagatorParams params{c.cfg.mu};
  const auto table = scattering_diagnostic(v, params, gc);
  const std::size_t mid = (v.size() - 1) / 2, last = v.size() - 1;
  const auto halves = scattering_increments(v, params, gc, {{0, mid}, {mid, last}});

  std::string csv = "t_i,t_j,increment\n";
  for (const auto& s : table) csv += num(s.t_from) + "," + num(s.t_to) + "," + num(s.increment) + "\n";
  c.out.text("increments.csv", csv);
  c.out.text("residuals.csv", residual_csv(run.result.residuals));
  c.summary["gamma_c"] = gc;
  c.summary["converged"] = run.result.converged;
  c.summary["final_residual"] = jnum(run.result.residuals.back());
  c.summary["first_half_increment"] = jnum(halves[0].increment);
  c.summary["second_half_increment"] = jnum(halves[1].increment);
  c.summary["half_ratio"] = jnum(halves[0].increment > 0 ? halves[1].increment / halves[0].increment : 0.0);
  c.primary = "increments.csv";
}

void run_tail(Context& c, TailMode mode) {
  TailExperiment ex;
  ex.mode = mode;
  ex.gamma = c.cfg.gamma;
  ex.p = c.cfg.p;
  ex.spec = c.cfg.randomization();
  ex.bump_steepness = c.cfg.bump_steepness;
  ex.samples = c.cfg.samples;
  ex.workers = c.cfg.workers;
  const Field f = make_profile(c.cfg);
  const auto values = randomization_norm_samples(f, ex);
  const auto th = c.cfg.thresholds.empty() ? auto_thresholds(values, c.cfg.threshold_count) : c.cfg.thresholds;
  ex.thresholds = th;
  const TailReport rep = tail_report(values, th, mode == TailMode::h_gamma ? "H^gamma" : "L^p");
  std::size_t finite = 0;
  for (double v : values) finite += std::isfinite(v) ? 1 : 0;
  c.out.text("tail.csv", tail_csv(rep));
  c.summary["tail"] = tail_json(rep);
  c.summary["tail"]["norm"] = mode == TailMode::h_gamma ? "H^" + num(c.cfg.gamma) : "L^" + num(c.cfg.p);
  c.summary["finite_fraction"] = static_cast<double>(finite) / values.size();
  c.summary["deterministic_norm"] = jnum(mode == TailMode::h_gamma ? sobolev_norm(f, c.cfg.gamma) : lp_norm(f, c.cfg.p));
  c.primary = "tail.csv";
}

void run_strichartz(Context& c, bool global) {
  StrichartzExperiment ex;
  ex.q = c.cfg.q;
  ex.r = c.cfg.r;
  ex.T = c.cfg.T_seconds;
  ex.time_steps = c.cfg.time_steps;
  ex.global = global;
  ex.guard_threshold = c.cfg.guard;
  ex.params.mu = c.cfg.mu;
  ex.spec = c.cfg.randomization();
  ex.bump_steepness = c.cfg.bump_steepness;
  ex.samples = c.cfg.samples;
  ex.thresholds = c.cfg.thresholds;
  ex.workers = c.cfg.workers;
  const StrichartzResult res = strichartz_tail_experiment(make_profile(c.cfg), ex);
  c.out.text("tail.csv", tail_csv(res.report));
  c.summary["tail"] = tail_json(res.report);
  c.summary["horizon"] = jnum(res.horizon);
  c.summary["surrogate"] = global;
  if (res.scaling) {
    const auto& sc = *res.scaling;
    std::string csv = "T,T_pow,c\n";
    ojson rows = ojson::array();
    for (std::size_t i = 0; i < sc.horizons.size(); ++i) {
      const double T = sc.horizons[i];
      csv += num(T) + "," + num(std::pow(T, -2.0 / ex.q)) + "," + num(sc.decay_rates[i]) + "\n";
      rows.push_back({{"T", T}, {"c", jnum(sc.decay_rates[i])}, {"r_squared", jnum(sc.reports[i].fit->r_squared)}});
      if (i > 0) c.out.text("tail_T" + std::to_string(i) + ".csv", tail_csv(sc.reports[i]));
    }
    c.out.text("strichartz_scaling.csv", csv);
    c.summary["scaling"] = rows;
    c.summary["c_vs_T_power_slope"] = jnum(sc.c_vs_power.slope);
  }
  c.primary = "tail.csv";
}

void run_bilinear(Context& c) {
  const Field f = profile_stream(c.cfg, 0);
  const Field g = profile_stream(c.cfg, 1);
  const BilinearReport rep = bilinear_sweep(f, g, c.cfg.M1, c.cfg.M2_multiples, PropagatorParams{c.cfg.mu},
                                            c.cfg.T_seconds, c.cfg.time_steps);
  std::string csv = "M1,M2,ratio\n";
  for (std::size_t i = 0; i < rep.ratios.size(); ++i)
    csv += std::to_string(rep.M1[i]) + "," + std::to_string(rep.M2[i]) + "," + num(rep.ratios[i]) + "\n";
  c.out.text("bilinear.csv", csv);
  c.summary["trend_slope"] = jnum(rep.trend_slope);
  c.summary["baseline_ratio"] = jnum(rep.ratios.front());
  c.primary = "bilinear.csv";
}

void run_dispersive(Context& c) {
  std::vector<double> times;
  const int n = c.cfg.time_count;
  for (int i = 0; i < n; ++i)
    times.push_back(c.cfg.t_min_seconds *
                    std::pow(c.cfg.t_max_seconds / c.cfg.t_min_seconds, static_cast<double>(i) / (n - 1)));
  const DecayFit fit = dispersive_decay_fit(initial_data(c.cfg), times, PropagatorParams{c.cfg.mu}, c.cfg.guard);
  std::string csv = "t,sup_norm\n";
  for (std::size_t i = 0; i < fit.times.size(); ++i) csv += num(fit.times[i]) + "," + num(fit.sup_norms[i]) + "\n";
  c.out.text("decay.csv", csv);
  c.summary["slope"] = jnum(fit.slope);
  c.summary["expected_slope"] = -c.cfg.dim / 4.0;
  c.summary["constant"] = jnum(fit.constant);
  c.summary["log_residual"] = jnum(fit.residual);
  c.primary = "decay.csv";
}

void run_scaling(Context& c) {
  const Field f = make_profile(c.cfg);
  std::vector<double> gammas = c.cfg.gammas;
  const double gc = critical_regularity(c.cfg.dim);
  if (std::find(gammas.begin(), gammas.end(), gc) == gammas.end()) gammas.push_back(gc);
  std::string csv = "gamma,lambda,norm,scaled_norm,rel_error\n";
  double worst = 0.0;
  for (double gm : gammas) {
    const double err = scaling_identity_check(f, gm, c.cfg.scale_factor);
    const double a = homogeneous_sobolev_norm(f, gm);
    const double b = homogeneous_sobolev_norm(rescale_field(f, c.cfg.scale_factor), gm);
    csv += num(gm) + "," + num(c.cfg.scale_factor) + "," + num(a) + "," + num(b) + "," + num(err) + "\n";
    worst = std::max(worst, err);
  }
  c.out.text("scaling.csv", csv);
  c.summary["max_rel_error"] = jnum(worst);
  c.summary["gamma_c"] = gc;
  c.primary = "scaling.csv";
}

void run_exponents(Context& c) {
  const ExponentRecord r = critical_exponents(c.cfg.dim, c.cfg.m);
  std::string csv = "N,m,gamma_c,gamma_N,beta_c,beta_N\n";
  csv += std::to_string(r.dim) + "," + std::to_string(r.m) + "," + num(r.gamma_c) + "," + num(r.gamma_N) + "," +
         num(r.beta_c) + "," + (r.beta_N ? num(*r.beta_N) : "nan") + "\n";
  c.out.text("exponents.csv", csv);
  c.summary["N"] = r.dim;
  c.summary["m"] = r.m;
  c.summary["gamma_c"] = r.gamma_c;
  c.summary["gamma_N"] = r.gamma_N;
  c.summary["gamma_N_branches"] = {r.gamma_N_first, r.gamma_N_second};
  c.summary["gamma_N_in_range"] = r.gamma_N_in_range;
  c.summary["beta_c"] = r.beta_c;
  c.summary["beta_N"] = r.beta_N ? ojson(*r.beta_N) : ojson(nullptr);
  c.primary = "exponents.csv";
}

void run_lambda0(Context& c) {
  std::string csv = "epsilon,lambda0,degenerate\n";
  ojson rows = ojson::array();
  double exponent = 0.0;
  for (double eps : c.cfg.epsilons) {
    const Lambda0 l = dilation_scale_lambda0(eps, c.cfg.f_norm, c.cfg.gamma, c.cfg.dim, c.cfg.delta);
    exponent = l.exponent;
    csv += num(eps) + "," + num(l.value) + "," + (l.degenerate ? "true" : "false") + "\n";
  }
  c.out.text("lambda0.csv", csv);
  c.summary["exponent"] = exponent;
  c.summary["proportionality_constant"] = 1.0;
  c.primary = "lambda0.csv";
}

const std::map<std::string, std::function<void(Context&)>>& registry() {
  static const std::map<std::string, std::function<void(Context&)>> r{
      {"randomize", run_randomize},
      {"evolve", run_evolve},
      {"picard", run_picard},
      {"scatter", run_scatter},
      {"tail-hgamma", [](Context& c) { run_tail(c, TailMode::h_gamma); }},
      {"tail-lp", [](Context& c) { run_tail(c, TailMode::lebesgue); }},
      {"tail-strichartz-local", [](Context& c) { run_strichartz(c, false); }},
      {"tail-strichartz-global", [](Context& c) { run_strichartz(c, true); }},
      {"bilinear", run_bilinear},
      {"dispersive-fit", run_dispersive},
      {"scaling-check", run_scaling},
      {"exponents", run_exponents},
      {"lambda0", run_lambda0},
  };
  return r;
}

ojson manifest_json(const RunManifest& m) {
  ojson j;
  j["experiment"] = m.experiment;
  j["config_hash"] = m.config_hash;
  j["version"] = m.version;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  j["primary_table"] = m.primary_table;
  j["artifacts"] = ojson::array();
  for (const auto& a : m.artifacts)
    j["artifacts"].push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  return j;
}

}  // namespace

Field make_profile(const RunConfig& cfg) { return profile_stream(cfg, 0); }

RunManifest run_experiment(const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  Outputs out(cfg.output_dir);
  try {
    Context ctx{cfg, out, ojson::object(), {}};
    ctx.summary["experiment"] = cfg.experiment;
    ctx.summary["config_hash"] = sha256_hex(cfg.canonical());
    ctx.summary["seed"] = std::to_string(cfg.seed);
    ctx.summary["grid"] = {{"dim", cfg.dim}, {"points_per_axis", cfg.points_per_axis}, {"box_length", cfg.box_length}};
    ctx.summary["randomization"] = {{"distribution", std::string(to_string(cfg.coefficients))},
                                    {"lambda_scale", cfg.lambda_scale},
                                    {"bump_steepness", cfg.bump_steepness}};
    registry().at(cfg.experiment)(ctx);
    out.json("summary.json", ctx.summary);

    RunManifest m;
    m.experiment = cfg.experiment;
    m.config_hash = sha256_hex(cfg.canonical());
    m.version = software_version();
    m.output_dir = out.dir();
    m.primary_table = ctx.primary;
    for (const auto& p : out.written())
      m.artifacts.push_back({p.filename().string(), sha256_file(p), fs::file_size(p)});
    m.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.json("manifest.json", manifest_json(m));
    return m;
  } catch (...) {
    out.rollback();
    throw;
  }
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("manifest: cannot open '" + path.string() + "'");
  const auto j = nlohmann::json::parse(in);
  RunManifest m;
  m.experiment = j.at("experiment").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  m.primary_table = j.at("primary_table").get<std::string>();
  m.output_dir = path.parent_path();
  for (const auto& a : j.at("artifacts"))
    m.artifacts.push_back({a.at("path").get<std::string>(), a.at("sha256").get<std::string>(),
                           a.at("bytes").get<std::uintmax_t>()});
  return m;
}

fs::path emit_report(const RunManifest& manifest, ReportFormat format) {
  if (manifest.artifacts.empty()) throw ValidationError("report: manifest lists no artifacts");
  std::string missing;
  for (const auto& a : manifest.artifacts)
    if (!fs::exists(manifest.output_dir / a.path)) missing += (missing.empty() ? "" : ", ") + a.path;
  if (!missing.empty()) throw ValidationError("report: missing artifacts: " + missing);

  if (format == ReportFormat::csv) {
    const fs::path target = manifest.output_dir / "report.csv";
    fs::copy_file(manifest.output_dir / manifest.primary_table, target,
                  fs::copy_options::overwrite_existing);
    return target;
  }
  ojson j;
  j["experiment"] = manifest.experiment;
  j["config_hash"] = manifest.config_hash;
  j["version"] = manifest.version;
  const fs::path summary = manifest.output_dir / "summary.json";
  if (fs::exists(summary)) {
    std::ifstream in(summary);
    j["summary"] = ojson::parse(in);
  }
  j["artifacts"] = ojson::array();
  for (const auto& a : manifest.artifacts) j["artifacts"].push_back({{"path", a.path}, {"sha256", a.sha256}});
  const fs::path target = manifest.output_dir / "report.json";
  std::ofstream(target) << j.dump(2) << "\n";
  return target;
}

}  // namespace q4nls
