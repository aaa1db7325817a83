// q4nls <experiment> --config <path> [--seed u64] [--out dir] [--workers k]
//
// Exit codes: 0 success, 2 validation error, 3 numerical divergence
// (Picard divergence, non-finite split-step state, wrap-around guard), 1 other.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "q4nls/config.hpp"
#include "q4nls/errors.hpp"
#include "q4nls/experiment.hpp"

namespace {

int default_workers() {
  const char* env = std::getenv("Q4NLS_WORKERS");
  if (!env || !*env) return 1;
  try {
    std::size_t used = 0;
    const int k = std::stoi(env, &used);
    if (used != std::string(env).size() || k < 1) throw std::invalid_argument(env);
    return k;
  } catch (const std::exception&) {
    throw q4nls::ValidationError("Q4NLS_WORKERS must be a positive integer, got '" + std::string(env) + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized-data experiments for the fourth-order cubic Schrodinger equation"};
  app.set_version_flag("--version", q4nls::software_version());

  std::string experiment, config_path, out_dir, report;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string names;
  for (const auto& n : q4nls::experiment_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("experiment", experiment, "One of: " + names)->required();
  app.add_option("--config", config_path, "Flat key = value config file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Overrides the config seed");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads for sample loops (default $Q4NLS_WORKERS or 1)");
  app.add_option("--report", report, "Also emit a consolidated report")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    q4nls::RunConfig cfg = q4nls::load_config(config_path);
    if (!q4nls::is_experiment(experiment))
      throw q4nls::ValidationError("unknown experiment '" + experiment + "' (known: " + names + ")");
    if (!cfg.experiment.empty() && cfg.experiment != experiment)
      throw q4nls::ValidationError("config: experiment: file says '" + cfg.experiment +
                                   "' but the command line says '" + experiment + "'");
    cfg.experiment = experiment;
    if (*seed_opt) cfg.seed = seed;
    if (*out_opt) cfg.output_dir = out_dir;
    cfg.workers = *workers_opt ? workers : default_workers();

    const auto manifest = q4nls::run_experiment(cfg);
    std::cout << manifest.experiment << ": wrote " << manifest.artifacts.size() << " artifacts to "
              << manifest.output_dir.string() << "\n";
    if (!report.empty()) {
      const auto path = q4nls::emit_report(manifest, report == "csv" ? q4nls::ReportFormat::csv
                                                                      : q4nls::ReportFormat::json);
      std::cout << "report: " << path.string() << "\n";
    }
    return 0;
  } catch (const q4nls::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const q4nls::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const q4nls::BlowUpError& e) {
    std::cerr << "divergence: " << e.what() << " (last good t = " << e.last_good_time() << ")\n";
    return 3;
  } catch (const q4nls::WrapAroundError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
