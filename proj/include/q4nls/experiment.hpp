#pragma once

// Named experiments composed from the library, with on-disk artifacts and a
// checksummed manifest.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "q4nls/config.hpp"
#include "q4nls/grid.hpp"

namespace q4nls {

struct Artifact {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// manifest.json holds the wall-clock time, so it is the one output file that
/// differs between otherwise identical runs.
struct RunManifest {
  std::string experiment;
  std::string config_hash;  // SHA-256 of RunConfig::canonical()
  std::string version;
  double wall_clock_seconds = 0.0;
  std::filesystem::path output_dir;
  std::string primary_table;  // main CSV, relative to output_dir
  std::vector<Artifact> artifacts;
};

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Initial data described by the profile keys (before any randomization).
Field make_profile(const RunConfig& cfg);

/// Validates, runs, writes artifacts and manifest.json. On any failure the
/// files written by this run are removed and the exception propagates.
RunManifest run_experiment(const RunConfig& cfg);

RunManifest read_manifest(const std::filesystem::path& path);

enum class ReportFormat { csv, json };

/// report.csv (the primary table) or report.json (summary plus the artifact
/// list). Throws if the manifest is empty or artifacts are missing, listing
/// the missing ones.
std::filesystem::path emit_report(const RunManifest& manifest, ReportFormat format);

std::string software_version();

}  // namespace q4nls
