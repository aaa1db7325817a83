#pragma once

// Binary field snapshots:
//   "Q4NL" | version u16 | N u16 | n u32 | L f64 | representation u8 |
//   n^N x (re f64, im f64), all little-endian, row-major.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "q4nls/grid.hpp"

namespace q4nls {

inline constexpr std::uint16_t kSnapshotVersion = 1;

void write_snapshot(std::ostream& out, const Field& f);
Field read_snapshot(std::istream& in);

void write_snapshot(const std::filesystem::path& path, const Field& f);
Field read_snapshot(const std::filesystem::path& path);

/// Writes one snapshot per state plus `<stem>_index.json` listing times and paths
/// (relative to dir). Returns the files written, index last.
std::vector<std::filesystem::path> write_trajectory(const std::filesystem::path& dir,
                                                    const std::string& stem,
                                                    const Trajectory& tr);
Trajectory read_trajectory(const std::filesystem::path& index_path);

}  // namespace q4nls
