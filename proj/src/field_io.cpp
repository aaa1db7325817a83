#include "q4nls/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "q4nls/errors.hpp"

namespace q4nls {

namespace {

constexpr std::array<char, 4> kMagic{'Q', '4', 'N', 'L'};

template <class T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw ValidationError("snapshot: truncated input");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(std::ostream& out, const Field& f) {
  const Grid& g = f.grid();
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(out, kSnapshotVersion);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(g.dimension()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.points_per_axis()));
  put_le<double>(out, g.box_length());
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(f.representation()));
  for (cplx v : f.values()) {
    put_le<double>(out, v.real());
    put_le<double>(out, v.imag());
  }
  if (!out) throw std::runtime_error("snapshot: write failed");
}

Field read_snapshot(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ValidationError("snapshot: bad magic");
  const auto version = get_le<std::uint16_t>(in);
  if (version != kSnapshotVersion)
    throw ValidationError("snapshot: unsupported version " + std::to_string(version));
  const auto dim = get_le<std::uint16_t>(in);
  const auto n = get_le<std::uint32_t>(in);
  const auto length = get_le<double>(in);
  const auto rep = get_le<std::uint8_t>(in);
  if (rep > 1) throw ValidationError("snapshot: bad representation tag");
  Grid grid(dim, static_cast<int>(n), length);
  std::vector<cplx> values(grid.size());
  for (auto& v : values) {
    const double re = get_le<double>(in);
    const double im = get_le<double>(in);
    v = {re, im};
  }
  return Field(grid, static_cast<Representation>(rep), std::move(values));
}

void write_snapshot(const std::filesystem::path& path, const Field& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path.string());
  write_snapshot(out, f);
}

Field read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("snapshot: cannot open " + path.string());
  return read_snapshot(in);
}

std::vector<std::filesystem::path> write_trajectory(const std::filesystem::path& dir,
                                                    const std::string& stem,
                                                    const Trajectory& tr) {
  std::vector<std::filesystem::path> written;
  nlohmann::json index;
  index["times"] = nlohmann::json::array();
  index["paths"] = nlohmann::json::array();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const std::string name = stem + "_" + std::to_string(i) + ".q4nl";
    write_snapshot(dir / name, tr.state(i));
    written.push_back(dir / name);
    index["times"].push_back(tr.time(i));
    index["paths"].push_back(name);
  }
  const auto index_path = dir / (stem + "_index.json");
  std::ofstream out(index_path);
  out << index.dump(2) << '\n';
  written.push_back(index_path);
  return written;
}

Trajectory read_trajectory(const std::filesystem::path& index_path) {
  std::ifstream in(index_path);
  if (!in) throw ValidationError("trajectory index: cannot open " + index_path.string());
  const auto index = nlohmann::json::parse(in);
  const auto& times = index.at("times");
  const auto& paths = index.at("paths");
  if (times.size() != paths.size()) throw ValidationError("trajectory index: length mismatch");
  Trajectory tr;
  for (std::size_t i = 0; i < times.size(); ++i)
    tr.push_back(times[i].get<double>(),
                 read_snapshot(index_path.parent_path() / paths[i].get<std::string>()));
  return tr;
}

}  // namespace q4nls
