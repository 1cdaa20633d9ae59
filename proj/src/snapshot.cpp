#include "bellsim/snapshot.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "bellsim/errors.hpp"

namespace bellsim {

namespace {

constexpr std::array<char, 4> kMagic{'B', 'W', 'F', '4'};

template <class T>
void put(unsigned char* out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(out, bytes, sizeof(T));
}

template <class T>
T get(const unsigned char* in) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void write_payload(std::ofstream& out, const WaveFunction4D& psi) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(psi.data()),
              static_cast<std::streamsize>(psi.size() * sizeof(cplx)));
  } else {
    std::array<unsigned char, 16> buf;
    for (const cplx& c : psi.values()) {
      put(buf.data(), c.real());
      put(buf.data() + 8, c.imag());
      out.write(reinterpret_cast<const char*>(buf.data()), 16);
    }
  }
}

}  // namespace

std::uintmax_t snapshot_file_size(std::size_t points_per_dim) {
  const std::uintmax_t n = points_per_dim;
  return kSnapshotHeaderBytes + kSnapshotMetadataBytes + n * n * n * n * 16u;
}

void save_snapshot(const WaveFunction4D& psi, const std::filesystem::path& path) {
  std::array<unsigned char, kSnapshotHeaderBytes + kSnapshotMetadataBytes> head{};
  std::memcpy(head.data(), kMagic.data(), 4);
  put<std::uint32_t>(head.data() + 4, kSnapshotVersion);
  const auto n = static_cast<std::uint32_t>(psi.extent());
  for (int a = 0; a < 4; ++a) put<std::uint32_t>(head.data() + 8 + 4 * a, n);
  put<double>(head.data() + 24, psi.grid().time_step());
  put<std::uint32_t>(head.data() + 32, psi.domain() == Domain::momentum ? 1u : 0u);
  put<double>(head.data() + 48, psi.grid().spatial_step());
  put<double>(head.data() + 56, psi.time());
  put<double>(head.data() + 64, psi.masses()[0]);
  put<double>(head.data() + 72, psi.masses()[1]);

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open snapshot for writing: " + tmp.string());
    out.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
    write_payload(out, psi);
    out.flush();
    if (!out) throw FormatError("write failed for snapshot " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

WaveFunction4D load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open snapshot: " + path.string());
  std::array<unsigned char, kSnapshotHeaderBytes + kSnapshotMetadataBytes> head{};
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  if (in.gcount() != static_cast<std::streamsize>(head.size()))
    throw FormatError("snapshot truncated in header: " + path.string());
  if (std::memcmp(head.data(), kMagic.data(), 4) != 0) throw FormatError("bad snapshot magic in " + path.string());
  const auto version = get<std::uint32_t>(head.data() + 4);
  if (version != kSnapshotVersion)
    throw FormatError("unsupported snapshot version " + std::to_string(version) + " in " + path.string());
  const auto n = get<std::uint32_t>(head.data() + 8);
  for (int a = 1; a < 4; ++a)
    if (get<std::uint32_t>(head.data() + 8 + 4 * a) != n)
      throw FormatError("snapshot axes have different extents: " + path.string());
  const auto expected = snapshot_file_size(n);
  const auto actual = std::filesystem::file_size(path);
  if (actual != expected)
    throw FormatError("snapshot size " + std::to_string(actual) + " bytes, expected " + std::to_string(expected) +
                      " (truncated or corrupt): " + path.string());

  GridSpec grid;
  try {
    grid = GridSpec(n, get<double>(head.data() + 48), get<double>(head.data() + 24));
  } catch (const ConfigError& e) {
    throw FormatError(std::string("snapshot grid invalid: ") + e.what());
  }
  const auto domain = get<std::uint32_t>(head.data() + 32) == 1u ? Domain::momentum : Domain::position;
  WaveFunction4D psi(grid, {get<double>(head.data() + 64), get<double>(head.data() + 72)},
                     get<double>(head.data() + 56), domain);
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(psi.data()), static_cast<std::streamsize>(psi.size() * sizeof(cplx)));
    if (in.gcount() != static_cast<std::streamsize>(psi.size() * sizeof(cplx)))
      throw FormatError("snapshot payload truncated: " + path.string());
  } else {
    std::array<unsigned char, 16> buf;
    for (auto& c : psi.values()) {
      in.read(reinterpret_cast<char*>(buf.data()), 16);
      if (in.gcount() != 16) throw FormatError("snapshot payload truncated: " + path.string());
      c = cplx(get<double>(buf.data()), get<double>(buf.data() + 8));
    }
  }
  return psi;
}

}  // namespace bellsim
