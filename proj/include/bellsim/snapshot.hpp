#pragma once

#include <cstdint>
#include <filesystem>

#include "bellsim/wavefunction.hpp"

namespace bellsim {

// Little-endian layout:
//   0  "BWF4"
//   4  u32 version (1)
//   8  u32 x4 points per axis
//  24  f64 grid time step
//  32  u32 domain (0 position, 1 momentum)
//  36  u32 reserved, then 8 reserved bytes, all zero
//  48  f64 spatial_step, f64 time, f64 mass_A, f64 mass_B
//  80  N^4 x (f64 re, f64 im), x3 slowest
inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 48;
inline constexpr std::size_t kSnapshotMetadataBytes = 32;

std::uintmax_t snapshot_file_size(std::size_t points_per_dim);

// Writes to a temporary sibling and renames, so a crash never leaves a
// truncated file under the final name.
void save_snapshot(const WaveFunction4D& psi, const std::filesystem::path& path);
WaveFunction4D load_snapshot(const std::filesystem::path& path);

}  // namespace bellsim
