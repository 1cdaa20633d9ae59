#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <random>
#include <string>

#include "bellsim/config.hpp"
#include "bellsim/wavefunction.hpp"

namespace testing {

// A small but complete configuration; the caller overrides what it needs.
inline std::string small_config_text(std::size_t n = 17, std::size_t periods = 4) {
  return "[grid]\npoints_per_dim = " + std::to_string(n) + "\nlattice_periods_per_box = " +
         std::to_string(periods) +
         "\ntime_step_s = 2.0e-7\n"
         "[species_a]\ntrap_frequency_rad_per_s = 9064.29\npulse_duration_s = 8.4333e-6\n"
         "[species_b]\ntrap_frequency_rad_per_s = 6830.10\npulse_duration_s = 8.4333e-6\n"
         "[interaction]\nwidth_m = 7.2e-8\n"
         "[bragg]\nenvelope = gaussian\n"
         "[sequence]\ncollision_duration_s = 2e-6\nt1_s = 3e-6\nt2_s = 14e-6\ntotal_duration_s = 25e-6\n";
}

inline bellsim::WaveFunction4D random_field(const bellsim::GridSpec& grid, unsigned seed) {
  bellsim::WaveFunction4D psi(grid, {bellsim::constants::mass_he3, bellsim::constants::mass_he4});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (auto& c : psi.values()) c = {g(rng), g(rng)};
  bellsim::normalize(psi);
  return psi;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("bellsim_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
