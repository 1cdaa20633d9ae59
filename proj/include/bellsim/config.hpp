#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace bellsim {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double speed_of_light = 299792458.0;   // m/s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double mass_he3 = 3.0160293 * atomic_mass_unit;
inline constexpr double mass_he4 = 4.0026032 * atomic_mass_unit;
// 2^3S_1 -> 2^3P_0 transition frequencies.
inline constexpr double transition_he3_hz = 276.7322e12;
inline constexpr double transition_he4_hz = 276.6986e12;
inline constexpr double pi = 3.14159265358979323846;
}  // namespace constants

// A is the fermionic species (3He*), B the bosonic one (4He*).
enum class Species : std::uint8_t { A = 0, B = 1 };

inline const char* to_string(Species s) { return s == Species::A ? "A" : "B"; }
Species parse_species(const std::string& text);

struct SpeciesParams {
  Species label = Species::A;
  double mass = 0.0;                   // kg
  double transition_frequency = 0.0;   // Hz
  double rabi_frequency = 0.0;         // rad/s, Omega_X
  double pulse_duration = 0.0;         // s, t_X
  double laser_intensity = 0.0;        // W/m^2, recorded only

  void validate() const;
  static SpeciesParams helium3();
  static SpeciesParams helium4();
};

class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(std::size_t points_per_dim, double spatial_step, double time_step);

  std::size_t points_per_dim() const noexcept { return points_; }
  double spatial_step() const noexcept { return spatial_step_; }
  double time_step() const noexcept { return time_step_; }
  double box_length() const noexcept { return static_cast<double>(points_) * spatial_step_; }
  // Momentum resolution 2*pi*hbar / (N dx).
  double momentum_step() const noexcept;
  double wavenumber_step() const noexcept;
  std::size_t total_points() const noexcept { return points_ * points_ * points_ * points_; }

  // Coordinate of index i, centred so index N/2 sits at the origin.
  double coordinate(std::size_t i) const noexcept;
  // Signed frequency index in FFT order: 0..N/2 then -(N/2)..-1.
  std::ptrdiff_t frequency_index(std::size_t i) const noexcept;

  GridSpec with_time_step(double dt) const { return GridSpec(points_, spatial_step_, dt); }

 private:
  std::size_t points_ = 0;
  double spatial_step_ = 0.0;
  double time_step_ = 0.0;
};

// Momenta are magnitudes along the lattice axis (z); the halos are circles in
// the (p_x, p_z) plane centred on that axis.
struct CollisionGeometry {
  double p_k = 0.0;
  double halo_center_A = 0.0;
  double halo_center_B = 0.0;
  double halo_radius = 0.0;
  // Transverse momentum |p_x| of the selected pair where the halos cross p_z = +-p_k/2.
  double mode_transverse() const;
};

CollisionGeometry derive_collision_geometry(const SpeciesParams& species_a,
                                            const SpeciesParams& species_b, double p_k);

// Two-photon detuning (rad/s) that makes p_initial -> p_final resonant:
// (p_final^2 - p_initial^2) / (2 m hbar). `lattice_momentum` is the momentum
// transferred by the standing wave; `tolerance` is usually one momentum_step.
double detuning_for_transition(const SpeciesParams& species, double p_initial, double p_final,
                               double lattice_momentum, double tolerance);

// p_k = 2 hbar (2 pi / lambda) for counter-propagating beams at the transition.
double default_lattice_momentum(const SpeciesParams& species);

// Internal dimensionless units: length 1/k, time m_B/(hbar k^2), mass m_B,
// where hbar k = p_k.
struct Units {
  double length = 1.0;    // m
  double time = 1.0;      // s
  double mass = 1.0;      // kg
  double momentum = 1.0;  // kg m/s
  double energy = 1.0;    // J

  static Units from(double mass_b, double p_k);
};

enum class StatePrepMode { idealized, physical };
enum class Envelope { square, gaussian };

const char* to_string(StatePrepMode m);
const char* to_string(Envelope e);

struct PulseAngles {
  double theta = 0.0;
  double phi = 0.0;
};

struct RunConfig {
  GridSpec grid;
  std::array<SpeciesParams, 2> species{SpeciesParams::helium3(), SpeciesParams::helium4()};
  std::array<double, 2> trap_frequency{0.0, 0.0};  // rad/s, isotropic per species

  double lattice_momentum = 0.0;       // p_k, kg m/s
  double scattering_length_a34 = 29e-9;  // m
  double interaction_width = 0.0;      // m; 0 means two grid cells
  double interaction_strength = 0.0;   // J, peak of the Gaussian pseudopotential
  bool calibrate_interaction = true;
  double scattered_fraction_min = 0.02;
  double scattered_fraction_max = 0.05;

  StatePrepMode state_prep = StatePrepMode::idealized;
  Envelope envelope = Envelope::square;
  // Window of each of the two physical-mode splitting pulses (0 = automatic).
  double split_duration = 0.0;         // s

  double collision_duration = 0.0;     // s
  double t1 = 0.0;                     // s, mirror pulses start
  double t2 = 0.0;                     // s, mixing pulses start
  double total_duration = 0.0;         // s

  // Mirror and mixing settings per species, indexed by Species.
  std::array<PulseAngles, 2> mirror{PulseAngles{constants::pi, 0.0}, PulseAngles{constants::pi, 0.0}};
  std::array<PulseAngles, 2> mixing{PulseAngles{constants::pi / 2, 0.0},
                                    PulseAngles{constants::pi / 2, 0.0}};

  // Region radius used by the analysis, as a fraction of the halo radius; the
  // analysis enforces a floor of two momentum steps.
  double region_radius_fraction = 0.1;

  std::filesystem::path output_dir = "out";
  std::size_t checkpoint_interval = 0;  // steps; 0 disables checkpoints
  std::size_t workers = 1;
  double memory_cap_bytes = 8e9;

  const SpeciesParams& params(Species s) const { return species[static_cast<int>(s)]; }
  SpeciesParams& params(Species s) { return species[static_cast<int>(s)]; }
  Units units() const { return Units::from(params(Species::B).mass, lattice_momentum); }
  CollisionGeometry geometry() const;
  double effective_interaction_width() const;

  void validate() const;
};

// Flat INI text: sections [grid], [species_a], [species_b], [interaction],
// [bragg], [sequence], [analysis], [output]. All quantities SI with the unit
// suffix in the key; the full key list is in README.md.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);
// Applies "section.key=value" overrides before validation.
RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides);
std::string canonical_config_text(const RunConfig& config);
std::string config_hash(const RunConfig& config);

}  // namespace bellsim
