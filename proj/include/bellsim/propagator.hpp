#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bellsim/config.hpp"
#include "bellsim/fft.hpp"
#include "bellsim/wavefunction.hpp"

namespace bellsim {

enum class PotentialKind { trap, bragg_A, bragg_B, interaction };
const char* to_string(PotentialKind k);

// Axis order of WaveFunction4D: x3, z3 (species A), x4, z4 (species B).
enum Axis : int { x3 = 0, z3 = 1, x4 = 2, z4 = 3 };

// A real potential energy (J) on the 4D configuration space, stored in the
// structured form the propagator exploits: a sum of single-coordinate terms
// plus at most one term depending on the A-B separation (dx, dz).
class PotentialField {
 public:
  using AxisFn = std::function<double(double coordinate, double time)>;
  using PairFn = std::function<double(double dx, double dz)>;

  struct AxisTerm {
    int axis;
    AxisFn energy;
  };

  PotentialField(PotentialKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  PotentialField& add_axis_term(int axis, AxisFn energy);
  // Pair terms are static and use the minimum-image separation on the periodic box.
  PotentialField& set_pair_term(PairFn energy);

  PotentialKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<AxisTerm>& axis_terms() const noexcept { return axis_terms_; }
  const std::optional<PairFn>& pair_term() const noexcept { return pair_; }
  bool has_pair_term() const noexcept { return pair_.has_value(); }

  // V(x3, z3, x4, z4, t) in joules. Separations passed to the pair term are
  // the raw differences; the grid engine applies minimum imaging itself.
  double evaluate(const std::array<double, 4>& r, double t) const;

 private:
  PotentialKind kind_;
  std::string name_;
  std::vector<AxisTerm> axis_terms_;
  std::optional<PairFn> pair_;
};

// 1/2 m w^2 r^2 for both particles (isotropic in each species' plane).
PotentialField harmonic_trap(std::array<double, 2> masses, std::array<double, 2> trap_frequencies);

// Time profile of a Bragg pulse; returns the lattice depth V_B(t) in joules.
using EnvelopeFn = std::function<double(double time)>;

EnvelopeFn square_envelope(double depth, double start, double duration);
// Gaussian centred in [start, start+duration] with sigma = duration/6, zero outside.
EnvelopeFn gaussian_envelope(double depth, double start, double duration);

// V_B(t) cos(k z - delta (t - start) - phi) on the target species' z axis.
PotentialField bragg_potential(Species target, EnvelopeFn envelope, double wavevector,
                               double detuning, double phi, double start);

// g exp(-(dx^2 + dz^2) / (2 sigma^2)) between the two particles.
PotentialField interaction_potential(double strength, double width);

// Second-order Strang split-step propagator on the 4D grid. Internally the
// phases are computed in the dimensionless units of `Units` (hbar = 1).
class SplitStepPropagator {
 public:
  SplitStepPropagator(const GridSpec& grid, std::array<double, 2> masses, const Units& units,
                      std::size_t workers = 1);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t workers() const noexcept { return workers_; }

  // One step exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2) with V evaluated at
  // t + dt/2. dt may be negative (time reversal). Throws NumericalBlowupError
  // if the field stops being finite.
  void step(WaveFunction4D& psi, const std::vector<PotentialField>& potentials, double dt);

  // round(duration/dt) steps of equal size summing exactly to duration.
  void evolve(WaveFunction4D& psi, const std::vector<PotentialField>& potentials, double duration,
              double dt);

  // Exact free flight: a single kinetic multiplication.
  void free_evolve(WaveFunction4D& psi, double duration);

  // Unnormalised transforms on the raw buffer; used by the analysis code.
  const fft::Transform& transform() const noexcept { return fft_; }

  // max |V| dt / hbar over the potentials of the most recent step.
  double last_max_phase() const noexcept { return last_max_phase_; }

 private:
  void apply_potentials(WaveFunction4D& psi, const std::vector<PotentialField>& potentials,
                        double t_mid, double half_dt);
  void apply_kinetic(WaveFunction4D& psi, double dt);
  void build_kinetic_tables(double dt);

  GridSpec grid_;
  std::array<double, 2> masses_;
  Units units_;
  std::size_t workers_;
  fft::Transform fft_;
  double kinetic_dt_ = 0.0;
  std::vector<cplx> kin_outer_;  // (x3, z3) momenta, normalisation folded in
  std::vector<cplx> kin_inner_;  // (x4, z4) momenta
  double last_max_phase_ = 0.0;
};

// Product of harmonic-oscillator ground states, sigma^2 = hbar / (2 m w) for
// the density. Throws ResolutionError outside 2 .. N/4 grid cells.
WaveFunction4D ground_state(const GridSpec& grid, std::array<double, 2> trap_frequencies,
                            std::array<double, 2> masses);

// Unitary 4D DFT; the result carries Domain::momentum.
WaveFunction4D to_momentum_space(const WaveFunction4D& psi, std::size_t workers = 1);
WaveFunction4D to_position_space(const WaveFunction4D& psi, std::size_t workers = 1);

// A real N x N field over one species' (p_x, p_z) plane (or any pair of
// axes), centred: index i sits at (i - N/2) * momentum_step.
struct Field2D {
  std::size_t n = 0;
  double step = 0.0;  // momentum per index, kg m/s
  std::vector<double> values;  // row-major, first axis slowest

  double& at(std::size_t r, std::size_t c) { return values[r * n + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * n + c]; }
  double coordinate(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(n / 2)) * step;
  }
  double total() const;
};

// |psi~|^2 marginalised over the other species; input in either domain.
Field2D momentum_density(const WaveFunction4D& psi, Species species, std::size_t workers = 1);

// Maps a centred index to FFT storage order and back.
inline std::size_t centred_to_fft(std::size_t i, std::size_t n) { return (i + n - n / 2) % n; }
inline std::size_t fft_to_centred(std::size_t i, std::size_t n) { return (i + n / 2) % n; }

}  // namespace bellsim
