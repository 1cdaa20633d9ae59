#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bellsim/config.hpp"
#include "bellsim/propagator.hpp"
#include "bellsim/pulse.hpp"
#include "bellsim/wavefunction.hpp"

namespace bellsim {

struct StageRecord {
  std::string name;
  double start = 0.0;     // s
  double duration = 0.0;  // s
  std::string parameters;
  std::filesystem::path snapshot;  // empty when not written
};

// Time-ordered plan of one run. Times are measured from trap release.
struct SequenceSchedule {
  StatePrepMode mode = StatePrepMode::idealized;
  std::vector<StageRecord> stages;  // prepare, split_B, collide, free_flight, mirror, free_flight, mix, expand
  std::vector<PulseSpec> pulses;    // every Bragg pulse, in start order

  void validate() const;
  const StageRecord& stage(const std::string& name) const;
};

// Area corrections for the mirror/mixing pulses (index = species) and for
// the two physical-mode splitting pulses.
struct PulseCalibration {
  std::array<double, 2> area_scale{1.0, 1.0};
  std::array<double, 2> pi_transfer{1.0, 1.0};
  std::array<double, 2> split_scale{1.0, 1.0};
};

// Ladder-model calibration of every pulse in the run. Throws CalibrationError
// when a mirror cannot reach 98% transfer on resonance.
PulseCalibration calibrate_pulses(const RunConfig& config);

// Duration of a pulse of area theta on species s: theta / Omega_s for square
// envelopes, the configured window for Gaussian ones.
double pulse_duration(const RunConfig& config, Species s, double theta);

// Pulse coupling p_z = -p_k/2 and +p_k/2 of species s.
PulseSpec halo_pulse(const RunConfig& config, Species s, PulseAngles angles, double start,
                     const PulseCalibration& cal);

// Physical-mode splitting: pi/2 on 0 -> +p_k, then pi on 0 -> -p_k.
std::array<PulseSpec, 2> split_pulses(const RunConfig& config, const PulseCalibration& cal);

SequenceSchedule build_schedule(const RunConfig& config, const PulseCalibration& cal);

// Ground state of both species; the trap is off afterwards.
WaveFunction4D prepare_initial_state(const RunConfig& config);

struct SplitReport {
  double rest_fraction = 0.0;
  double plus_weight = 0.0;   // B population near +p_k
  double minus_weight = 0.0;  // near -p_k
};

// Puts B into (|+p_k> + |-p_k>)/sqrt(2). Throws CalibrationError in physical
// mode if more than 5% stays at rest.
SplitReport split_B(WaveFunction4D& psi, const RunConfig& config, const PulseCalibration& cal);
// B populations near 0 and +-p_k (within p_k/2 along z).
SplitReport measure_split(const WaveFunction4D& psi, const RunConfig& config);

struct CollisionReport {
  double strength = 0.0;             // J
  double scattered_fraction = 0.0;   // 1 - |<free|psi>|^2
  int runs = 0;
  std::vector<std::string> warnings;
};

struct CollideOptions {
  bool calibrate = true;
  // Called every `checkpoint_interval` steps with the state, the completed
  // step count and the strength in use.
  std::size_t checkpoint_interval = 0;
  std::function<void(const WaveFunction4D&, long long, double)> checkpoint;
  // A partially evolved state to continue the first trial from; `psi` must
  // still be the split state.
  const WaveFunction4D* partial = nullptr;
  long long partial_step = 0;
  double partial_strength = 0.0;
  std::function<void(const std::string&)> log;
};

// Contact-like strength used when calibration is off and none is configured:
// 2 pi hbar^2 a / mu spread over the Gaussian's volume (2 pi)^{3/2} sigma^3.
double default_interaction_strength(const RunConfig& config);

double scattered_fraction(const WaveFunction4D& psi, const WaveFunction4D& free_reference);

// Evolves the split state `psi` with kinetic + interaction for `duration`.
// With calibration the strength is tuned (Born scaling, then bisection)
// until the scattered fraction lies in the configured window.
CollisionReport collide(WaveFunction4D& psi, const RunConfig& config, double duration,
                        SplitStepPropagator& propagator, const CollideOptions& options = {});
// Steps first_step .. total at a fixed strength.
void collide_at(WaveFunction4D& psi, const RunConfig& config, double strength, double duration,
                SplitStepPropagator& propagator, long long first_step = 0,
                const CollideOptions& options = {});

// Exact free flight of the whole field.
void free_flight(WaveFunction4D& psi, double duration, std::size_t workers = 1);

// Applies simultaneous pulses (at most one per species) on the separable
// path. The field must sit at the common start time.
void apply_bragg(WaveFunction4D& psi, const std::vector<PulseSpec>& pulses, const RunConfig& config);

struct RunOptions {
  std::filesystem::path checkpoint_dir;  // empty: no snapshots
  bool resume = false;
  std::function<void(const std::string&)> log;
};

struct SequenceResult {
  WaveFunction4D state;
  SequenceSchedule schedule;
  PulseCalibration calibration;
  SplitReport split;
  CollisionReport collision;
  std::vector<StageRecord> stages;  // as executed, with snapshot paths
  bool resumed = false;
};

// Everything up to (not including) the mixing pulses; the state sits at t2.
SequenceResult run_prefix(const RunConfig& config, const RunOptions& options = {});
// Mixing pulses with config.mixing, then free expansion to total_duration.
void finish_sequence(SequenceResult& prefix, const RunConfig& config, const RunOptions& options = {});
SequenceResult run_sequence(const RunConfig& config, const RunOptions& options = {});

// Hash of the configuration with the mixing angles removed: runs that share
// it share every stage before mixing.
std::string prefix_hash(const RunConfig& config);

}  // namespace bellsim
