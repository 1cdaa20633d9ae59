#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bellsim/config.hpp"
#include "bellsim/propagator.hpp"
#include "bellsim/pulse_sequence.hpp"
#include "bellsim/wavefunction.hpp"

namespace bellsim {

// A disc in one species' (p_x, p_z) plane standing for one logical mode.
struct ModeRegion {
  std::string label;
  Species species = Species::A;
  double center_x = 0.0;  // kg m/s
  double center_z = 0.0;  // kg m/s
  double radius = 0.0;    // kg m/s

  bool contains(double px, double pz) const {
    const double dx = px - center_x, dz = pz - center_z;
    return dx * dx + dz * dz <= radius * radius;
  }
};

// Index order matches oracle::joint_index: up modes first.
enum ModeIndex { kAUp = 0, kADown = 1, kBUp = 2, kBDown = 3 };

// Discs around A(nwarrow), A(swarrow), B(nearrow), B(searrow). The radius is
// radius_fraction * halo radius, floored so every disc holds a grid cell. Throws
// GeometryError if two discs of one species touch.
std::array<ModeRegion, 4> default_mode_regions(const CollisionGeometry& geometry, const GridSpec& grid,
                                               double radius_fraction = 0.1);

struct CorrelationTable {
  double theta_a = 0.0, theta_b = 0.0, phi_a = 0.0, phi_b = 0.0;
  // W(A up, B up), W(A up, B down), W(A down, B up), W(A down, B down)
  std::array<double, 4> raw{};

  double total() const { return raw[0] + raw[1] + raw[2] + raw[3]; }
  std::array<double, 4> normalized() const;
};

// Joint probability mass inside each pair of A and B regions. Accepts either
// domain; position-space fields are transformed first. Throws AnalysisError
// when the regions hold less than 1e-12 in total.
CorrelationTable joint_weights(const WaveFunction4D& psi, const std::array<ModeRegion, 4>& regions,
                               std::size_t workers = 1);

// E = W(uu) + W(dd) - W(ud) - W(du) on normalised weights.
double correlator_from_table(const CorrelationTable& table);
// S = E(a,b) - E(a,b') + E(a',b) + E(a',b'), tables in that order.
double chsh_from_runs(const std::array<CorrelationTable, 4>& tables);

struct SliceSelection {
  double px_a = 0.0;         // kg m/s
  double px_b = 0.0;
  double half_width = 0.0;   // transverse window half width; 0 means half a momentum step
};

// |Phi(p_z^A, p_z^B)|^2 summed over p_x^A, p_x^B inside the windows; first
// index is p_z^A. Throws AnalysisError when a window holds no grid point.
Field2D slice_joint_density(const WaveFunction4D& psi_momentum, const SliceSelection& selection,
                            std::size_t workers = 1);

struct RingFit {
  double center_x = 0.0;
  double center_z = 0.0;
  double radius = 0.0;
  double rms = 0.0;         // weighted RMS distance from the circle
  std::size_t points = 0;
};

// Weighted algebraic (Kasa) circle fit to the cells of `density` that pass
// `keep` and exceed threshold_fraction of the largest kept cell.
RingFit fit_ring(const Field2D& density, const std::function<bool(double px, double pz)>& keep,
                 double threshold_fraction = 0.1);

struct VisibilityFit {
  double visibility = 0.0;  // V in E = V cos(theta_a + theta_b)
  double rms = 0.0;
  std::size_t points = 0;
};

// Least squares V over points with finite E.
VisibilityFit fit_visibility(const std::vector<double>& theta_sums, const std::vector<double>& correlators);

struct ScanPoint {
  CorrelationTable table;
  double correlator = 0.0;
  bool ok = false;
  std::string error;
};

struct ScanResult {
  std::vector<ScanPoint> points;
  VisibilityFit fit;
  SequenceResult prefix;  // shared stages; state at t2
};

struct ScanOptions {
  RunOptions run;
  std::size_t scan_workers = 1;  // sequences finished concurrently
  std::function<void(const ScanPoint&)> on_point;
};

// Runs the shared prefix once, then mixing and expansion for every
// (theta_a, theta_b) pair (outer product of the lists) at the configured
// phases. Per-point failures are recorded and the scan continues.
ScanResult scan_correlator(const RunConfig& config, const std::vector<double>& theta_a,
                           const std::vector<double>& theta_b, const ScanOptions& options = {});

// Same, for an explicit list of settings.
struct Setting {
  double theta_a = 0.0, theta_b = 0.0, phi_a = 0.0, phi_b = 0.0;
};
ScanResult scan_settings(const RunConfig& config, const std::vector<Setting>& settings,
                         const ScanOptions& options = {});

// Runs the last stages of one setting on a copy of the prefix state and
// evaluates the joint weights.
ScanPoint evaluate_setting(const SequenceResult& prefix, const RunConfig& config, const Setting& setting,
                           const std::array<ModeRegion, 4>& regions);

}  // namespace bellsim
