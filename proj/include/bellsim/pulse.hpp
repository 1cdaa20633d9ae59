#pragma once

#include <string>

#include "bellsim/config.hpp"
#include "bellsim/propagator.hpp"

namespace bellsim {

// One Bragg pulse V_B(t) cos(k z - delta (t - start) - phi) on one species.
//
// The envelope's peak depth follows from the requested area:
//   peak depth = area_scale * hbar * theta / (integral of the unit-peak envelope).
// area_scale stays 1 for an ideal two-level pulse; calibrate_area_scale()
// in bragg_ladder.hpp corrects it for the other momentum orders.
struct PulseSpec {
  Species target = Species::A;
  double theta = 0.0;             // rad
  double phi = 0.0;               // rad
  Envelope envelope = Envelope::square;
  double duration = 0.0;          // s
  double start_time = 0.0;        // s
  double detuning = 0.0;          // rad/s
  double lattice_wavevector = 0.0;  // rad/m
  double area_scale = 1.0;

  void validate() const;
  double end_time() const noexcept { return start_time + duration; }
  // Integral of the unit-peak envelope over the pulse, in seconds.
  double unit_area() const;
  double peak_depth() const;      // J
  double peak_rabi_frequency() const { return peak_depth() / constants::hbar; }
  EnvelopeFn envelope_fn() const;
  PotentialField potential() const;
  std::string describe() const;
};

}  // namespace bellsim
