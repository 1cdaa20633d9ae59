#pragma once

#include <complex>
#include <vector>

#include "bellsim/config.hpp"
#include "bellsim/pulse.hpp"

// Plane-wave reduction of a Bragg pulse: a lattice cos(k z - ...) only couples
// momenta p0 + n hbar k, so one momentum class evolves as a small chain of
// states. Used to calibrate pulse areas before touching the 4D grid.
namespace bellsim::ladder {

using cplx = std::complex<double>;

struct Chain {
  double mass = 0.0;        // kg
  double p0 = 0.0;          // kg m/s, momentum of index `half_width`
  int half_width = 4;       // states p0 + n hbar k for n in [-half_width, half_width]
  std::size_t size() const noexcept { return static_cast<std::size_t>(2 * half_width + 1); }
  std::size_t index_of(int n) const noexcept { return static_cast<std::size_t>(n + half_width); }
};

// Evolves amplitudes through the pulse (start to end) in `steps` steps.
std::vector<cplx> evolve(const Chain& chain, std::vector<cplx> amplitudes, const PulseSpec& pulse,
                         std::size_t steps = 2000);

// Population that ends in p0 + n_to hbar k when starting in p0 + n_from hbar k.
double transfer(const Chain& chain, int n_from, int n_to, const PulseSpec& pulse, std::size_t steps = 2000);

// Finds area_scale such that a pi pulse (theta fixed at pi) reaches its
// maximal transfer from n_from to n_from +/- 1; returns the scale and writes
// the transfer it reaches.
double calibrate_area_scale(const Chain& chain, int n_from, int n_to, PulseSpec pulse,
                            double* best_transfer = nullptr);

// Finds area_scale such that pulse.theta gives the two-level transfer
// sin^2(theta/2) on resonance. pi_scale (from calibrate_area_scale) is kept
// for whole multiples of pi and when no root is bracketed.
double area_scale_for_theta(const Chain& chain, int n_from, int n_to, PulseSpec pulse, double pi_scale);

}  // namespace bellsim::ladder
