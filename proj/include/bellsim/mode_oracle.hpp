#pragma once

#include <array>
#include <complex>

#include "bellsim/config.hpp"

// Closed-form model of the post-selected single-pair subspace: one atom of
// each species, each in an upper or lower momentum mode.
//
// Basis order is fixed everywhere in the project as
//   0: (A up, B up)   1: (A up, B down)   2: (A down, B up)   3: (A down, B down)
// where "up" is the +p_z mode of the pair (nwarrow for A, nearrow for B).
namespace bellsim::oracle {

using complex = std::complex<double>;

enum class Mode : int { up = 0, down = 1 };

inline constexpr int joint_index(Mode a, Mode b) {
  return 2 * static_cast<int>(a) + static_cast<int>(b);
}

struct ModeState {
  std::array<complex, 4> amplitudes{};

  double norm_squared() const;
  ModeState normalized() const;
};

struct PulseSetting {
  double theta = 0.0;  // pulse area
  double phi = 0.0;    // laser phase
  Species target = Species::A;

  // Wraps theta and phi into [0, 2pi).
  static PulseSetting make(Species target, double theta, double phi);
};

using JointProbabilities = std::array<double, 4>;

struct BellResult {
  JointProbabilities joint_probabilities{};
  std::array<double, 4> g2{};
  double correlator = 0.0;
  double theta_a = 0.0, theta_b = 0.0, phi_a = 0.0, phi_b = 0.0;
};

// (|A up>|B up> + |A down>|B down>) / sqrt 2
ModeState bell_state();

// The 2x2 Bragg unitary
//   |up>   -> cos(theta/2)|up> - i e^{ i phi} sin(theta/2)|down>
//   |down> -> -i e^{-i phi} sin(theta/2)|up> + cos(theta/2)|down>
// acting on the target species' index.
ModeState apply_pulse(const ModeState& state, const PulseSetting& setting);

JointProbabilities joint_probabilities(const ModeState& state);

// E = P(uu) + P(dd) - P(ud) - P(du).
double correlator(const ModeState& state);
double correlator(const JointProbabilities& p);

// g2_ab = P_ab / (P_a^A P_b^B), the single-direction form of the normalised
// second-order correlation.
std::array<double, 4> g2_from_probabilities(const JointProbabilities& p);

// Bell state followed by mixing pulses on both species.
BellResult evaluate(double theta_a, double theta_b, double phi_a, double phi_b);
// Bell state, pi mirrors on both species, then mixing pulses.
BellResult evaluate_with_mirror(double theta_a, double theta_b, double phi_a, double phi_b);

// (1 - cos(phi_a + phi_b))/2 cos(theta_a - theta_b) + (1 + cos(phi_a + phi_b))/2 cos(theta_a + theta_b)
double closed_form_correlator(double theta_a, double theta_b, double phi_a, double phi_b);

struct ChshSettings {
  PulseSetting a, a_prime, b, b_prime;
};

// S = E(a,b) - E(a,b') + E(a',b) + E(a',b'), each E from the Bell state.
double chsh(const ChshSettings& settings);

// Pulse area pi/2 on both species, phase sums pi/4, 3pi/4, 7pi/4, 9pi/4.
ChshSettings optimal_phase_settings();
// phi = 0, area sums pi/4, 3pi/4, 7pi/4, 9pi/4.
ChshSettings optimal_theta_settings();

}  // namespace bellsim::oracle
