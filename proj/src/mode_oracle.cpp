#include "bellsim/mode_oracle.hpp"

#include <cmath>

namespace bellsim::oracle {

namespace {

constexpr double two_pi = 2.0 * constants::pi;

double wrap_angle(double x) {
  double r = std::fmod(x, two_pi);
  if (r < 0.0) r += two_pi;
  return r;
}

}  // namespace

double ModeState::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return s;
}

ModeState ModeState::normalized() const {
  const double n = std::sqrt(norm_squared());
  ModeState out = *this;
  for (auto& a : out.amplitudes) a /= n;
  return out;
}

PulseSetting PulseSetting::make(Species target, double theta, double phi) {
  return PulseSetting{wrap_angle(theta), wrap_angle(phi), target};
}

ModeState bell_state() {
  const double h = 1.0 / std::sqrt(2.0);
  ModeState s;
  s.amplitudes = {complex(h, 0.0), complex(0.0, 0.0), complex(0.0, 0.0), complex(h, 0.0)};
  return s;
}

ModeState apply_pulse(const ModeState& state, const PulseSetting& setting) {
  const double c = std::cos(0.5 * setting.theta);
  const double s = std::sin(0.5 * setting.theta);
  const complex minus_i(0.0, -1.0);
  // U = [[c, -i e^{-i phi} s], [-i e^{i phi} s, c]] in (up, down).
  const complex u00 = c;
  const complex u01 = minus_i * std::polar(s, -setting.phi);
  const complex u10 = minus_i * std::polar(s, setting.phi);
  const complex u11 = c;

  ModeState out;
  const auto& in = state.amplitudes;
  if (setting.target == Species::A) {
    for (int b = 0; b < 2; ++b) {
      const complex up = in[b], down = in[2 + b];
      out.amplitudes[b] = u00 * up + u01 * down;
      out.amplitudes[2 + b] = u10 * up + u11 * down;
    }
  } else {
    for (int a = 0; a < 2; ++a) {
      const complex up = in[2 * a], down = in[2 * a + 1];
      out.amplitudes[2 * a] = u00 * up + u01 * down;
      out.amplitudes[2 * a + 1] = u10 * up + u11 * down;
    }
  }
  return out;
}

JointProbabilities joint_probabilities(const ModeState& state) {
  JointProbabilities p{};
  for (int i = 0; i < 4; ++i) p[i] = std::norm(state.amplitudes[i]);
  return p;
}

double correlator(const JointProbabilities& p) { return p[0] + p[3] - p[1] - p[2]; }

double correlator(const ModeState& state) { return correlator(joint_probabilities(state)); }

std::array<double, 4> g2_from_probabilities(const JointProbabilities& p) {
  const double a_up = p[0] + p[1], a_down = p[2] + p[3];
  const double b_up = p[0] + p[2], b_down = p[1] + p[3];
  const std::array<double, 4> denom{a_up * b_up, a_up * b_down, a_down * b_up, a_down * b_down};
  std::array<double, 4> g{};
  for (int i = 0; i < 4; ++i) g[i] = denom[i] > 0.0 ? p[i] / denom[i] : 0.0;
  return g;
}

namespace {

BellResult finish(const ModeState& s, double ta, double tb, double pa, double pb) {
  BellResult r;
  r.joint_probabilities = joint_probabilities(s);
  r.g2 = g2_from_probabilities(r.joint_probabilities);
  r.correlator = correlator(r.joint_probabilities);
  r.theta_a = ta;
  r.theta_b = tb;
  r.phi_a = pa;
  r.phi_b = pb;
  return r;
}

}  // namespace

BellResult evaluate(double theta_a, double theta_b, double phi_a, double phi_b) {
  ModeState s = bell_state();
  s = apply_pulse(s, PulseSetting{theta_a, phi_a, Species::A});
  s = apply_pulse(s, PulseSetting{theta_b, phi_b, Species::B});
  return finish(s, theta_a, theta_b, phi_a, phi_b);
}

BellResult evaluate_with_mirror(double theta_a, double theta_b, double phi_a, double phi_b) {
  ModeState s = bell_state();
  s = apply_pulse(s, PulseSetting{constants::pi, 0.0, Species::A});
  s = apply_pulse(s, PulseSetting{constants::pi, 0.0, Species::B});
  s = apply_pulse(s, PulseSetting{theta_a, phi_a, Species::A});
  s = apply_pulse(s, PulseSetting{theta_b, phi_b, Species::B});
  return finish(s, theta_a, theta_b, phi_a, phi_b);
}

double closed_form_correlator(double theta_a, double theta_b, double phi_a, double phi_b) {
  const double c = std::cos(phi_a + phi_b);
  return 0.5 * (1.0 - c) * std::cos(theta_a - theta_b) + 0.5 * (1.0 + c) * std::cos(theta_a + theta_b);
}

double chsh(const ChshSettings& s) {
  auto e = [](const PulseSetting& a, const PulseSetting& b) {
    return evaluate(a.theta, b.theta, a.phi, b.phi).correlator;
  };
  return e(s.a, s.b) - e(s.a, s.b_prime) + e(s.a_prime, s.b) + e(s.a_prime, s.b_prime);
}

ChshSettings optimal_phase_settings() {
  const double h = constants::pi / 2.0;
  const double q = constants::pi / 4.0;
  // phi_a = 0, phi_b = pi/4, phi_b' = 3pi/4, phi_a' = 3pi/2.
  return ChshSettings{PulseSetting::make(Species::A, h, 0.0), PulseSetting::make(Species::A, h, 6.0 * q),
                      PulseSetting::make(Species::B, h, q), PulseSetting::make(Species::B, h, 3.0 * q)};
}

ChshSettings optimal_theta_settings() {
  const double q = constants::pi / 4.0;
  return ChshSettings{PulseSetting::make(Species::A, 0.0, 0.0), PulseSetting::make(Species::A, 6.0 * q, 0.0),
                      PulseSetting::make(Species::B, q, 0.0), PulseSetting::make(Species::B, 3.0 * q, 0.0)};
}

}  // namespace bellsim::oracle
