#include <doctest.h>

#include <cmath>
#include <random>

#include "bellsim/mode_oracle.hpp"

using namespace bellsim;
using namespace bellsim::oracle;

namespace {

// Explicit 4x4 construction: (U_A kron U_B) |psi>, built independently of apply_pulse.
std::array<complex, 4> kron_apply(const std::array<complex, 4>& v, double ta, double pa, double tb, double pb) {
  auto u = [](double t, double p) {
    const complex i(0, 1);
    return std::array<complex, 4>{std::cos(t / 2), -i * std::exp(-i * p) * std::sin(t / 2),
                                  -i * std::exp(i * p) * std::sin(t / 2), std::cos(t / 2)};
  };
  // u[r*2+c]: row = output mode, column = input mode (0 up, 1 down).
  const auto a = u(ta, pa), b = u(tb, pb);
  std::array<complex, 4> out{};
  for (int ra = 0; ra < 2; ++ra)
    for (int rb = 0; rb < 2; ++rb)
      for (int ca = 0; ca < 2; ++ca)
        for (int cb = 0; cb < 2; ++cb) out[2 * ra + rb] += a[2 * ra + ca] * b[2 * rb + cb] * v[2 * ca + cb];
  return out;
}

}  // namespace

TEST_CASE("Bell state is normalised with equal uu and dd amplitudes") {
  const auto s = bell_state();
  CHECK(s.norm_squared() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(s.amplitudes[0] - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(s.amplitudes[3] - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(correlator(s) == doctest::Approx(1.0));
}

TEST_CASE("apply_pulse matches an explicit Kronecker product") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0, 2 * M_PI);
  for (int t = 0; t < 200; ++t) {
    const double ta = angle(rng), pa = angle(rng), tb = angle(rng), pb = angle(rng);
    auto s = apply_pulse(bell_state(), PulseSetting::make(Species::A, ta, pa));
    s = apply_pulse(s, PulseSetting::make(Species::B, tb, pb));
    const auto ref = kron_apply(bell_state().amplitudes, ta, pa, tb, pb);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(s.amplitudes[i] - ref[i]) < 1e-13);
  }
}

TEST_CASE("pi pulse is a mirror and 2pi returns the state up to sign") {
  ModeState up{{1, 0, 0, 0}};
  const auto m = apply_pulse(up, PulseSetting::make(Species::A, M_PI, 0));
  CHECK(std::norm(m.amplitudes[joint_index(Mode::down, Mode::up)]) == doctest::Approx(1.0));
  const auto h = apply_pulse(up, PulseSetting::make(Species::B, M_PI / 2, 0));
  CHECK(std::norm(h.amplitudes[0]) == doctest::Approx(0.5));
  CHECK(std::norm(h.amplitudes[1]) == doctest::Approx(0.5));
}

TEST_CASE("evaluate reproduces the closed form and cos(theta sum) at zero phase") {
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) {
      const double ta = i * M_PI / 6, tb = j * M_PI / 6;
      CHECK(std::abs(evaluate(ta, tb, 0, 0).correlator - std::cos(ta + tb)) < 1e-12);
      CHECK(std::abs(closed_form_correlator(ta, tb, 0.3, 1.1) - evaluate(ta, tb, 0.3, 1.1).correlator) < 1e-12);
    }
}

TEST_CASE("mirrors leave the correlator unchanged") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(0, 2 * M_PI);
  for (int t = 0; t < 100; ++t) {
    const double ta = angle(rng), tb = angle(rng), pa = angle(rng), pb = angle(rng);
    CHECK(evaluate_with_mirror(ta, tb, pa, pb).correlator ==
          doctest::Approx(evaluate(ta, tb, pa, pb).correlator).epsilon(1e-12));
  }
}

TEST_CASE("probabilities, g2 and correlator are consistent") {
  const auto r = evaluate(0.7, 1.9, 0.2, 2.5);
  double sum = 0;
  for (double p : r.joint_probabilities) {
    CHECK(p >= 0.0);
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  const auto& p = r.joint_probabilities;
  CHECK(r.correlator == doctest::Approx(p[0] + p[3] - p[1] - p[2]));
  const double pa_up = p[0] + p[1], pb_up = p[0] + p[2];
  CHECK(r.g2[0] == doctest::Approx(p[0] / (pa_up * pb_up)));
}

TEST_CASE("optimal settings reach the Tsirelson bound") {
  CHECK(std::abs(std::abs(chsh(optimal_phase_settings())) - 2 * std::sqrt(2.0)) < 1e-10);
  CHECK(std::abs(std::abs(chsh(optimal_theta_settings())) - 2 * std::sqrt(2.0)) < 1e-10);
}

TEST_CASE("PulseSetting wraps angles") {
  const auto s = PulseSetting::make(Species::A, 2 * M_PI + 0.5, -0.5);
  CHECK(s.theta == doctest::Approx(0.5));
  CHECK(s.phi == doctest::Approx(2 * M_PI - 0.5));
}
