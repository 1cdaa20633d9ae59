#include <doctest.h>

#include <cmath>
#include <random>

#include "bellsim/axis_propagator.hpp"
#include "bellsim/errors.hpp"
#include "bellsim/fft.hpp"
#include "bellsim/propagator.hpp"
#include "bellsim/pulse.hpp"
#include "helpers.hpp"

using namespace bellsim;

namespace {

const std::array<double, 2> kMasses{constants::mass_he3, constants::mass_he4};

RunConfig small() { return parse_config(testing::small_config_text(17, 4)); }

std::vector<cplx> gaussian(const GridSpec& g, double x0, double sigma, double k0) {
  std::vector<cplx> f(g.points_per_dim());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = g.coordinate(i) - x0;
    f[i] = std::exp(-x * x / (4 * sigma * sigma)) * std::exp(cplx(0, k0 * x));
  }
  return f;
}

std::vector<PotentialField> all_potentials(const RunConfig& c) {
  const double k = c.lattice_momentum / constants::hbar;
  const double depth = 20 * constants::hbar / 1e-5;
  std::vector<PotentialField> v;
  v.push_back(harmonic_trap(kMasses, c.trap_frequency));
  v.push_back(bragg_potential(Species::A, square_envelope(depth, 0, 1), k, 1e5, 0.3, 0));
  v.push_back(bragg_potential(Species::B, gaussian_envelope(depth, 0, 2e-6), k, -2e5, 1.1, 0));
  v.push_back(interaction_potential(1e-30, 2 * c.grid.spatial_step()));
  return v;
}

}  // namespace

TEST_CASE("FFT matches a direct DFT") {
  const std::size_t n = 7;
  ComplexBuffer data(n * n);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (auto& c : data) c = {g(rng), g(rng)};
  const ComplexBuffer input = data;
  fft::Transform t(2, n);
  t.forward(data.data());
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      cplx s = 0;
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
          s += input[x * n + y] * std::polar(1.0, -2 * M_PI * double(p * x + q * y) / double(n));
      CHECK(std::abs(data[p * n + q] - s) < 1e-12);
    }
  t.backward(data.data());
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(std::abs(data[i] / double(n * n) - input[i]) < 1e-14);
}

TEST_CASE("momentum transform is unitary and invertible") {
  const auto c = small();
  const auto psi = testing::random_field(c.grid, 11);
  const auto phi = to_momentum_space(psi);
  CHECK(phi.domain() == Domain::momentum);
  CHECK(norm(phi) == doctest::Approx(1.0).epsilon(1e-13));
  const auto back = to_position_space(phi);
  double err = 0;
  for (std::size_t i = 0; i < psi.size(); ++i) err = std::max(err, std::abs(back.data()[i] - psi.data()[i]));
  CHECK(err < 1e-14);
}

TEST_CASE("norm reduction does not depend on the worker count") {
  const auto psi = testing::random_field(small().grid, 2);
  CHECK(norm(psi, 1) == norm(psi, 3));
}

TEST_CASE("Strang steps conserve the norm with every potential switched on") {
  const auto c = small();
  auto psi = testing::random_field(c.grid, 9);
  SplitStepPropagator prop(c.grid, kMasses, c.units());
  prop.evolve(psi, all_potentials(c), 50 * c.grid.time_step(), c.grid.time_step());
  CHECK(std::abs(norm(psi) - 1.0) < 1e-12);
  CHECK(psi.time() == doctest::Approx(50 * c.grid.time_step()));
}

TEST_CASE("a negative step undoes a positive one") {
  const auto c = small();
  const auto start = testing::random_field(c.grid, 4);
  auto psi = start;
  SplitStepPropagator prop(c.grid, kMasses, c.units());
  const auto pots = all_potentials(c);
  prop.step(psi, pots, c.grid.time_step());
  prop.step(psi, pots, -c.grid.time_step());
  CHECK(fidelity(psi, start) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("multithreaded stepping is bit-identical to one worker") {
  const auto c = small();
  auto a = testing::random_field(c.grid, 8);
  auto b = a;
  SplitStepPropagator p1(c.grid, kMasses, c.units(), 1), p3(c.grid, kMasses, c.units(), 3);
  const auto pots = all_potentials(c);
  for (int i = 0; i < 3; ++i) {
    p1.step(a, pots, c.grid.time_step());
    p3.step(b, pots, c.grid.time_step());
  }
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i) same = same && a.data()[i] == b.data()[i];
  CHECK(same);
}

TEST_CASE("free flight moves a Gaussian at p/m and spreads it as the closed form") {
  const auto c = small();
  // A wider box than the other tests so the tails stay far from the edge.
  const GridSpec g(33, c.grid.spatial_step(), c.grid.time_step());
  const double sigma = 2.0 * g.spatial_step();
  const double k0 = 2 * M_PI / g.box_length() * 2;  // exactly on the momentum grid
  const std::array<std::vector<cplx>, 4> f{gaussian(g, 0, sigma, 0), gaussian(g, 0, sigma, k0),
                                           gaussian(g, 0, sigma, 0), gaussian(g, 0, sigma, 0)};
  auto psi = product_state(g, kMasses, f);
  SplitStepPropagator prop(g, kMasses, c.units());
  const double t = 2e-6;
  prop.free_evolve(psi, t);
  // Density moments along z3 (axis 1).
  const std::size_t n = g.points_per_dim();
  double m0 = 0, m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
          const double w = std::norm(psi(i, j, k, l));
          const double z = g.coordinate(j);
          m0 += w;
          m1 += w * z;
          m2 += w * z * z;
        }
  const double mean = m1 / m0;
  const double width = std::sqrt(m2 / m0 - mean * mean);
  const double v = constants::hbar * k0 / kMasses[0];
  const double tau = 2 * kMasses[0] * sigma * sigma / constants::hbar;
  CHECK(mean == doctest::Approx(v * t).epsilon(1e-9));
  CHECK(width == doctest::Approx(sigma * std::sqrt(1 + (t / tau) * (t / tau))).epsilon(1e-9));
}

TEST_CASE("free_evolve equals many kinetic-only steps") {
  const auto c = small();
  auto a = testing::random_field(c.grid, 6);
  auto b = a;
  SplitStepPropagator prop(c.grid, kMasses, c.units());
  prop.free_evolve(a, 10 * c.grid.time_step());
  prop.evolve(b, {}, 10 * c.grid.time_step(), c.grid.time_step());
  CHECK(fidelity(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ground state is close to stationary in its trap") {
  const auto c = parse_config(testing::small_config_text(25, 8), {{"species_a.trap_frequency_rad_per_s", "67500"},
                                                                   {"species_b.trap_frequency_rad_per_s", "51750"}});
  auto psi = ground_state(c.grid, c.trap_frequency, kMasses);
  const auto start = psi;
  SplitStepPropagator prop(c.grid, kMasses, c.units());
  prop.evolve(psi, {harmonic_trap(kMasses, c.trap_frequency)}, 20 * c.grid.time_step(), c.grid.time_step());
  CHECK(fidelity(psi, start) > 1 - 1e-5);
  CHECK_THROWS_AS(ground_state(c.grid, {10.0, 10.0}, kMasses), ResolutionError);
}

TEST_CASE("potential fields evaluate their terms") {
  const auto trap = harmonic_trap(kMasses, {100.0, 200.0});
  const std::array<double, 4> r{1e-6, 2e-6, 3e-6, 4e-6};
  const double expected = 0.5 * kMasses[0] * 1e4 * (1e-12 + 4e-12) + 0.5 * kMasses[1] * 4e4 * (9e-12 + 16e-12);
  CHECK(trap.evaluate(r, 0) == doctest::Approx(expected).epsilon(1e-14));
  const auto inter = interaction_potential(2.0, 1e-6);
  CHECK(inter.has_pair_term());
  CHECK(inter.evaluate({0, 0, 1e-6, 0}, 0) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("momentum density marginal sums to the norm") {
  const auto psi = testing::random_field(small().grid, 12);
  CHECK(momentum_density(psi, Species::A).total() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(momentum_density(psi, Species::B).total() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("axis propagator agrees with the 4D split-step propagator") {
  const auto c = small();
  const double k = c.lattice_momentum / constants::hbar;
  const double dt = c.grid.time_step();
  std::vector<PotentialField> pots{harmonic_trap(kMasses, c.trap_frequency),
                                   bragg_potential(Species::A, gaussian_envelope(5e-30, 0, 4e-6), k, 3e5, 0.4, 0),
                                   bragg_potential(Species::B, square_envelope(4e-30, 0, 4e-6), k, -1e5, 0.0, 0)};
  auto a = testing::random_field(c.grid, 21);
  auto b = a;
  SplitStepPropagator prop(c.grid, kMasses, c.units());
  prop.evolve(a, pots, 20 * dt, dt);
  prop.free_evolve(a, 3e-6);

  AxisPropagator axis(c.grid, kMasses, c.units());
  axis.record(pots, 0.0, 20 * dt, dt);
  axis.record_free(3e-6);
  axis.apply(b);
  CHECK(b.time() == doctest::Approx(a.time()));
  double err = 0;
  for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a.data()[i] - b.data()[i]));
  CHECK(err < 1e-12);

  AxisPropagator bad(c.grid, kMasses, c.units());
  CHECK_THROWS(bad.record({interaction_potential(1e-30, 1e-7)}, 0, dt, dt));
}

TEST_CASE("pulse depth follows the requested area") {
  const auto c = small();
  PulseSpec p;
  p.target = Species::B;
  p.theta = M_PI;
  p.envelope = Envelope::square;
  p.duration = 1e-5;
  p.lattice_wavevector = c.lattice_momentum / constants::hbar;
  CHECK(p.unit_area() == doctest::Approx(1e-5));
  CHECK(p.peak_rabi_frequency() * p.duration == doctest::Approx(M_PI));
  p.envelope = Envelope::gaussian;
  // Gaussian truncated at +-3 sigma with sigma = duration/6.
  const double sigma = p.duration / 6;
  CHECK(p.unit_area() == doctest::Approx(sigma * std::sqrt(2 * M_PI) * std::erf(3 / std::sqrt(2.0))).epsilon(1e-6));
  p.duration = -1;
  CHECK_THROWS(p.validate());
}
