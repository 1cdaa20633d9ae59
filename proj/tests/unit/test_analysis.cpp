#include <doctest.h>

#include <cmath>
#include <random>

#include "bellsim/errors.hpp"
#include "bellsim/halo_analysis.hpp"
#include "bellsim/mode_oracle.hpp"
#include "helpers.hpp"

using namespace bellsim;

namespace {

RunConfig grid25() { return parse_config(testing::small_config_text(25, 8)); }

double lobe(double px, double pz, const ModeRegion& r, double sigma) {
  const double dx = px - r.center_x, dz = pz - r.center_z;
  return std::exp(-(dx * dx + dz * dz) / (4 * sigma * sigma));
}

// Momentum-space field with one Gaussian lobe per mode, weighted by the
// oracle's four joint amplitudes.
WaveFunction4D four_lobe_state(const RunConfig& c, const std::array<ModeRegion, 4>& regions,
                               const oracle::ModeState& modes, double sigma) {
  WaveFunction4D phi(c.grid, {c.params(Species::A).mass, c.params(Species::B).mass}, 0.0, Domain::momentum);
  const std::size_t n = phi.extent();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
          const double ax = phi.momentum_at(i), az = phi.momentum_at(j);
          const double bx = phi.momentum_at(k), bz = phi.momentum_at(l);
          cplx v = 0;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              v += modes.amplitudes[2 * a + b] * lobe(ax, az, regions[a], sigma) * lobe(bx, bz, regions[2 + b], sigma);
          phi(i, j, k, l) = v;
        }
  normalize(phi);
  return phi;
}

}  // namespace

TEST_CASE("mode regions sit on both halos at pz = +-p_k/2") {
  const auto c = grid25();
  const auto geo = c.geometry();
  const auto r = default_mode_regions(geo, c.grid, 0.1);
  const double pk = geo.p_k;
  for (const auto& m : r) {
    const double center = m.species == Species::A ? geo.halo_center_A : pk - geo.halo_center_A;
    CHECK(std::abs(m.center_z) == doctest::Approx(0.5 * pk));
    // Upper modes lie on the halo around +center, lower ones on the mirror halo.
    const double cz = m.center_z > 0 ? center : -center;
    CHECK(std::hypot(m.center_x, m.center_z - cz) == doctest::Approx(geo.halo_radius).epsilon(1e-12));
  }
  // Back-to-back partners carry opposite transverse momenta.
  CHECK(r[kAUp].center_x == doctest::Approx(-r[kBUp].center_x));
  CHECK(r[0].radius >= c.grid.momentum_step() / std::sqrt(2.0));
  CHECK_THROWS_AS(default_mode_regions(geo, c.grid, 1.2), GeometryError);
  CHECK_THROWS_AS(default_mode_regions(geo, c.grid, 0.0), GeometryError);
  const auto coarse = parse_config(testing::small_config_text(17, 16));
  CHECK_THROWS_AS(default_mode_regions(coarse.geometry(), coarse.grid, 0.1), GeometryError);
}

TEST_CASE("region estimator reproduces the oracle correlator") {
  const auto c = grid25();
  const auto regions = default_mode_regions(c.geometry(), c.grid, 0.1);
  const double sigma = 0.3 * regions[0].radius;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> angle(0, 2 * M_PI);
  for (int t = 0; t < 6; ++t) {
    const double ta = angle(rng), tb = angle(rng), pa = angle(rng), pb = angle(rng);
    auto modes = oracle::apply_pulse(oracle::bell_state(), oracle::PulseSetting::make(Species::A, ta, pa));
    modes = oracle::apply_pulse(modes, oracle::PulseSetting::make(Species::B, tb, pb));
    const auto phi = four_lobe_state(c, regions, modes, sigma);
    const double expected = oracle::evaluate(ta, tb, pa, pb).correlator;
    const auto table = joint_weights(phi, regions);
    CHECK(correlator_from_table(table) == doctest::Approx(expected).epsilon(1e-4));
    const auto w = table.normalized();
    const auto p = oracle::joint_probabilities(modes);
    for (int i = 0; i < 4; ++i) CHECK(w[i] == doctest::Approx(p[i]).epsilon(1e-4));
    // Position-space input gives the same table.
    const auto psi = to_position_space(phi);
    CHECK(correlator_from_table(joint_weights(psi, regions)) == doctest::Approx(correlator_from_table(table)).epsilon(1e-12));
  }
}

TEST_CASE("empty mode regions are an analysis error") {
  const auto c = grid25();
  const auto regions = default_mode_regions(c.geometry(), c.grid, 0.1);
  WaveFunction4D phi(c.grid, {1, 1}, 0, Domain::momentum);
  phi(0, 0, 0, 0) = 1;
  CHECK_THROWS_AS(joint_weights(phi, regions), AnalysisError);
}

TEST_CASE("CHSH from oracle tables reaches 2 sqrt 2") {
  const auto s = oracle::optimal_theta_settings();
  const std::array<std::pair<oracle::PulseSetting, oracle::PulseSetting>, 4> runs{
      {{s.a, s.b}, {s.a, s.b_prime}, {s.a_prime, s.b}, {s.a_prime, s.b_prime}}};
  std::array<CorrelationTable, 4> tables;
  for (int i = 0; i < 4; ++i) {
    const auto r = oracle::evaluate(runs[i].first.theta, runs[i].second.theta, runs[i].first.phi, runs[i].second.phi);
    for (int j = 0; j < 4; ++j) tables[i].raw[j] = 3.0 * r.joint_probabilities[j];
  }
  CHECK(std::abs(chsh_from_runs(tables)) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("joint slice of a product state factorises") {
  const auto c = grid25();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::array<std::vector<cplx>, 4> f;
  for (auto& v : f) {
    v.resize(25);
    for (auto& x : v) x = {g(rng), g(rng)};
  }
  auto phi = product_state(c.grid, {1, 1}, f);
  phi.set_domain(Domain::momentum);
  const double dp = c.grid.momentum_step();
  const auto s = slice_joint_density(phi, {2 * dp, -3 * dp, 0});
  const std::size_t n = s.n;
  double worst = 0;
  for (std::size_t i = 0; i < n; i += 3)
    for (std::size_t j = 0; j < n; j += 2)
      for (std::size_t k = 1; k < n; k += 5)
        for (std::size_t l = 1; l < n; l += 4) {
          const double lhs = s.at(i, j) * s.at(k, l), rhs = s.at(i, l) * s.at(k, j);
          worst = std::max(worst, std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + 1e-300));
        }
  CHECK(worst < 1e-8);
  CHECK(s.total() <= 1.0 + 1e-12);
  CHECK_THROWS_AS(slice_joint_density(to_position_space(phi), {0, 0, 0}), AnalysisError);
  CHECK_THROWS_AS(slice_joint_density(phi, {100 * dp, 0, 0.1 * dp}), AnalysisError);
}

TEST_CASE("ring fit recovers a synthetic halo") {
  Field2D f;
  f.n = 101;
  f.step = 0.02;
  f.values.assign(f.n * f.n, 0.0);
  const double cx = 0.0, cz = 0.43, r = 0.43;
  for (std::size_t i = 0; i < f.n; ++i)
    for (std::size_t j = 0; j < f.n; ++j) {
      const double d = std::hypot(f.coordinate(i) - cx, f.coordinate(j) - cz) - r;
      f.at(i, j) = std::exp(-d * d / (2 * 0.02 * 0.02));
    }
  const auto fit = fit_ring(f, [](double, double) { return true; }, 0.1);
  CHECK(fit.center_x == doctest::Approx(cx).epsilon(1e-3));
  CHECK(fit.center_z == doctest::Approx(cz).epsilon(1e-3));
  CHECK(fit.radius == doctest::Approx(r).epsilon(5e-3));
  CHECK_THROWS_AS(fit_ring(f, [](double, double) { return false; }), AnalysisError);
}

TEST_CASE("visibility fit is exact on a scaled cosine and skips failures") {
  std::vector<double> sums, es;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double s = (i + j) * M_PI / 4;
      sums.push_back(s);
      es.push_back(0.9 * std::cos(s));
    }
  sums.push_back(0.0);
  es.push_back(std::nan(""));
  const auto fit = fit_visibility(sums, es);
  CHECK(fit.visibility == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(fit.rms < 1e-14);
  CHECK(fit.points == 25);
  CHECK_THROWS_AS(fit_visibility({0.0}, {1.0, 2.0}), AnalysisError);
}
