// Acceptance run: one PASS/FAIL line per criterion. Criteria 7-9 share one
// desk-scale prefix computed from configs/desk.ini.
#include <CLI11.hpp>
#include <boost/math/tools/minima.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "bellsim/errors.hpp"
#include "bellsim/fft.hpp"
#include "bellsim/halo_analysis.hpp"
#include "bellsim/mode_oracle.hpp"
#include "bellsim/propagator.hpp"
#include "bellsim/pulse_sequence.hpp"
#include "bellsim/snapshot.hpp"

using namespace bellsim;

namespace {

struct Outcome {
  enum Status { pass, fail, not_run } status = fail;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig desk(const std::filesystem::path& path, std::map<std::string, std::string> overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream s;
  s << in.rdbuf();
  return parse_config(s.str(), overrides);
}

std::array<double, 2> masses_of(const RunConfig& c) {
  return {c.params(Species::A).mass, c.params(Species::B).mass};
}

// ---------------------------------------------------------------- 1, 2

Outcome oracle_chsh() {
  using namespace oracle;
  // theta = pi/2 on both sides, phases a = 0, a' = 3pi/2, b = pi/4, b' = 3pi/4.
  ChshSettings s{PulseSetting::make(Species::A, M_PI / 2, 0), PulseSetting::make(Species::A, M_PI / 2, 1.5 * M_PI),
                 PulseSetting::make(Species::B, M_PI / 2, M_PI / 4),
                 PulseSetting::make(Species::B, M_PI / 2, 0.75 * M_PI)};
  const double s_opt = chsh(s);
  const double dev = std::abs(std::abs(s_opt) - 2 * std::sqrt(2.0));
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 2 * M_PI);
  double worst = 0;
  for (int i = 0; i < 100000; ++i) {
    ChshSettings r{PulseSetting::make(Species::A, u(rng), u(rng)), PulseSetting::make(Species::A, u(rng), u(rng)),
                   PulseSetting::make(Species::B, u(rng), u(rng)), PulseSetting::make(Species::B, u(rng), u(rng))};
    worst = std::max(worst, std::abs(chsh(r)));
  }
  const bool ok = dev < 1e-10 && worst <= 2 * std::sqrt(2.0) + 1e-12;
  return {ok ? Outcome::pass : Outcome::fail,
          fmt("S = %.12f (|S| - 2sqrt2 = %.1e); max |S| over 1e5 random settings %.12f", s_opt, dev, worst)};
}

Outcome oracle_surface() {
  double worst_closed = 0, worst_phi0 = 0;
  const int m = 10;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          const double ta = 2 * M_PI * i / m, tb = 2 * M_PI * j / m, pa = 2 * M_PI * k / m, pb = 2 * M_PI * l / m;
          const double e = oracle::evaluate(ta, tb, pa, pb).correlator;
          worst_closed = std::max(worst_closed, std::abs(e - oracle::closed_form_correlator(ta, tb, pa, pb)));
          if (k == 0 && l == 0) worst_phi0 = std::max(worst_phi0, std::abs(e - std::cos(ta + tb)));
        }
  const bool ok = worst_closed < 1e-12 && worst_phi0 < 1e-12;
  return {ok ? Outcome::pass : Outcome::fail,
          fmt("max |E - closed form| = %.1e on 10^4 settings; max |E - cos(theta sum)| at phi=0 = %.1e", worst_closed,
              worst_phi0)};
}

// ---------------------------------------------------------------- 3

Outcome unitarity(const std::filesystem::path& config_path) {
  const auto c = desk(config_path, {{"grid.points_per_dim", "41"},
                                    {"grid.lattice_periods_per_box", "16"},
                                    {"grid.time_step_s", "1e-7"}});
  const auto cal = calibrate_pulses(c);
  auto psi = prepare_initial_state(c);
  split_B(psi, c, cal);
  std::vector<PotentialField> pots{harmonic_trap(masses_of(c), c.trap_frequency),
                                   halo_pulse(c, Species::A, {M_PI, 0}, 0.0, cal).potential(),
                                   halo_pulse(c, Species::B, {M_PI, 0}, 0.0, cal).potential(),
                                   interaction_potential(1.75e-28, c.effective_interaction_width())};
  // 41 is prime, so FFTW's measured plans are markedly faster than estimated ones here.
  const auto rigor = fft::default_rigor();
  fft::set_default_rigor(fft::PlanRigor::measure);
  SplitStepPropagator prop(c.grid, masses_of(c), c.units());
  fft::set_default_rigor(rigor);
  const auto t0 = std::chrono::steady_clock::now();
  for (int s = 0; s < 1000; ++s) prop.step(psi, pots, c.grid.time_step());
  const double per_step = seconds_since(t0) / 1000;
  const double dev = std::abs(norm(psi) - 1.0);
  return {dev < 1e-9 ? Outcome::pass : Outcome::fail,
          fmt("41^4 grid, 1000 steps of 0.1 us with trap, two Bragg lattices and interaction: |norm - 1| = %.2e "
              "(%.3f s per step)",
              dev, per_step)};
}

// ---------------------------------------------------------------- 4

Outcome dispersion() {
  // A grid wide enough to hold the spread packet; the lattice plays no role.
  const std::size_t n = 41;
  const GridSpec g(n, 2e-6, 1e-6);
  const std::array<double, 2> m{constants::mass_he3, constants::mass_he4};
  const double sigma0 = 4e-6;
  std::array<std::vector<cplx>, 4> f;
  for (auto& v : f) {
    v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = g.coordinate(i);
      v[i] = std::exp(-x * x / (4 * sigma0 * sigma0));
    }
  }
  auto psi = product_state(g, m, f);
  SplitStepPropagator prop(g, m, Units::from(m[1], default_lattice_momentum(SpeciesParams::helium4())));
  double worst = 0;
  for (int stage = 1; stage <= 10; ++stage) {
    prop.free_evolve(psi, 1e-4);
    const double t = psi.time();
    // Second moments of the z3 (A) and x4 (B) marginals.
    std::array<double, 2> m2{0, 0};
    double total = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t l = 0; l < n; ++l) {
            const double w = std::norm(psi(i, j, k, l));
            m2[0] += w * g.coordinate(j) * g.coordinate(j);
            m2[1] += w * g.coordinate(k) * g.coordinate(k);
            total += w;
          }
    for (int s = 0; s < 2; ++s) {
      const double tau = 2 * m[s] * sigma0 * sigma0 / constants::hbar;
      const double expected = sigma0 * std::sqrt(1 + (t / tau) * (t / tau));
      worst = std::max(worst, std::abs(std::sqrt(m2[s] / total) / expected - 1));
    }
  }
  return {worst < 1e-6 ? Outcome::pass : Outcome::fail,
          fmt("widths of both species at 0.1..1 ms vs sigma0 sqrt(1 + (t/tau)^2): max relative error %.2e", worst)};
}

// ---------------------------------------------------------------- 5

Outcome convergence(const std::filesystem::path& config_path) {
  // Traps tightened so the ground state spans four cells of the 25^4 grid.
  const auto c = desk(config_path, {{"grid.points_per_dim", "25"},
                                    {"grid.lattice_periods_per_box", "8"},
                                    {"species_a.trap_frequency_rad_per_s", "20070"},
                                    {"species_b.trap_frequency_rad_per_s", "15130"}});
  const auto cal = calibrate_pulses(c);
  RunConfig pulses = c;
  for (auto& s : pulses.species) s.pulse_duration = 20e-6;
  WaveFunction4D start = prepare_initial_state(c);
  split_B(start, c, cal);
  const std::vector<PotentialField> pots{harmonic_trap(masses_of(c), c.trap_frequency),
                                         halo_pulse(pulses, Species::A, {M_PI, 0}, 0.0, cal).potential(),
                                         halo_pulse(pulses, Species::B, {M_PI, 0}, 0.0, cal).potential(),
                                         interaction_potential(1.75e-28, c.effective_interaction_width())};
  SplitStepPropagator prop(c.grid, masses_of(c), c.units());
  const double duration = 20e-6, dt = c.grid.time_step();
  auto run = [&](double h) {
    WaveFunction4D psi = start;
    prop.evolve(psi, pots, duration, h);
    return psi;
  };
  const auto ref = run(dt / 8);
  auto error = [&](const WaveFunction4D& psi) {
    double s = 0;
    for (std::size_t i = 0; i < psi.size(); ++i) s += std::norm(psi.data()[i] - ref.data()[i]);
    return std::sqrt(s);
  };
  const double e1 = error(run(dt)), e2 = error(run(dt / 2));
  const double ratio = e1 / e2;
  return {ratio >= 3.5 && ratio <= 4.5 ? Outcome::pass : Outcome::fail,
          fmt("20 us with all potentials, error vs dt/8 reference: %.3e at the desk dt = %.2f us, %.3e at dt/2; "
              "ratio %.3f",
              e1, dt * 1e6, e2, ratio)};
}

// ---------------------------------------------------------------- 6

WaveFunction4D plane_wave(const RunConfig& c, int axis, double p) {
  const std::size_t n = c.grid.points_per_dim();
  std::array<std::vector<cplx>, 4> f;
  for (int a = 0; a < 4; ++a) {
    f[a].assign(n, cplx(1, 0));
    if (a == axis)
      for (std::size_t i = 0; i < n; ++i) f[a][i] = std::polar(1.0, p / constants::hbar * c.grid.coordinate(i));
  }
  return product_state(c.grid, masses_of(c), f);
}

double population_at(const WaveFunction4D& psi, Species s, double pz) {
  const Field2D d = momentum_density(psi, s);
  const std::size_t col = d.n / 2 + static_cast<std::size_t>(std::lround(pz / d.step));
  return d.at(d.n / 2, col);
}

Outcome bragg_calibration(const std::filesystem::path& config_path) {
  const auto c = desk(config_path, {{"grid.points_per_dim", "33"}, {"grid.lattice_periods_per_box", "8"}});
  const double pk = c.lattice_momentum;
  const auto cal = calibrate_pulses(c);
  std::ostringstream detail;
  bool ok = true;

  // Transfer vs duration at fixed lattice depth (square pulse, species A).
  const double omega = 1.4e5;  // rad/s, far below the recoil scale
  std::vector<double> times, transfer;
  for (int i = 1; i <= 16; ++i) {
    const double t = i * 1.9 * M_PI / omega / 16;
    PulseSpec p = halo_pulse(c, Species::A, {M_PI, 0}, 0.0, cal);
    p.envelope = Envelope::square;
    p.area_scale = 1.0;
    p.theta = omega * t;
    p.duration = t;
    auto psi = plane_wave(c, Axis::z3, -0.5 * pk);
    apply_bragg(psi, {p}, c);
    times.push_back(t);
    transfer.push_back(population_at(psi, Species::A, 0.5 * pk));
  }
  auto ss_res = [&](double w) {
    double s = 0;
    for (std::size_t i = 0; i < times.size(); ++i) s += std::pow(transfer[i] - std::pow(std::sin(w * times[i] / 2), 2), 2);
    return s;
  };
  const auto best = boost::math::tools::brent_find_minima(ss_res, 0.5 * omega, 1.5 * omega, 50);
  double mean = 0, ss_tot = 0;
  for (double v : transfer) mean += v / transfer.size();
  for (double v : transfer) ss_tot += (v - mean) * (v - mean);
  const double r2 = 1 - best.second / ss_tot;
  ok = ok && r2 > 0.999;
  detail << fmt("sin^2 fit R^2 = %.6f (Omega fit/set %.4f)", r2, best.first / omega);

  // Calibrated halo pulses on both species.
  for (Species s : {Species::A, Species::B}) {
    const int axis = s == Species::A ? Axis::z3 : Axis::z4;
    for (double theta : {M_PI / 2, M_PI}) {
      auto psi = plane_wave(c, axis, -0.5 * pk);
      apply_bragg(psi, {halo_pulse(c, s, {theta, 0}, 0.0, cal)}, c);
      const double moved = population_at(psi, s, 0.5 * pk);
      const bool good = theta < 3 ? std::abs(moved - 0.5) <= 0.02 : moved >= 0.96;
      ok = ok && good;
      detail << fmt("; %s theta=%s: %.4f", to_string(s), theta < 3 ? "pi/2" : "pi", moved);
    }
  }
  // Physical-mode splitting of B at rest.
  RunConfig phys = c;
  phys.state_prep = StatePrepMode::physical;
  const auto pcal = calibrate_pulses(phys);
  auto rest = plane_wave(phys, Axis::z4, 0.0);
  const auto rep = split_B(rest, phys, pcal);
  const bool split_ok = std::abs(rep.plus_weight - 0.5) <= 0.02 && std::abs(rep.minus_weight - 0.5) <= 0.02;
  ok = ok && split_ok;
  detail << fmt("; B split +p_k %.4f, -p_k %.4f, rest %.4f", rep.plus_weight, rep.minus_weight, rep.rest_fraction);
  return {ok ? Outcome::pass : Outcome::fail, detail.str()};
}

// ---------------------------------------------------------------- 7, 8, 9

struct DeskRun {
  RunConfig config;
  SequenceResult prefix;
  double prefix_seconds = 0;
  std::filesystem::path dir;
};

Outcome halo_geometry(const DeskRun& run) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& c = run.config;
  const auto geo = c.geometry();
  const double pk = geo.p_k;
  const auto collided = load_snapshot(run.prefix.stages.at(2).snapshot);
  const Field2D rho = momentum_density(collided, Species::A);
  // Upper half of the A halo, away from the unscattered atoms at rest.
  const auto fit = fit_ring(rho, [&](double px, double pz) { return pz > 0 && std::hypot(px, pz) > 0.25 * pk; }, 0.1);
  const double dc = std::abs(fit.center_z - geo.halo_center_A) / geo.halo_center_A;
  const double dr = std::abs(fit.radius - geo.halo_radius) / geo.halo_radius;

  const auto phi = to_momentum_space(collided);
  const double px = geo.mode_transverse();
  const Field2D slice = slice_joint_density(phi, {-px, px, 0});
  double w_hi = 0, s_hi = 0, w_lo = 0, s_lo = 0;
  for (std::size_t i = 0; i < slice.n; ++i)
    for (std::size_t j = 0; j < slice.n; ++j) {
      const double sum = slice.coordinate(i) + slice.coordinate(j);
      const double w = slice.at(i, j);
      (sum > 0 ? w_hi : w_lo) += w;
      (sum > 0 ? s_hi : s_lo) += w * sum;
    }
  const double ridge_hi = s_hi / w_hi, ridge_lo = s_lo / w_lo;
  const double dp = c.grid.momentum_step();
  const bool ridges = std::abs(ridge_hi - pk) <= dp && std::abs(ridge_lo + pk) <= dp;
  const double secs = run.prefix_seconds + seconds_since(t0);
  const bool ok = dc < 0.05 && dr < 0.05 && ridges && secs < 1800;
  return {ok ? Outcome::pass : Outcome::fail,
          fmt("ring centre %.4f p_k (expected %.4f, %.1f%% off), radius %.4f p_k (expected %.4f, %.1f%% off); "
              "slice ridges at pzA+pzB = %+.4f / %+.4f p_k (dp = %.4f p_k); %.0f s including the shared prefix",
              fit.center_z / pk, geo.halo_center_A / pk, 100 * dc, fit.radius / pk, geo.halo_radius / pk, 100 * dr,
              ridge_hi / pk, ridge_lo / pk, dp / pk, secs)};
}

Outcome initial_correlation(const DeskRun& run) {
  const auto& c = run.config;
  const auto regions = default_mode_regions(c.geometry(), c.grid, c.region_radius_fraction);
  auto halved = regions;
  for (auto& r : halved) r.radius *= 0.5;
  const auto post_collision = load_snapshot(run.prefix.stages.at(2).snapshot);
  const double e_collision = correlator_from_table(joint_weights(post_collision, regions));
  // The unmixed state at the mixing time: theta = 0 on both species.
  SequenceResult copy;
  copy.state = run.prefix.state;
  copy.calibration = run.prefix.calibration;
  copy.stages = run.prefix.stages;
  RunConfig unmixed = c;
  unmixed.mixing = {PulseAngles{0, 0}, PulseAngles{0, 0}};
  finish_sequence(copy, unmixed);
  const double e = correlator_from_table(joint_weights(copy.state, regions));
  const double e_half = correlator_from_table(joint_weights(copy.state, halved));
  const bool ok = e >= 0.90 && std::abs(e_half - e) < 0.02 && e_collision >= 0.90;
  return {ok ? Outcome::pass : Outcome::fail,
          fmt("unmixed E at detection = %.4f (disc %.4f p_k), %.4f with the radius halved (change %.4f); "
              "E right after the collision = %.4f",
              e, regions[0].radius / c.lattice_momentum, e_half, std::abs(e_half - e), e_collision)};
}

Outcome bell_violation(const DeskRun& run) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& c = run.config;
  const auto regions = default_mode_regions(c.geometry(), c.grid, c.region_radius_fraction);
  std::vector<double> sums, es;
  int failed = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double ta = i * M_PI / 4, tb = j * M_PI / 4;
      const auto p = evaluate_setting(run.prefix, c, {ta, tb, 0, 0}, regions);
      failed += p.ok ? 0 : 1;
      sums.push_back(ta + tb);
      es.push_back(p.correlator);
    }
  const auto fit = fit_visibility(sums, es);
  const std::array<std::pair<double, double>, 4> chsh_settings{
      {{0, M_PI / 4}, {0, 3 * M_PI / 4}, {1.5 * M_PI, M_PI / 4}, {1.5 * M_PI, 3 * M_PI / 4}}};
  std::array<CorrelationTable, 4> tables;
  for (int i = 0; i < 4; ++i) {
    const auto p = evaluate_setting(run.prefix, c, {chsh_settings[i].first, chsh_settings[i].second, 0, 0}, regions);
    failed += p.ok ? 0 : 1;
    tables[i] = p.table;
  }
  const double s = chsh_from_runs(tables);
  const double secs = run.prefix_seconds + seconds_since(t0);
  const bool ok = failed == 0 && fit.visibility >= 0.85 && fit.rms < 0.1 && std::abs(s) > 2 && secs < 4 * 3600;
  return {ok ? Outcome::pass : Outcome::fail,
          fmt("5x5 theta scan: V = %.4f, RMS residual %.4f; CHSH |S| = %.4f; %d failed points; %.0f s including the "
              "shared prefix",
              fit.visibility, fit.rms, std::abs(s), failed, secs)};
}

// ---------------------------------------------------------------- 10, 11

Outcome full_scale() {
  const double field = field_bytes(121);
  const double peak = 3 * field;
  const bool estimate_ok = field > 3.3e9 && field < 3.5e9 && std::abs(field / 4e9 - 1) < 0.2;
  if (!estimate_ok) return {Outcome::fail, fmt("estimator reports %.3f GB per field", field / 1e9)};
  return {Outcome::not_run,
          fmt("estimator reports %.2f GB per field (~4 GB expected), %.1f GB peak for a run; the 121^4 run itself was "
              "not executed on this machine",
              field / 1e9, peak / 1e9)};
}

Outcome snapshot_round_trip(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  int identical = 0;
  for (int i = 0; i < 10; ++i) {
    WaveFunction4D psi(GridSpec(21, 1e-7 * (i + 1), 2e-7), {constants::mass_he3, constants::mass_he4}, 1e-6 * i,
                       i % 2 ? Domain::momentum : Domain::position);
    for (auto& v : psi.values()) v = {g(rng), g(rng)};
    const auto file = dir / ("roundtrip_" + std::to_string(i) + ".bwf4");
    save_snapshot(psi, file);
    const auto back = load_snapshot(file);
    std::filesystem::remove(file);
    const bool same = back.extent() == psi.extent() && back.time() == psi.time() &&
                      back.domain() == psi.domain() && back.masses() == psi.masses() &&
                      back.grid().spatial_step() == psi.grid().spatial_step() &&
                      back.grid().time_step() == psi.grid().time_step() &&
                      std::memcmp(back.data(), psi.data(), psi.size() * sizeof(cplx)) == 0;
    identical += same ? 1 : 0;
  }
  return {identical == 10 ? Outcome::pass : Outcome::fail, fmt("%d of 10 random 21^4 fields bit-identical", identical)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bellsim acceptance criteria"};
  std::filesystem::path config_path = BELLSIM_DESK_CONFIG;
  std::filesystem::path work = std::filesystem::temp_directory_path() / "bellsim_acceptance";
  std::vector<int> only;
  bool resume = false;
  app.add_option("--config", config_path, "desk configuration")->check(CLI::ExistingFile);
  app.add_option("--work-dir", work, "directory for the shared desk snapshots");
  app.add_option("--only", only, "criteria to run (default all)")->delimiter(',');
  app.add_flag("--resume", resume, "reuse desk snapshots from an earlier run in --work-dir");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> wanted(only.begin(), only.end());
  auto want = [&](int n) { return wanted.empty() || wanted.count(n) != 0; };

  static const std::map<int, double> budget{{1, 1},   {2, 1},       {3, 300},  {4, 60},  {5, 600}, {6, 600},
                                            {7, 1800}, {9, 4 * 3600}, {11, 60}};
  int failures = 0;
  auto report = [&](int n, const std::function<Outcome()>& body) {
    if (!want(n)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {Outcome::fail, std::string("error: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    if (auto it = budget.find(n); it != budget.end() && n != 7 && n != 9 && secs > it->second && o.status == Outcome::pass) {
      o.status = Outcome::fail;
      o.detail += fmt(" [over the %.0f s budget]", it->second);
    }
    const char* label = o.status == Outcome::pass ? "PASS" : o.status == Outcome::fail ? "FAIL" : "NOT RUN";
    if (o.status == Outcome::fail) ++failures;
    std::printf("criterion %2d: %-7s (%7.1f s) %s\n", n, label, secs, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, oracle_chsh);
  report(2, oracle_surface);
  report(3, [&] { return unitarity(config_path); });
  report(4, dispersion);
  report(5, [&] { return convergence(config_path); });
  report(6, [&] { return bragg_calibration(config_path); });

  if (want(7) || want(8) || want(9)) {
    std::optional<DeskRun> run;
    std::string error;
    try {
      DeskRun r;
      r.config = desk(config_path);
      r.dir = work / "desk";
      if (!resume) std::filesystem::remove_all(r.dir);
      RunOptions opt;
      opt.checkpoint_dir = r.dir;
      opt.resume = resume;
      const auto t0 = std::chrono::steady_clock::now();
      r.prefix = run_prefix(r.config, opt);
      r.prefix_seconds = seconds_since(t0);
      std::printf("desk prefix: %.0f s%s, scattered fraction %.4f\n", r.prefix_seconds,
                  r.prefix.resumed ? " (resumed)" : "", r.prefix.collision.scattered_fraction);
      run = std::move(r);
    } catch (const std::exception& e) {
      error = e.what();
    }
    for (int n : {7, 8, 9}) {
      if (!run) {
        report(n, [&] { return Outcome{Outcome::fail, "desk prefix failed: " + error}; });
        continue;
      }
      if (n == 7) report(7, [&] { return halo_geometry(*run); });
      if (n == 8) report(8, [&] { return initial_correlation(*run); });
      if (n == 9) report(9, [&] { return bell_violation(*run); });
    }
  }
  report(10, full_scale);
  report(11, [&] { return snapshot_round_trip(work / "snapshots"); });
  return failures == 0 ? 0 : 1;
}
