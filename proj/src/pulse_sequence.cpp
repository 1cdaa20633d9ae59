#include "bellsim/pulse_sequence.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bellsim/axis_propagator.hpp"
#include "bellsim/bragg_ladder.hpp"
#include "bellsim/errors.hpp"
#include "bellsim/simd/kernels.hpp"
#include "bellsim/snapshot.hpp"

namespace bellsim {

namespace {

// Pulses are resolved with at least this many steps on the separable path,
// whatever the grid time step.
constexpr std::size_t kMinPulseSteps = 400;
// Default physical-mode splitting window, in units of m_B / (hbar k^2).
constexpr double kSplitWindowInternal = 24.0;

void say(const std::function<void(const std::string&)>& log, const std::string& msg) {
  if (log) log(msg);
}

// Lattice detuning for p_initial -> p_final: the moving lattice must supply
// the energy difference for a raising transition and absorb it for a
// lowering one.
double lattice_detuning(const RunConfig& config, Species s, double p_initial, double p_final) {
  const double d = detuning_for_transition(config.params(s), p_initial, p_final, config.lattice_momentum,
                                           config.grid.momentum_step());
  return p_final > p_initial ? d : -d;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

void SequenceSchedule::validate() const {
  for (std::size_t i = 1; i < stages.size(); ++i) {
    const auto& prev = stages[i - 1];
    const double prev_end = prev.start + prev.duration;
    const double tol = 1e-12 * std::max(1.0, std::abs(prev_end)) + 1e-15;
    if (stages[i].duration < 0.0 || stages[i].start + tol < prev_end)
      throw SequencingError("stage '" + stages[i].name + "' starts at " + fmt(stages[i].start) +
                            " s before '" + prev.name + "' ends at " + fmt(prev_end) + " s");
  }
  for (std::size_t i = 0; i < pulses.size(); ++i)
    for (std::size_t j = i + 1; j < pulses.size(); ++j) {
      if (pulses[i].target != pulses[j].target) continue;
      const bool overlap = pulses[i].start_time < pulses[j].end_time() && pulses[j].start_time < pulses[i].end_time();
      if (overlap)
        throw SequencingError(std::string("overlapping pulses on species ") + to_string(pulses[i].target));
    }
}

const StageRecord& SequenceSchedule::stage(const std::string& name) const {
  for (const auto& s : stages)
    if (s.name == name) return s;
  throw SequencingError("schedule has no stage '" + name + "'");
}

double pulse_duration(const RunConfig& config, Species s, double theta) {
  const auto& p = config.params(s);
  if (config.envelope == Envelope::gaussian) {
    if (!(p.pulse_duration > 0.0))
      throw ConfigError(std::string("species ") + to_string(s) + ": Gaussian pulses need pulse_duration_s > 0");
    return p.pulse_duration;
  }
  if (!(p.rabi_frequency > 0.0))
    throw ConfigError(std::string("species ") + to_string(s) + ": square pulses need rabi_frequency_rad_per_s > 0");
  return theta / p.rabi_frequency;
}

PulseSpec halo_pulse(const RunConfig& config, Species s, PulseAngles angles, double start,
                     const PulseCalibration& cal) {
  PulseSpec p;
  p.target = s;
  p.theta = angles.theta;
  p.phi = angles.phi;
  p.envelope = config.envelope;
  p.start_time = start;
  p.duration = pulse_duration(config, s, angles.theta > 0.0 ? angles.theta : constants::pi);
  p.lattice_wavevector = config.lattice_momentum / constants::hbar;
  const double half = 0.5 * config.lattice_momentum;
  p.detuning = lattice_detuning(config, s, -half, half);
  p.area_scale = cal.area_scale[static_cast<int>(s)];
  if (angles.theta > 0.0) {
    ladder::Chain chain;
    chain.mass = config.params(s).mass;
    chain.p0 = -half;
    p.area_scale = ladder::area_scale_for_theta(chain, 0, 1, p, p.area_scale);
  }
  return p;
}

std::array<PulseSpec, 2> split_pulses(const RunConfig& config, const PulseCalibration& cal) {
  const double window =
      config.split_duration > 0.0 ? config.split_duration : kSplitWindowInternal * config.units().time;
  const double pk = config.lattice_momentum;
  std::array<PulseSpec, 2> out;
  for (int i = 0; i < 2; ++i) {
    auto& p = out[static_cast<std::size_t>(i)];
    p.target = Species::B;
    p.theta = i == 0 ? constants::pi / 2 : constants::pi;
    p.envelope = Envelope::gaussian;
    p.duration = window;
    p.start_time = i * window;
    p.lattice_wavevector = pk / constants::hbar;
    p.detuning = lattice_detuning(config, Species::B, 0.0, i == 0 ? pk : -pk);
    p.area_scale = cal.split_scale[static_cast<std::size_t>(i)];
  }
  return out;
}

PulseCalibration calibrate_pulses(const RunConfig& config) {
  PulseCalibration cal;
  for (Species s : {Species::A, Species::B}) {
    ladder::Chain chain;
    chain.mass = config.params(s).mass;
    chain.p0 = -0.5 * config.lattice_momentum;
    PulseSpec probe = halo_pulse(config, s, {constants::pi, 0.0}, 0.0, cal);
    probe.area_scale = 1.0;
    double best = 0.0;
    const double scale = ladder::calibrate_area_scale(chain, 0, 1, probe, &best);
    const int i = static_cast<int>(s);
    cal.area_scale[i] = scale;
    cal.pi_transfer[i] = best;
    if (best < 0.98)
      throw CalibrationError(std::string("mirror pulse on species ") + to_string(s) + " reaches only " +
                                 fmt(best) + " transfer on resonance (need 0.98); lengthen the pulse",
                             best);
  }
  if (config.state_prep == StatePrepMode::physical) {
    const auto pulses = split_pulses(config, cal);
    ladder::Chain chain;
    chain.mass = config.params(Species::B).mass;
    chain.p0 = 0.0;
    for (int i = 0; i < 2; ++i) {
      double best = 0.0;
      cal.split_scale[static_cast<std::size_t>(i)] =
          ladder::calibrate_area_scale(chain, 0, i == 0 ? 1 : -1, pulses[static_cast<std::size_t>(i)], &best);
    }
  }
  return cal;
}

SequenceSchedule build_schedule(const RunConfig& config, const PulseCalibration& cal) {
  SequenceSchedule sched;
  sched.mode = config.state_prep;
  sched.stages.push_back({"prepare", 0.0, 0.0, "trap released", {}});
  double t = 0.0;
  if (config.state_prep == StatePrepMode::physical) {
    const auto sp = split_pulses(config, cal);
    sched.pulses.push_back(sp[0]);
    sched.pulses.push_back(sp[1]);
    sched.stages.push_back({"split_B", 0.0, sp[1].end_time(), "physical: " + sp[0].describe() + "; " + sp[1].describe(), {}});
    t = sp[1].end_time();
  } else {
    sched.stages.push_back({"split_B", 0.0, 0.0, "idealized", {}});
  }
  sched.stages.push_back({"collide", t, config.collision_duration, "", {}});
  t += config.collision_duration;
  sched.stages.push_back({"free_flight", t, config.t1 - t, "", {}});

  double mirror_len = 0.0;
  std::string mirror_desc;
  for (Species s : {Species::A, Species::B}) {
    const auto angles = config.mirror[static_cast<int>(s)];
    if (angles.theta <= 0.0) continue;
    const PulseSpec p = halo_pulse(config, s, angles, config.t1, cal);
    sched.pulses.push_back(p);
    mirror_len = std::max(mirror_len, p.duration);
    mirror_desc += (mirror_desc.empty() ? "" : "; ") + p.describe();
  }
  sched.stages.push_back({"mirror", config.t1, mirror_len, mirror_desc, {}});
  sched.stages.push_back({"free_flight", config.t1 + mirror_len, config.t2 - config.t1 - mirror_len, "", {}});

  double mix_len = 0.0;
  std::string mix_desc;
  for (Species s : {Species::A, Species::B}) {
    const auto angles = config.mixing[static_cast<int>(s)];
    if (angles.theta <= 0.0) continue;
    const PulseSpec p = halo_pulse(config, s, angles, config.t2, cal);
    sched.pulses.push_back(p);
    mix_len = std::max(mix_len, p.duration);
    mix_desc += (mix_desc.empty() ? "" : "; ") + p.describe();
  }
  sched.stages.push_back({"mix", config.t2, mix_len, mix_desc.empty() ? "no pulses (theta = 0)" : mix_desc, {}});
  sched.stages.push_back({"expand", config.t2 + mix_len, config.total_duration - config.t2 - mix_len, "", {}});
  std::stable_sort(sched.pulses.begin(), sched.pulses.end(),
                   [](const PulseSpec& a, const PulseSpec& b) { return a.start_time < b.start_time; });
  return sched;
}

WaveFunction4D prepare_initial_state(const RunConfig& config) {
  return ground_state(config.grid, config.trap_frequency,
                      {config.params(Species::A).mass, config.params(Species::B).mass});
}

SplitReport measure_split(const WaveFunction4D& psi, const RunConfig& config) {
  const Field2D rho = momentum_density(psi, Species::B, config.workers);
  const double pk = config.lattice_momentum;
  SplitReport r;
  for (std::size_t i = 0; i < rho.n; ++i)
    for (std::size_t j = 0; j < rho.n; ++j) {
      const double pz = rho.coordinate(j);
      const double w = rho.at(i, j);
      if (std::abs(pz) < 0.5 * pk) r.rest_fraction += w;
      else if (std::abs(pz - pk) < 0.5 * pk) r.plus_weight += w;
      else if (std::abs(pz + pk) < 0.5 * pk) r.minus_weight += w;
    }
  return r;
}

SplitReport split_B(WaveFunction4D& psi, const RunConfig& config, const PulseCalibration& cal) {
  if (config.state_prep == StatePrepMode::idealized) {
    const std::size_t n = psi.extent();
    const double k = config.lattice_momentum / constants::hbar;
    std::vector<cplx> f(n);
    for (std::size_t l = 0; l < n; ++l) f[l] = std::sqrt(2.0) * std::cos(k * config.grid.coordinate(l));
    const auto& kern = simd::active();
    for (std::size_t row = 0; row < n * n * n; ++row) kern.mul(psi.data() + row * n, f.data(), n);
    normalize(psi, config.workers);
    return measure_split(psi, config);
  }
  const auto pulses = split_pulses(config, cal);
  const double t0 = psi.time();
  for (auto p : pulses) {
    p.start_time += t0;
    apply_bragg(psi, {p}, config);
  }
  SplitReport r = measure_split(psi, config);
  if (r.rest_fraction > 0.05)
    throw CalibrationError("physical splitting leaves " + fmt(r.rest_fraction) + " of B at rest (limit 0.05)",
                           r.rest_fraction);
  return r;
}

double default_interaction_strength(const RunConfig& config) {
  const double ma = config.params(Species::A).mass;
  const double mb = config.params(Species::B).mass;
  const double mu = ma * mb / (ma + mb);
  const double sigma = config.effective_interaction_width();
  const double contact = 2.0 * constants::pi * constants::hbar * constants::hbar * config.scattering_length_a34 / mu;
  return contact / (std::pow(2.0 * constants::pi, 1.5) * sigma * sigma * sigma);
}

double scattered_fraction(const WaveFunction4D& psi, const WaveFunction4D& free_reference) {
  return 1.0 - fidelity(psi, free_reference);
}

void collide_at(WaveFunction4D& psi, const RunConfig& config, double strength, double duration,
                SplitStepPropagator& propagator, long long first_step, const CollideOptions& options) {
  const double dt = config.grid.time_step();
  const auto steps = std::max<long long>(1, std::llround(duration / dt));
  const double h = duration / static_cast<double>(steps);
  const std::vector<PotentialField> pots{interaction_potential(strength, config.effective_interaction_width())};
  for (long long s = first_step; s < steps; ++s) {
    propagator.step(psi, pots, h);
    const long long done = s + 1;
    if (options.checkpoint && options.checkpoint_interval > 0 && done < steps &&
        done % static_cast<long long>(options.checkpoint_interval) == 0)
      options.checkpoint(psi, done, strength);
  }
}

void free_flight(WaveFunction4D& psi, double duration, std::size_t workers) {
  if (duration == 0.0) return;
  const GridSpec& g = psi.grid();
  const Units u = Units::from(psi.mass(Species::B), g.momentum_step() * static_cast<double>(g.points_per_dim()));
  SplitStepPropagator prop(g, psi.masses(), u, workers);
  prop.free_evolve(psi, duration);
}

CollisionReport collide(WaveFunction4D& psi, const RunConfig& config, double duration,
                        SplitStepPropagator& propagator, const CollideOptions& options) {
  CollisionReport report;
  // Only the split state is kept besides the trial: the free reference
  // overlap is <U0 split|psi> = <split|U0^dagger psi>, computed by running psi
  // backwards in place and forwards again.
  const WaveFunction4D split = psi;

  auto fraction = [&](WaveFunction4D& out) {
    propagator.free_evolve(out, -duration);
    const double f = 1.0 - std::norm(inner_product(split, out));
    propagator.free_evolve(out, duration);
    return f;
  };
  auto run = [&](double g) {
    ++report.runs;
    if (options.partial && report.runs == 1) {
      psi = *options.partial;
      collide_at(psi, config, g, duration, propagator, options.partial_step, options);
    } else {
      psi = split;
      collide_at(psi, config, g, duration, propagator, 0, options);
    }
    const double f = fraction(psi);
    say(options.log, "collision with strength " + fmt(g) + " J scattered " + fmt(f));
    return f;
  };

  double g = options.partial ? options.partial_strength
                             : (config.interaction_strength > 0.0 ? config.interaction_strength
                                                                  : default_interaction_strength(config));
  double f = run(g);
  if (options.calibrate && g > 0.0) {
    const double lo_f = config.scattered_fraction_min, hi_f = config.scattered_fraction_max;
    const double target = std::sqrt(lo_f * hi_f);
    double g_lo = 0.0, g_hi = 0.0;  // brackets: too weak / too strong
    for (int it = 0; it < 10 && !(f >= lo_f && f <= hi_f); ++it) {
      if (f < lo_f) g_lo = std::max(g_lo, g);
      else g_hi = g_hi > 0.0 ? std::min(g_hi, g) : g;
      // First-order Born: the scattered fraction grows as g^2.
      double next = f > 0.0 ? g * std::sqrt(target / f) : 10.0 * g;
      if (g_lo > 0.0 && g_hi > 0.0 && !(next > g_lo && next < g_hi)) next = std::sqrt(g_lo * g_hi);
      g = next;
      f = run(g);
    }
    if (!(f >= lo_f && f <= hi_f))
      throw CalibrationError("interaction calibration did not reach the scattered-fraction window [" + fmt(lo_f) +
                                 ", " + fmt(hi_f) + "]; last value " + fmt(f),
                             f);
  }
  report.strength = g;
  report.scattered_fraction = f;
  if (f > 0.2) {
    report.warnings.push_back("scattered fraction " + fmt(f) +
                              " exceeds 0.2: the single-pair approximation no longer holds");
    say(options.log, "warning: " + report.warnings.back());
  }
  return report;
}

void apply_bragg(WaveFunction4D& psi, const std::vector<PulseSpec>& pulses, const RunConfig& config) {
  std::vector<PotentialField> pots;
  double start = 0.0, end = 0.0;
  bool first = true;
  bool seen[2] = {false, false};
  for (const auto& p : pulses) {
    if (p.theta <= 0.0) continue;
    p.validate();
    const int s = static_cast<int>(p.target);
    if (seen[s]) throw SequencingError("two simultaneous pulses on one species");
    seen[s] = true;
    if (first) {
      start = p.start_time;
      end = p.end_time();
      first = false;
    } else {
      if (std::abs(p.start_time - start) > 1e-12 * std::max(1.0, std::abs(start)))
        throw SequencingError("simultaneous pulses must share a start time");
      end = std::max(end, p.end_time());
    }
    const double k = p.lattice_wavevector;
    const double periods = k * psi.grid().box_length() / (2.0 * constants::pi);
    if (std::abs(periods - std::round(periods)) > 1e-6)
      throw ResolutionError("Bragg lattice does not fit the periodic box (" + fmt(periods) +
                            " periods); use grid.lattice_periods_per_box");
    if (k * psi.grid().spatial_step() >= constants::pi)
      throw ResolutionError("grid spacing cannot resolve the Bragg lattice");
    pots.push_back(p.potential());
  }
  if (pots.empty()) return;
  if (std::abs(psi.time() - start) > 1e-9 * std::max(1e-6, std::abs(start)))
    throw SequencingError("field time " + fmt(psi.time()) + " s does not match pulse start " + fmt(start) + " s");
  psi.set_time(start);
  const double duration = end - start;
  const auto steps = std::max<std::size_t>(
      kMinPulseSteps, static_cast<std::size_t>(std::ceil(duration / config.grid.time_step())));
  AxisPropagator axes(psi.grid(), psi.masses(), config.units());
  axes.record(pots, start, duration, duration / static_cast<double>(steps));
  axes.apply(psi, config.workers);
}

std::string prefix_hash(const RunConfig& config) {
  RunConfig c = config;
  c.mixing = {PulseAngles{0.0, 0.0}, PulseAngles{0.0, 0.0}};
  return config_hash(c);
}

namespace {

using nlohmann::json;

struct Progress {
  std::string hash;
  int completed = -1;  // index of the last finished stage
  long long collide_step = 0;
  double strength = 0.0;
  SplitReport split;
  CollisionReport collision;
  std::vector<std::string> snapshots;
};

std::filesystem::path progress_path(const std::filesystem::path& dir) { return dir / "progress.json"; }

void write_progress(const std::filesystem::path& dir, const Progress& p) {
  json j;
  j["prefix_hash"] = p.hash;
  j["completed_stage"] = p.completed;
  j["collide_step"] = p.collide_step;
  j["strength_j"] = p.strength;
  j["split"] = {{"rest", p.split.rest_fraction}, {"plus", p.split.plus_weight}, {"minus", p.split.minus_weight}};
  j["collision"] = {{"strength_j", p.collision.strength},
                    {"scattered_fraction", p.collision.scattered_fraction},
                    {"runs", p.collision.runs},
                    {"warnings", p.collision.warnings}};
  j["snapshots"] = p.snapshots;
  const auto tmp = dir / "progress.json.partial";
  {
    std::ofstream out(tmp);
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, progress_path(dir));
}

std::optional<Progress> read_progress(const std::filesystem::path& dir) {
  std::ifstream in(progress_path(dir));
  if (!in) return std::nullopt;
  json j;
  try {
    in >> j;
    Progress p;
    p.hash = j.at("prefix_hash").get<std::string>();
    p.completed = j.at("completed_stage").get<int>();
    p.collide_step = j.at("collide_step").get<long long>();
    p.strength = j.at("strength_j").get<double>();
    p.split.rest_fraction = j.at("split").at("rest").get<double>();
    p.split.plus_weight = j.at("split").at("plus").get<double>();
    p.split.minus_weight = j.at("split").at("minus").get<double>();
    p.collision.strength = j.at("collision").at("strength_j").get<double>();
    p.collision.scattered_fraction = j.at("collision").at("scattered_fraction").get<double>();
    p.collision.runs = j.at("collision").at("runs").get<int>();
    p.collision.warnings = j.at("collision").at("warnings").get<std::vector<std::string>>();
    p.snapshots = j.at("snapshots").get<std::vector<std::string>>();
    return p;
  } catch (const json::exception& e) {
    throw FormatError("corrupt progress file in " + dir.string() + ": " + e.what());
  }
}

std::string snapshot_name(std::size_t index, const std::string& stage) {
  std::ostringstream os;
  os << "stage_" << index << "_" << stage << ".bwf4";
  return os.str();
}

}  // namespace

SequenceResult run_prefix(const RunConfig& config, const RunOptions& options) {
  config.validate();
  SequenceResult result;
  result.calibration = calibrate_pulses(config);
  result.schedule = build_schedule(config, result.calibration);
  result.schedule.validate();
  result.stages = result.schedule.stages;
  const std::array<double, 2> masses{config.params(Species::A).mass, config.params(Species::B).mass};

  const bool checkpoints = !options.checkpoint_dir.empty();
  Progress progress;
  progress.hash = prefix_hash(config);
  WaveFunction4D psi;
  std::optional<WaveFunction4D> partial;
  if (checkpoints) {
    std::filesystem::create_directories(options.checkpoint_dir);
    if (options.resume) {
      if (auto p = read_progress(options.checkpoint_dir); p && p->hash == progress.hash) {
        progress = *p;
        if (progress.completed >= 0) {
          psi = load_snapshot(options.checkpoint_dir / progress.snapshots.at(static_cast<std::size_t>(progress.completed)));
          result.resumed = true;
          say(options.log, "resuming after stage " + result.stages[static_cast<std::size_t>(progress.completed)].name);
        }
        if (progress.collide_step > 0 && std::filesystem::exists(options.checkpoint_dir / "collide_partial.bwf4")) {
          partial = load_snapshot(options.checkpoint_dir / "collide_partial.bwf4");
          result.resumed = true;
          say(options.log, "resuming collision at step " + std::to_string(progress.collide_step));
        }
        result.split = progress.split;
        result.collision = progress.collision;
      }
    }
  }
  progress.snapshots.resize(result.stages.size());

  SplitStepPropagator propagator(config.grid, masses, config.units(), config.workers);
  auto finish_stage = [&](std::size_t index) {
    const auto& name = result.stages[index].name;
    const std::string done = "stage " + name + " done at t = " + fmt(psi.time()) + " s";
    if (!checkpoints) {
      say(options.log, done);
      return;
    }
    const auto file = snapshot_name(index, name);
    save_snapshot(psi, options.checkpoint_dir / file);
    result.stages[index].snapshot = options.checkpoint_dir / file;
    progress.snapshots[index] = file;
    progress.completed = static_cast<int>(index);
    progress.collide_step = 0;
    progress.split = result.split;
    progress.collision = result.collision;
    write_progress(options.checkpoint_dir, progress);
    std::filesystem::remove(options.checkpoint_dir / "collide_partial.bwf4");
    say(options.log, done + "; snapshot " + file);
  };

  // Stage indices follow build_schedule: 0 prepare, 1 split_B, 2 collide,
  // 3 free_flight, 4 mirror, 5 free_flight; mixing belongs to finish_sequence.
  const int done = progress.completed;
  for (std::size_t index = 0; index <= 5; ++index) {
    if (static_cast<int>(index) <= done) {
      if (checkpoints && !progress.snapshots[index].empty())
        result.stages[index].snapshot = options.checkpoint_dir / progress.snapshots[index];
      continue;
    }
    const auto& stage = result.stages[index];
    try {
      switch (index) {
        case 0:
          psi = prepare_initial_state(config);
          break;
        case 1:
          result.split = split_B(psi, config, result.calibration);
          break;
        case 2: {
          CollideOptions co;
          co.calibrate = config.calibrate_interaction;
          co.log = options.log;
          if (checkpoints && config.checkpoint_interval > 0) {
            co.checkpoint_interval = config.checkpoint_interval;
            co.checkpoint = [&](const WaveFunction4D& state, long long step, double g) {
              save_snapshot(state, options.checkpoint_dir / "collide_partial.bwf4");
              progress.collide_step = step;
              progress.strength = g;
              write_progress(options.checkpoint_dir, progress);
              say(options.log, "collision checkpoint at step " + std::to_string(step));
            };
          }
          if (partial) {
            co.partial = &*partial;
            co.partial_step = progress.collide_step;
            co.partial_strength = progress.strength;
          }
          result.collision = collide(psi, config, stage.duration, propagator, co);
          partial.reset();
          break;
        }
        case 3:
        case 5:
          free_flight(psi, stage.duration, config.workers);
          break;
        case 4: {
          std::vector<PulseSpec> mirror;
          for (const auto& p : result.schedule.pulses)
            if (std::abs(p.start_time - config.t1) < 1e-15 + 1e-12 * config.t1) mirror.push_back(p);
          apply_bragg(psi, mirror, config);
          psi.set_time(stage.start + stage.duration);
          break;
        }
      }
    } catch (const Error& e) {
      std::string last = "none";
      for (std::size_t k = index; k-- > 0;)
        if (!result.stages[k].snapshot.empty()) {
          last = result.stages[k].snapshot.string();
          break;
        }
      throw SequencingError("stage '" + stage.name + "' failed: " + e.what() + " (last good snapshot: " + last + ")");
    }
    finish_stage(index);
  }
  result.state = std::move(psi);
  return result;
}

void finish_sequence(SequenceResult& prefix, const RunConfig& config, const RunOptions& options) {
  WaveFunction4D& psi = prefix.state;
  std::vector<PulseSpec> mix;
  for (Species s : {Species::A, Species::B}) {
    const auto angles = config.mixing[static_cast<int>(s)];
    if (angles.theta > 0.0) mix.push_back(halo_pulse(config, s, angles, config.t2, prefix.calibration));
  }
  double mix_len = 0.0;
  for (const auto& p : mix) mix_len = std::max(mix_len, p.duration);
  try {
    apply_bragg(psi, mix, config);
    psi.set_time(config.t2 + mix_len);
    free_flight(psi, config.total_duration - psi.time(), config.workers);
  } catch (const Error& e) {
    throw SequencingError(std::string("stage 'mix' failed: ") + e.what());
  }
  // The prefix schedule was built with the mixing angles of its own config.
  prefix.schedule = build_schedule(config, prefix.calibration);
  for (std::size_t i = 6; i < prefix.stages.size() && i < prefix.schedule.stages.size(); ++i)
    prefix.stages[i] = prefix.schedule.stages[i];
  say(options.log, "sequence complete at t = " + fmt(psi.time()) + " s");
}

SequenceResult run_sequence(const RunConfig& config, const RunOptions& options) {
  SequenceResult r = run_prefix(config, options);
  finish_sequence(r, config, options);
  return r;
}

}  // namespace bellsim
