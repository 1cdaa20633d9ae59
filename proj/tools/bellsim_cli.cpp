#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "bellsim/errors.hpp"
#include "bellsim/halo_analysis.hpp"
#include "bellsim/mode_oracle.hpp"
#include "bellsim/output.hpp"
#include "bellsim/pulse_sequence.hpp"
#include "bellsim/snapshot.hpp"

namespace fs = std::filesystem;
using namespace bellsim;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kUsage = 2;
constexpr const char* kOutputRootEnv = "BELLSIM_OUTPUT_ROOT";

// Fields alive at once: a run holds the state and the split copy during the
// collision (plus a partial checkpoint when resuming), then the state and a
// momentum-space copy for the analysis. Each concurrent scan point adds a
// working copy and its momentum-space copy to the shared prefix state.
double peak_fields(std::size_t scan_workers) {
  return scan_workers == 0 ? 3.0 : std::max(3.0, 1.0 + 2.0 * static_cast<double>(scan_workers));
}

struct CommonArgs {
  std::string config;
  std::string output_dir;
  std::size_t points = 0;
  double dt = 0.0;
  std::size_t checkpoint_every = 0;
  std::size_t workers = 0;
  std::string format = "csv";
  std::vector<std::string> set;
  bool resume = false;
  bool no_snapshots = false;
  bool estimate_only = false;
};

struct Angles {
  std::optional<double> theta_a, theta_b, phi_a, phi_b;
};

void log_line(const std::string& msg) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  std::cerr << std::put_time(&tm, "[%H:%M:%S] ") << msg << std::endl;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

RunConfig load_with_overrides(const CommonArgs& args, const Angles& angles) {
  std::ifstream in(args.config);
  if (!in) throw ConfigError("cannot read config file '" + args.config + "'");
  std::stringstream text;
  text << in.rdbuf();
  std::map<std::string, std::string> ov;
  for (const auto& kv : args.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + kv + "'");
    ov[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (args.points) ov["grid.points_per_dim"] = std::to_string(args.points);
  if (args.dt > 0.0) ov["grid.time_step_s"] = num(args.dt);
  if (args.checkpoint_every) ov["output.checkpoint_interval_steps"] = std::to_string(args.checkpoint_every);
  if (args.workers) ov["output.workers"] = std::to_string(args.workers);
  if (angles.theta_a) ov["sequence.theta_a_rad"] = num(*angles.theta_a);
  if (angles.theta_b) ov["sequence.theta_b_rad"] = num(*angles.theta_b);
  if (angles.phi_a) ov["sequence.phi_a_rad"] = num(*angles.phi_a);
  if (angles.phi_b) ov["sequence.phi_b_rad"] = num(*angles.phi_b);
  return parse_config(text.str(), ov);
}

fs::path resolve_output(const CommonArgs& args, const RunConfig& config) {
  fs::path out = args.output_dir.empty() ? config.output_dir : fs::path(args.output_dir);
  if (out.is_relative() && args.output_dir.empty()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) out = fs::path(root) / out;
  }
  return out;
}

double available_memory_bytes() {
  std::ifstream in("/proc/meminfo");
  std::string key;
  double value = 0.0;
  std::string unit;
  while (in >> key >> value >> unit)
    if (key == "MemAvailable:") return value * 1024.0;
  return 0.0;
}

// Prints the estimate; returns false when the run must not start.
bool memory_guard(const RunConfig& config, std::size_t scan_workers = 0) {
  const std::size_t n = config.grid.points_per_dim();
  const double field = field_bytes(n);
  const double peak = peak_fields(scan_workers) * field;
  const double avail = available_memory_bytes();
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << "memory estimate: " << field / 1e9 << " GB per field (" << n
     << "^4 complex doubles), ~" << peak / 1e9 << " GB peak; cap " << config.memory_cap_bytes / 1e9 << " GB";
  if (avail > 0.0) os << ", available " << avail / 1e9 << " GB";
  std::cout << os.str() << "\n";
  if (peak > config.memory_cap_bytes) {
    std::cerr << "error: required " << peak / 1e9 << " GB exceeds the memory cap of " << config.memory_cap_bytes / 1e9
              << " GB (output.memory_cap_bytes)\n";
    return false;
  }
  if (avail > 0.0 && peak > avail) {
    std::cerr << "error: required " << peak / 1e9 << " GB exceeds the " << avail / 1e9 << " GB available\n";
    return false;
  }
  return true;
}

struct Analysis {
  CorrelationTable table;
  double correlator = 0.0;
  std::vector<std::pair<double, double>> radius_curve;  // (fraction, E)
};

// Correlation table, region-radius curve and plot slices for a final state.
Analysis analyze_state(const WaveFunction4D& psi, const RunConfig& config, const fs::path& out,
                       TableFormat format, std::vector<fs::path>& outputs) {
  const WaveFunction4D phi = psi.domain() == Domain::momentum ? psi : to_momentum_space(psi, config.workers);
  const auto geo = config.geometry();
  const auto regions = default_mode_regions(geo, config.grid, config.region_radius_fraction);
  Analysis a;
  a.table = joint_weights(phi, regions, config.workers);
  a.table.theta_a = config.mixing[0].theta;
  a.table.theta_b = config.mixing[1].theta;
  a.table.phi_a = config.mixing[0].phi;
  a.table.phi_b = config.mixing[1].phi;
  a.correlator = correlator_from_table(a.table);
  ScanPoint p{a.table, a.correlator, true, {}};
  const auto table_path = out / (std::string("correlation") + extension(format));
  write_correlation_table(table_path, {p}, format);
  outputs.push_back(table_path);

  const auto curve_path = out / "radius_convergence.csv";
  {
    std::ofstream curve(curve_path);
    curve << std::setprecision(17) << "radius_fraction,radius_p_k,E,status\n";
    for (double f : {0.025, 0.05, 0.1, 0.15, 0.2, 0.3}) {
      try {
        const auto r = default_mode_regions(geo, config.grid, f);
        const double e = correlator_from_table(joint_weights(phi, r, config.workers));
        a.radius_curve.emplace_back(f, e);
        curve << f << ',' << r[0].radius / config.lattice_momentum << ',' << e << ",ok\n";
      } catch (const Error& e) {
        curve << f << ",nan,nan,failed: " << e.what() << '\n';
      }
    }
  }
  outputs.push_back(curve_path);

  const double pk = config.lattice_momentum;
  const std::string unit = "p_k";
  for (Species s : {Species::A, Species::B}) {
    const auto path = out / (std::string("momentum_density_") + to_string(s) + ".csv");
    write_field_csv(path, momentum_density(phi, s, config.workers), std::string("p_x^") + to_string(s),
                    std::string("p_z^") + to_string(s), pk, unit);
    outputs.push_back(path);
    outputs.push_back(fs::path(path.string() + ".txt"));
  }
  const auto slice_path = out / "joint_slice_pz.csv";
  write_field_csv(slice_path, slice_joint_density(phi, {regions[kAUp].center_x, regions[kBUp].center_x, 0.0}, config.workers),
                  "p_z^A", "p_z^B", pk, unit);
  outputs.push_back(slice_path);
  outputs.push_back(fs::path(slice_path.string() + ".txt"));
  return a;
}

void write_summary(const fs::path& path, const RunConfig& config, const SequenceResult& r, const Analysis& a) {
  std::ofstream out(path);
  out << std::setprecision(17);
  out << "config_hash,state_prep,theta_a,theta_b,phi_a,phi_b,E,region_radius_p_k,scattered_fraction,"
         "interaction_strength_j,collision_runs,split_rest,pi_transfer_a,pi_transfer_b,area_scale_a,area_scale_b\n";
  const auto regions = default_mode_regions(config.geometry(), config.grid, config.region_radius_fraction);
  out << config_hash(config) << ',' << to_string(config.state_prep) << ',' << config.mixing[0].theta << ','
      << config.mixing[1].theta << ',' << config.mixing[0].phi << ',' << config.mixing[1].phi << ',' << a.correlator
      << ',' << regions[0].radius / config.lattice_momentum << ',' << r.collision.scattered_fraction << ','
      << r.collision.strength << ',' << r.collision.runs << ',' << r.split.rest_fraction << ','
      << r.calibration.pi_transfer[0] << ',' << r.calibration.pi_transfer[1] << ',' << r.calibration.area_scale[0]
      << ',' << r.calibration.area_scale[1] << '\n';
}

int cmd_run(const CommonArgs& args, const Angles& angles) {
  const RunConfig config = load_with_overrides(args, angles);
  if (!memory_guard(config)) return kRuntimeFailure;
  if (args.estimate_only) return kOk;
  const TableFormat format = parse_table_format(args.format);
  const fs::path out = resolve_output(args, config);
  fs::create_directories(out);

  RunManifest manifest;
  manifest.config_hash = config_hash(config);
  manifest.tool_version = tool_version();
  manifest.started = utc_timestamp();
  {
    const auto cfg_copy = out / "config.canonical.ini";
    std::ofstream(cfg_copy) << canonical_config_text(config);
    manifest.outputs.push_back(cfg_copy);
  }
  RunOptions options;
  if (!args.no_snapshots) options.checkpoint_dir = out / "snapshots";
  options.resume = args.resume;
  options.log = log_line;
  const auto t0 = std::chrono::steady_clock::now();
  SequenceResult result = run_sequence(config, options);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!args.no_snapshots) {
    const auto final_snap = out / "snapshots" / "final.bwf4";
    save_snapshot(result.state, final_snap);
    manifest.outputs.push_back(final_snap);
    for (const auto& s : result.stages)
      if (!s.snapshot.empty()) manifest.outputs.push_back(s.snapshot);
  }
  const Analysis a = analyze_state(result.state, config, out, format, manifest.outputs);
  const auto summary = out / "summary.csv";
  write_summary(summary, config, result, a);
  manifest.outputs.push_back(summary);
  manifest.stages = result.stages;
  manifest.notes = result.collision.warnings;
  manifest.notes.push_back("wall time " + num(seconds) + " s");
  if (result.resumed) manifest.notes.push_back("resumed from checkpoint");
  manifest.finished = utc_timestamp();
  manifest.write(out / "manifest.json");

  std::cout << std::fixed << std::setprecision(4) << "E = " << a.correlator << "  (theta_a " << config.mixing[0].theta
            << ", theta_b " << config.mixing[1].theta << ", phi_a " << config.mixing[0].phi << ", phi_b "
            << config.mixing[1].phi << ")\nscattered fraction " << result.collision.scattered_fraction
            << "\noutputs in " << out.string() << "\n";
  return kOk;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ConfigError(flag + ": '" + tok + "' is not a number");
    out.push_back(v);
  }
  return out;
}

int cmd_scan(const CommonArgs& args, const Angles& angles, const std::string& theta_a_list,
             const std::string& theta_b_list, std::size_t scan_workers, bool chsh) {
  const auto ta = parse_list(theta_a_list, "--theta-a-list");
  const auto tb = parse_list(theta_b_list, "--theta-b-list");
  if (ta.empty() || tb.empty()) throw ConfigError("scan needs non-empty --theta-a-list and --theta-b-list");
  const RunConfig config = load_with_overrides(args, angles);
  if (!memory_guard(config, std::max<std::size_t>(1, scan_workers))) return kRuntimeFailure;
  if (args.estimate_only) return kOk;
  const TableFormat format = parse_table_format(args.format);
  const fs::path out = resolve_output(args, config);
  fs::create_directories(out);

  RunManifest manifest;
  manifest.config_hash = config_hash(config);
  manifest.tool_version = tool_version();
  manifest.started = utc_timestamp();
  std::vector<Setting> settings;
  const double pa = config.mixing[0].phi, pb = config.mixing[1].phi;
  for (double a : ta)
    for (double b : tb) settings.push_back({a, b, pa, pb});
  const std::size_t surface = settings.size();
  if (chsh) {
    const auto s = oracle::optimal_theta_settings();
    for (const auto& a : {s.a, s.a_prime})
      for (const auto& b : {s.b, s.b_prime}) settings.push_back({a.theta, b.theta, pa, pb});
  }
  ScanOptions options;
  if (!args.no_snapshots) options.run.checkpoint_dir = out / "snapshots";
  options.run.resume = args.resume;
  options.run.log = log_line;
  options.scan_workers = scan_workers;
  options.on_point = [](const ScanPoint& p) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << "theta_a " << p.table.theta_a << " theta_b " << p.table.theta_b
       << ": " << (p.ok ? "E = " + num(p.correlator) : "failed: " + p.error);
    log_line(os.str());
  };
  ScanResult result = scan_settings(config, settings, options);

  std::vector<ScanPoint> grid(result.points.begin(), result.points.begin() + static_cast<std::ptrdiff_t>(surface));
  std::vector<double> sums, es;
  for (const auto& p : grid) {
    sums.push_back(p.table.theta_a + p.table.theta_b);
    es.push_back(p.ok ? p.correlator : std::nan(""));
  }
  VisibilityFit fit{std::nan(""), std::nan(""), 0};
  try {
    fit = fit_visibility(sums, es);
  } catch (const AnalysisError& e) {
    manifest.notes.push_back(std::string("visibility fit failed: ") + e.what());
  }
  const auto surface_path = out / (std::string("e_surface") + extension(format));
  write_correlation_table(surface_path, grid, format);
  manifest.outputs.push_back(surface_path);
  const auto fit_path = out / "fit.csv";
  std::ofstream(fit_path) << std::setprecision(17) << "visibility,rms,points\n"
                          << fit.visibility << ',' << fit.rms << ',' << fit.points << '\n';
  manifest.outputs.push_back(fit_path);

  std::cout << std::fixed << std::setprecision(4) << "visibility V = " << fit.visibility << ", RMS residual "
            << fit.rms << " over " << fit.points << " points\n";
  std::size_t failed = 0;
  for (const auto& p : result.points) failed += p.ok ? 0 : 1;
  if (chsh) {
    ChshSummary summary;
    bool ok = true;
    for (std::size_t i = 0; i < 4; ++i) {
      summary.runs[i] = result.points[surface + i];
      ok = ok && summary.runs[i].ok;
    }
    summary.s = ok ? chsh_from_runs({summary.runs[0].table, summary.runs[1].table, summary.runs[2].table,
                                     summary.runs[3].table})
                   : std::nan("");
    summary.visibility = fit.visibility;
    summary.fit_rms = fit.rms;
    const auto chsh_path = out / (std::string("chsh_summary") + extension(format));
    write_chsh_summary(chsh_path, summary, format);
    manifest.outputs.push_back(chsh_path);
    std::cout << "CHSH |S| = " << std::abs(summary.s) << (std::abs(summary.s) > 2.0 ? " (> 2)" : " (<= 2)") << "\n";
  }
  manifest.stages = result.prefix.stages;
  for (const auto& s : result.prefix.stages)
    if (!s.snapshot.empty()) manifest.outputs.push_back(s.snapshot);
  manifest.notes.insert(manifest.notes.end(), result.prefix.collision.warnings.begin(),
                        result.prefix.collision.warnings.end());
  if (failed) manifest.notes.push_back(std::to_string(failed) + " scan points failed");
  manifest.finished = utc_timestamp();
  manifest.write(out / "manifest.json");
  std::cout << "outputs in " << out.string() << "\n";
  return failed ? kRuntimeFailure : kOk;
}

void print_result(const oracle::BellResult& r, bool json_out) {
  if (json_out) {
    nlohmann::json j{{"theta_a", r.theta_a}, {"theta_b", r.theta_b}, {"phi_a", r.phi_a}, {"phi_b", r.phi_b},
                     {"P", r.joint_probabilities}, {"g2", r.g2}, {"E", r.correlator}};
    std::cout << std::setprecision(17) << j.dump() << "\n";
    return;
  }
  std::cout << std::fixed << std::setprecision(4) << "theta_a " << r.theta_a << "  theta_b " << r.theta_b
            << "  phi_a " << r.phi_a << "  phi_b " << r.phi_b << "\n"
            << "P(uu) P(ud) P(du) P(dd) = " << r.joint_probabilities[0] << ' ' << r.joint_probabilities[1] << ' '
            << r.joint_probabilities[2] << ' ' << r.joint_probabilities[3] << "\n"
            << "E = " << (std::abs(r.correlator) < 5e-5 ? 0.0 : r.correlator) << "\n";
}

int cmd_oracle(const Angles& angles, bool json_out) {
  print_result(oracle::evaluate(angles.theta_a.value_or(0.0), angles.theta_b.value_or(0.0),
                                angles.phi_a.value_or(0.0), angles.phi_b.value_or(0.0)),
               json_out);
  return kOk;
}

int cmd_oracle_chsh(bool phase_settings, bool json_out) {
  const auto s = phase_settings ? oracle::optimal_phase_settings() : oracle::optimal_theta_settings();
  const double value = oracle::chsh(s);
  if (json_out) {
    nlohmann::json j{{"S", value}, {"abs_S", std::abs(value)}, {"settings", phase_settings ? "phase" : "theta"}};
    std::cout << std::setprecision(17) << j.dump() << "\n";
    return kOk;
  }
  const std::pair<const oracle::PulseSetting*, const oracle::PulseSetting*> pairs[4] = {
      {&s.a, &s.b}, {&s.a, &s.b_prime}, {&s.a_prime, &s.b}, {&s.a_prime, &s.b_prime}};
  const char* names[4] = {"a,b", "a,b'", "a',b", "a',b'"};
  std::cout << std::fixed << std::setprecision(6);
  for (int i = 0; i < 4; ++i) {
    const auto r = oracle::evaluate(pairs[i].first->theta, pairs[i].second->theta, pairs[i].first->phi,
                                    pairs[i].second->phi);
    std::cout << std::left << std::setw(6) << names[i] << " theta_a " << r.theta_a << " theta_b " << r.theta_b
              << " phi_a " << r.phi_a << " phi_b " << r.phi_b << "  E = " << r.correlator << "\n";
  }
  std::cout << "S = " << value << "\n|S| = " << std::abs(value) << "\n";
  return kOk;
}

int cmd_analyze(const CommonArgs& args, const std::string& snapshot) {
  const RunConfig config = load_with_overrides(args, {});
  const TableFormat format = parse_table_format(args.format);
  WaveFunction4D psi = load_snapshot(snapshot);
  if (psi.extent() != config.grid.points_per_dim())
    throw ConfigError("snapshot has " + std::to_string(psi.extent()) + " points per axis but the config has " +
                      std::to_string(config.grid.points_per_dim()));
  const fs::path out = resolve_output(args, config);
  fs::create_directories(out);
  RunManifest manifest;
  manifest.config_hash = config_hash(config);
  manifest.tool_version = tool_version();
  manifest.started = utc_timestamp();
  const Analysis a = analyze_state(psi, config, out, format, manifest.outputs);
  manifest.notes.push_back("analysed " + snapshot);
  manifest.finished = utc_timestamp();
  manifest.write(out / "manifest.json");
  std::cout << std::fixed << std::setprecision(4) << "E = " << a.correlator << "\nradius convergence:";
  for (const auto& [f, e] : a.radius_curve) std::cout << "  " << f << "R: " << e;
  std::cout << "\noutputs in " << out.string() << "\n";
  return kOk;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_run_flags) {
  cmd->add_option("--config", args.config, "configuration file (INI)")->required();
  cmd->add_option("--output-dir", args.output_dir,
                  std::string("output directory (default: the config's output_dir, under $") + kOutputRootEnv +
                      " when set)");
  cmd->add_option("--set", args.set, "override a config key: section.key=value (repeatable)");
  cmd->add_option("--format", args.format, "table format")->check(CLI::IsMember({"csv", "json-lines"}));
  cmd->add_option("--workers", args.workers, "worker threads per sequence");
  if (!needs_run_flags) return;
  cmd->add_option("--points", args.points, "grid points per dimension");
  cmd->add_option("--dt", args.dt, "time step in seconds");
  cmd->add_option("--checkpoint-every", args.checkpoint_every, "collision steps between partial checkpoints");
  cmd->add_flag("--resume", args.resume, "continue from snapshots in the output directory");
  cmd->add_flag("--no-snapshots", args.no_snapshots, "do not write stage snapshots");
  cmd->add_flag("--estimate-only", args.estimate_only, "print the memory estimate and exit");
}

void add_angles(CLI::App* cmd, Angles& angles, bool thetas) {
  if (thetas) {
    cmd->add_option("--theta-a", angles.theta_a, "mixing pulse area on A (rad)");
    cmd->add_option("--theta-b", angles.theta_b, "mixing pulse area on B (rad)");
  }
  cmd->add_option("--phi-a", angles.phi_a, "mixing laser phase on A (rad)");
  cmd->add_option("--phi-b", angles.phi_b, "mixing laser phase on B (rad)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-species matter-wave Bell test simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  CommonArgs run_args, scan_args, analyze_args;
  Angles run_angles, scan_angles, oracle_angles;
  bool oracle_json = false, phase_settings = false, chsh_json = false, no_chsh = false;
  std::string theta_a_list, theta_b_list, snapshot;
  std::size_t scan_workers = 1;

  auto* run = app.add_subcommand("run", "run the full sequence for one setting");
  add_common(run, run_args, true);
  add_angles(run, run_angles, true);

  auto* scan = app.add_subcommand("scan", "scan mixing pulse areas and report E(theta_a, theta_b) and CHSH");
  add_common(scan, scan_args, true);
  add_angles(scan, scan_angles, false);
  scan->add_option("--theta-a-list", theta_a_list, "comma-separated pulse areas for A (rad)")
      ->default_str("0,pi/4,..,pi");
  scan->add_option("--theta-b-list", theta_b_list, "comma-separated pulse areas for B (rad)")
      ->default_str("0,pi/4,..,pi");
  scan->add_option("--scan-workers", scan_workers, "settings finished concurrently");
  scan->add_flag("--no-chsh", no_chsh, "skip the four CHSH settings");

  auto* oracle_cmd = app.add_subcommand("oracle", "closed-form joint probabilities, E and CHSH");
  add_angles(oracle_cmd, oracle_angles, true);
  oracle_cmd->add_flag("--json", oracle_json, "machine-readable output");
  auto* chsh = oracle_cmd->add_subcommand("chsh", "CHSH value at the optimal settings");
  chsh->add_flag("--phase-settings", phase_settings, "pulse areas pi/2, phase sums pi/4, 3pi/4, 7pi/4, 9pi/4 (default: area sums)");
  chsh->add_flag("--json", chsh_json, "machine-readable output");

  auto* analyze = app.add_subcommand("analyze", "re-derive observables from a saved snapshot");
  add_common(analyze, analyze_args, false);
  analyze->add_option("--snapshot", snapshot, "snapshot file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(run_args, run_angles);
    if (*scan) {
      const std::string grid = "0,0.78539816339744828,1.5707963267948966,2.3561944901923448,3.1415926535897931";
      return cmd_scan(scan_args, scan_angles, scan->count("--theta-a-list") ? theta_a_list : grid,
                      scan->count("--theta-b-list") ? theta_b_list : grid, scan_workers, !no_chsh);
    }
    if (*oracle_cmd) {
      if (*chsh) return cmd_oracle_chsh(phase_settings, oracle_json || chsh_json);
      return cmd_oracle(oracle_angles, oracle_json);
    }
    if (*analyze) return cmd_analyze(analyze_args, snapshot);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kUsage;
}
