#include "bellsim/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "bellsim/errors.hpp"

namespace bellsim {

Species parse_species(const std::string& text) {
  if (text == "A" || text == "a") return Species::A;
  if (text == "B" || text == "b") return Species::B;
  throw ConfigError("unknown species label '" + text + "' (expected A or B)");
}

void SpeciesParams::validate() const {
  if (!(mass > 0.0)) throw ConfigError(std::string("species ") + to_string(label) + ": mass must be positive");
  if (!(transition_frequency > 0.0))
    throw ConfigError(std::string("species ") + to_string(label) + ": transition frequency must be positive");
  if (rabi_frequency < 0.0 || pulse_duration < 0.0)
    throw ConfigError(std::string("species ") + to_string(label) + ": Rabi frequency and pulse duration must be non-negative");
}

SpeciesParams SpeciesParams::helium3() {
  SpeciesParams p;
  p.label = Species::A;
  p.mass = constants::mass_he3;
  p.transition_frequency = constants::transition_he3_hz;
  p.pulse_duration = 50e-6;
  p.rabi_frequency = constants::pi / p.pulse_duration;
  p.laser_intensity = 100.0;  // ~0.1 mW/mm^2
  return p;
}

SpeciesParams SpeciesParams::helium4() {
  SpeciesParams p;
  p.label = Species::B;
  p.mass = constants::mass_he4;
  p.transition_frequency = constants::transition_he4_hz;
  p.pulse_duration = 66e-6;
  p.rabi_frequency = constants::pi / p.pulse_duration;
  p.laser_intensity = 100.0;
  return p;
}

GridSpec::GridSpec(std::size_t points_per_dim, double spatial_step, double time_step)
    : points_(points_per_dim), spatial_step_(spatial_step), time_step_(time_step) {
  if (points_ < 8 || points_ % 2 == 0)
    throw ConfigError("grid.points_per_dim must be odd and >= 8 (got " + std::to_string(points_) + ")");
  if (!(spatial_step_ > 0.0)) throw ConfigError("grid.spatial_step_m must be positive");
  if (!(time_step_ > 0.0)) throw ConfigError("grid.time_step_s must be positive");
}

double GridSpec::wavenumber_step() const noexcept {
  return 2.0 * constants::pi / (static_cast<double>(points_) * spatial_step_);
}

double GridSpec::momentum_step() const noexcept { return constants::hbar * wavenumber_step(); }

double GridSpec::coordinate(std::size_t i) const noexcept {
  return (static_cast<double>(i) - static_cast<double>(points_ / 2)) * spatial_step_;
}

std::ptrdiff_t GridSpec::frequency_index(std::size_t i) const noexcept {
  const auto n = static_cast<std::ptrdiff_t>(points_);
  const auto k = static_cast<std::ptrdiff_t>(i);
  return k <= n / 2 ? k : k - n;
}

double CollisionGeometry::mode_transverse() const {
  // Upper A halo: px^2 + (pz - c)^2 = r^2 with pz = p_k/2.
  const double dz = 0.5 * p_k - halo_center_A;
  const double sq = halo_radius * halo_radius - dz * dz;
  if (sq <= 0.0) throw GeometryError("halo does not reach p_z = p_k/2");
  return std::sqrt(sq);
}

CollisionGeometry derive_collision_geometry(const SpeciesParams& species_a,
                                            const SpeciesParams& species_b, double p_k) {
  if (!(species_a.mass > 0.0) || !(species_b.mass > 0.0))
    throw ConfigError("derive_collision_geometry: masses must be positive");
  if (!(p_k > 0.0)) throw ConfigError("derive_collision_geometry: p_k must be positive");
  // B arrives with p_k, A is at rest. In the centre-of-mass frame both move
  // with |p*| = mu * p_k / m_B; boosting back puts A on a circle of radius
  // |p*| centred at m_A/(m_A+m_B) p_k.
  const double total = species_a.mass + species_b.mass;
  const double fraction_a = species_a.mass / total;
  CollisionGeometry g;
  g.p_k = p_k;
  g.halo_center_A = fraction_a * p_k;
  g.halo_center_B = p_k - g.halo_center_A;
  g.halo_radius = fraction_a * p_k;
  return g;
}

double detuning_for_transition(const SpeciesParams& species, double p_initial, double p_final,
                               double lattice_momentum, double tolerance) {
  if (!(species.mass > 0.0)) throw ConfigError("detuning_for_transition: mass must be positive");
  if (std::abs(std::abs(p_final - p_initial) - lattice_momentum) > tolerance) {
    std::ostringstream os;
    os << "transition " << p_initial << " -> " << p_final << " does not match lattice momentum "
       << lattice_momentum;
    throw SequencingError(os.str());
  }
  return (p_final * p_final - p_initial * p_initial) / (2.0 * species.mass * constants::hbar);
}

double default_lattice_momentum(const SpeciesParams& species) {
  const double lambda = constants::speed_of_light / species.transition_frequency;
  return 2.0 * constants::hbar * (2.0 * constants::pi / lambda);
}

Units Units::from(double mass_b, double p_k) {
  Units u;
  const double k = p_k / constants::hbar;
  u.length = 1.0 / k;
  u.mass = mass_b;
  u.time = mass_b / (constants::hbar * k * k);
  u.momentum = p_k;
  u.energy = constants::hbar / u.time;
  return u;
}

const char* to_string(StatePrepMode m) { return m == StatePrepMode::idealized ? "idealized" : "physical"; }
const char* to_string(Envelope e) { return e == Envelope::square ? "square" : "gaussian"; }

CollisionGeometry RunConfig::geometry() const {
  return derive_collision_geometry(params(Species::A), params(Species::B), lattice_momentum);
}

double RunConfig::effective_interaction_width() const {
  return interaction_width > 0.0 ? interaction_width : 2.0 * grid.spatial_step();
}

void RunConfig::validate() const {
  for (const auto& s : species) s.validate();
  if (params(Species::A).label != Species::A || params(Species::B).label != Species::B)
    throw ConfigError("species slots must be labelled A then B");
  if (!(lattice_momentum > 0.0)) throw ConfigError("bragg.lattice_wavevector_per_m must be positive");
  if (!(scattering_length_a34 > 0.0)) throw ConfigError("interaction.scattering_length_m must be positive");
  for (double w : trap_frequency)
    if (!(w > 0.0)) throw ConfigError("trap frequencies must be positive");
  if (interaction_strength < 0.0) throw ConfigError("interaction.strength_j must be non-negative");
  if (!(scattered_fraction_min > 0.0 && scattered_fraction_min < scattered_fraction_max &&
        scattered_fraction_max < 1.0))
    throw ConfigError("interaction scattered fraction window must satisfy 0 < min < max < 1");
  if (!(collision_duration > 0.0)) throw ConfigError("sequence.collision_duration_s must be positive");
  if (!(t1 > 0.0 && t1 < t2 && t2 < total_duration))
    throw ConfigError("sequence times must satisfy 0 < t1_s < t2_s < total_duration_s");
  if (collision_duration > t1) throw ConfigError("sequence.collision_duration_s must end before t1_s");
  for (const auto& a : mirror)
    if (!(a.theta >= 0.0 && a.theta < 2 * constants::pi)) throw ConfigError("mirror theta must lie in [0, 2pi)");
  for (const auto& a : mixing)
    if (!(a.theta >= 0.0 && a.theta < 2 * constants::pi)) throw ConfigError("mixing theta must lie in [0, 2pi)");
  if (!(region_radius_fraction > 0.0)) throw ConfigError("analysis.region_radius_fraction must be positive");
  if (workers == 0) throw ConfigError("output.workers must be at least 1");
}

namespace {

namespace pt = boost::property_tree;

using Setter = std::function<void(RunConfig&, const std::string&)>;

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  }
  if (used != v.size()) throw ConfigError("key '" + key + "': trailing characters in '" + v + "'");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0.0 || std::floor(d) != d) throw ConfigError("key '" + key + "': expected a non-negative integer");
  return static_cast<std::size_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false");
}

struct GridDraft {
  std::size_t points = 0;
  double dx = 0.0;
  double dt = 0.0;
  double periods = 0.0;
};

std::map<std::string, Setter> make_setters(GridDraft& grid) {
  std::map<std::string, Setter> table;
  table["grid.points_per_dim"] = [&grid](RunConfig&, const std::string& v) {
    grid.points = to_size("grid.points_per_dim", v);
  };
  table["grid.spatial_step_m"] = [&grid](RunConfig&, const std::string& v) {
    grid.dx = to_double("grid.spatial_step_m", v);
  };
  table["grid.time_step_s"] = [&grid](RunConfig&, const std::string& v) {
    grid.dt = to_double("grid.time_step_s", v);
  };
  table["grid.lattice_periods_per_box"] = [&grid](RunConfig&, const std::string& v) {
    grid.periods = static_cast<double>(to_size("grid.lattice_periods_per_box", v));
  };
  for (int s = 0; s < 2; ++s) {
    const std::string sec = s == 0 ? "species_a." : "species_b.";
    table[sec + "mass_kg"] = [s, sec](RunConfig& c, const std::string& v) {
      c.species[s].mass = to_double(sec + "mass_kg", v);
    };
    table[sec + "transition_frequency_hz"] = [s, sec](RunConfig& c, const std::string& v) {
      c.species[s].transition_frequency = to_double(sec + "transition_frequency_hz", v);
    };
    table[sec + "rabi_frequency_rad_per_s"] = [s, sec](RunConfig& c, const std::string& v) {
      c.species[s].rabi_frequency = to_double(sec + "rabi_frequency_rad_per_s", v);
    };
    table[sec + "pulse_duration_s"] = [s, sec](RunConfig& c, const std::string& v) {
      c.species[s].pulse_duration = to_double(sec + "pulse_duration_s", v);
    };
    table[sec + "intensity_w_per_m2"] = [s, sec](RunConfig& c, const std::string& v) {
      c.species[s].laser_intensity = to_double(sec + "intensity_w_per_m2", v);
    };
    table[sec + "trap_frequency_rad_per_s"] = [s, sec](RunConfig& c, const std::string& v) {
      c.trap_frequency[s] = to_double(sec + "trap_frequency_rad_per_s", v);
    };
  }
  table["interaction.scattering_length_m"] = [](RunConfig& c, const std::string& v) {
    c.scattering_length_a34 = to_double("interaction.scattering_length_m", v);
  };
  table["interaction.width_m"] = [](RunConfig& c, const std::string& v) {
    c.interaction_width = to_double("interaction.width_m", v);
  };
  table["interaction.strength_j"] = [](RunConfig& c, const std::string& v) {
    c.interaction_strength = to_double("interaction.strength_j", v);
  };
  table["interaction.calibrate"] = [](RunConfig& c, const std::string& v) {
    c.calibrate_interaction = to_bool("interaction.calibrate", v);
  };
  table["interaction.scattered_fraction_min"] = [](RunConfig& c, const std::string& v) {
    c.scattered_fraction_min = to_double("interaction.scattered_fraction_min", v);
  };
  table["interaction.scattered_fraction_max"] = [](RunConfig& c, const std::string& v) {
    c.scattered_fraction_max = to_double("interaction.scattered_fraction_max", v);
  };
  table["bragg.lattice_wavevector_per_m"] = [](RunConfig& c, const std::string& v) {
    c.lattice_momentum = constants::hbar * to_double("bragg.lattice_wavevector_per_m", v);
  };
  table["bragg.envelope"] = [](RunConfig& c, const std::string& v) {
    if (v == "square") c.envelope = Envelope::square;
    else if (v == "gaussian") c.envelope = Envelope::gaussian;
    else throw ConfigError("key 'bragg.envelope': expected square or gaussian");
  };
  table["bragg.split_duration_s"] = [](RunConfig& c, const std::string& v) {
    c.split_duration = to_double("bragg.split_duration_s", v);
  };
  table["sequence.state_prep_mode"] = [](RunConfig& c, const std::string& v) {
    if (v == "idealized") c.state_prep = StatePrepMode::idealized;
    else if (v == "physical") c.state_prep = StatePrepMode::physical;
    else throw ConfigError("key 'sequence.state_prep_mode': expected idealized or physical");
  };
  auto seq = [&](const std::string& key, double RunConfig::*member) {
    table["sequence." + key] = [key, member](RunConfig& c, const std::string& v) {
      c.*member = to_double("sequence." + key, v);
    };
  };
  seq("collision_duration_s", &RunConfig::collision_duration);
  seq("t1_s", &RunConfig::t1);
  seq("t2_s", &RunConfig::t2);
  seq("total_duration_s", &RunConfig::total_duration);
  for (int s = 0; s < 2; ++s) {
    const std::string suffix = s == 0 ? "_a_rad" : "_b_rad";
    table["sequence.mirror_theta" + suffix] = [s, suffix](RunConfig& c, const std::string& v) {
      c.mirror[s].theta = to_double("sequence.mirror_theta" + suffix, v);
    };
    table["sequence.mirror_phi" + suffix] = [s, suffix](RunConfig& c, const std::string& v) {
      c.mirror[s].phi = to_double("sequence.mirror_phi" + suffix, v);
    };
    table["sequence.theta" + suffix] = [s, suffix](RunConfig& c, const std::string& v) {
      c.mixing[s].theta = to_double("sequence.theta" + suffix, v);
    };
    table["sequence.phi" + suffix] = [s, suffix](RunConfig& c, const std::string& v) {
      c.mixing[s].phi = to_double("sequence.phi" + suffix, v);
    };
  }
  table["analysis.region_radius_fraction"] = [](RunConfig& c, const std::string& v) {
    c.region_radius_fraction = to_double("analysis.region_radius_fraction", v);
  };
  table["output.output_dir"] = [](RunConfig& c, const std::string& v) { c.output_dir = v; };
  table["output.checkpoint_interval_steps"] = [](RunConfig& c, const std::string& v) {
    c.checkpoint_interval = to_size("output.checkpoint_interval_steps", v);
  };
  table["output.workers"] = [](RunConfig& c, const std::string& v) {
    c.workers = to_size("output.workers", v);
  };
  table["output.memory_cap_bytes"] = [](RunConfig& c, const std::string& v) {
    c.memory_cap_bytes = to_double("output.memory_cap_bytes", v);
  };
  return table;
}

}  // namespace

RunConfig parse_config(const std::string& text) { return parse_config(text, {}); }

RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }

  std::map<std::string, std::string> values;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      values[section] = body.data();
      continue;
    }
    for (const auto& [key, node] : body) values[section + "." + key] = node.data();
  }
  for (const auto& [k, v] : overrides) values[k] = v;

  RunConfig config;
  GridDraft grid;
  const auto table = make_setters(grid);
  std::vector<std::string> problems;
  bool lattice_set = false;
  for (const auto& [key, value] : values) {
    auto it = table.find(key);
    if (it == table.end()) {
      problems.push_back("unknown key '" + key + "'");
      continue;
    }
    if (key == "bragg.lattice_wavevector_per_m") lattice_set = true;
    try {
      it->second(config, value);
    } catch (const ConfigError& e) {
      problems.push_back(e.what());
    }
  }
  const bool has_dx = values.count("grid.spatial_step_m") != 0;
  const bool has_periods = values.count("grid.lattice_periods_per_box") != 0;
  if (has_dx == has_periods)
    problems.push_back("exactly one of 'grid.spatial_step_m' and 'grid.lattice_periods_per_box' is required");
  for (const char* required : {"grid.points_per_dim", "grid.time_step_s",
                               "species_a.trap_frequency_rad_per_s", "species_b.trap_frequency_rad_per_s",
                               "sequence.collision_duration_s", "sequence.t1_s", "sequence.t2_s",
                               "sequence.total_duration_s"}) {
    if (!values.count(required)) problems.push_back(std::string("missing key '") + required + "'");
  }
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  if (!lattice_set) config.lattice_momentum = default_lattice_momentum(config.params(Species::B));
  if (has_periods) {
    if (!(grid.periods > 0.0) || grid.points == 0)
      throw ConfigError("grid.lattice_periods_per_box must be a positive integer");
    const double k = config.lattice_momentum / constants::hbar;
    grid.dx = grid.periods * 2.0 * constants::pi / (static_cast<double>(grid.points) * k);
  }
  config.grid = GridSpec(grid.points, grid.dx, grid.dt);
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_config_text(const RunConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "[grid]\npoints_per_dim=" << c.grid.points_per_dim() << "\nspatial_step_m=" << c.grid.spatial_step()
     << "\ntime_step_s=" << c.grid.time_step() << "\n";
  for (int s = 0; s < 2; ++s) {
    const auto& p = c.species[s];
    os << (s == 0 ? "[species_a]\n" : "[species_b]\n") << "intensity_w_per_m2=" << p.laser_intensity
       << "\nmass_kg=" << p.mass << "\npulse_duration_s=" << p.pulse_duration
       << "\nrabi_frequency_rad_per_s=" << p.rabi_frequency << "\ntrap_frequency_rad_per_s="
       << c.trap_frequency[s] << "\ntransition_frequency_hz=" << p.transition_frequency << "\n";
  }
  os << "[interaction]\ncalibrate=" << (c.calibrate_interaction ? "true" : "false")
     << "\nscattered_fraction_max=" << c.scattered_fraction_max
     << "\nscattered_fraction_min=" << c.scattered_fraction_min
     << "\nscattering_length_m=" << c.scattering_length_a34 << "\nstrength_j=" << c.interaction_strength
     << "\nwidth_m=" << c.interaction_width << "\n";
  os << "[bragg]\nenvelope=" << to_string(c.envelope)
     << "\nlattice_wavevector_per_m=" << c.lattice_momentum / constants::hbar
     << "\nsplit_duration_s=" << c.split_duration << "\n";
  os << "[sequence]\ncollision_duration_s=" << c.collision_duration;
  for (int s = 0; s < 2; ++s) {
    const char* suf = s == 0 ? "_a_rad=" : "_b_rad=";
    os << "\nmirror_phi" << suf << c.mirror[s].phi << "\nmirror_theta" << suf << c.mirror[s].theta
       << "\nphi" << suf << c.mixing[s].phi << "\ntheta" << suf << c.mixing[s].theta;
  }
  os << "\nstate_prep_mode=" << to_string(c.state_prep) << "\nt1_s=" << c.t1 << "\nt2_s=" << c.t2
     << "\ntotal_duration_s=" << c.total_duration << "\n";
  os << "[analysis]\nregion_radius_fraction=" << c.region_radius_fraction << "\n";
  // Output location, checkpointing and worker count do not change the physics.
  return os.str();
}

std::string config_hash(const RunConfig& config) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical_config_text(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bellsim
