#include "bellsim/halo_analysis.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "bellsim/errors.hpp"
#include "bellsim/parallel.hpp"

namespace bellsim {

std::array<ModeRegion, 4> default_mode_regions(const CollisionGeometry& geometry, const GridSpec& grid,
                                               double radius_fraction) {
  if (!(radius_fraction > 0.0)) throw GeometryError("region radius fraction must be positive");
  const double px = geometry.mode_transverse();
  const double pz = 0.5 * geometry.p_k;
  const double dp = grid.momentum_step();
  const double r = std::max(radius_fraction * geometry.halo_radius, dp / std::sqrt(2.0));
  std::array<ModeRegion, 4> regions{
      ModeRegion{"A_up", Species::A, -px, pz, r}, ModeRegion{"A_down", Species::A, -px, -pz, r},
      ModeRegion{"B_up", Species::B, px, pz, r}, ModeRegion{"B_down", Species::B, px, -pz, r}};
  const double separation = 2.0 * pz;
  if (2.0 * r >= separation) {
    std::ostringstream os;
    os << "mode regions of radius " << r / geometry.p_k << " p_k overlap (centres " << separation / geometry.p_k
       << " p_k apart); use a larger grid or a smaller region_radius_fraction";
    throw GeometryError(os.str());
  }
  const double nyquist = dp * static_cast<double>(grid.points_per_dim() / 2);
  for (const auto& g : regions)
    if (std::abs(g.center_x) + r > nyquist || std::abs(g.center_z) + r > nyquist)
      throw GeometryError("mode region " + g.label + " extends past the grid's momentum range");
  return regions;
}

std::array<double, 4> CorrelationTable::normalized() const {
  const double t = total();
  return {raw[0] / t, raw[1] / t, raw[2] / t, raw[3] / t};
}

namespace {

const WaveFunction4D& in_momentum(const WaveFunction4D& psi, std::optional<WaveFunction4D>& holder,
                                  std::size_t workers) {
  if (psi.domain() == Domain::momentum) return psi;
  holder = to_momentum_space(psi, workers);
  return *holder;
}

// Flat (i * N + j) plane indices, in FFT storage order, inside a region.
std::vector<std::size_t> cells_in(const WaveFunction4D& psi, const ModeRegion& region) {
  std::vector<std::size_t> out;
  const std::size_t n = psi.extent();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (region.contains(psi.momentum_at(i), psi.momentum_at(j))) out.push_back(i * n + j);
  return out;
}

}  // namespace

CorrelationTable joint_weights(const WaveFunction4D& psi, const std::array<ModeRegion, 4>& regions,
                               std::size_t workers) {
  std::optional<WaveFunction4D> holder;
  const WaveFunction4D& phi = in_momentum(psi, holder, workers);
  std::array<std::vector<std::size_t>, 4> cells;
  for (int r = 0; r < 4; ++r) {
    cells[static_cast<std::size_t>(r)] = cells_in(phi, regions[static_cast<std::size_t>(r)]);
    if (cells[static_cast<std::size_t>(r)].empty())
      throw AnalysisError("mode region " + regions[static_cast<std::size_t>(r)].label + " contains no grid point");
  }
  const std::size_t plane = phi.extent() * phi.extent();
  CorrelationTable table;
  for (int a = 0; a < 2; ++a) {
    const auto& ca = cells[static_cast<std::size_t>(a == 0 ? kAUp : kADown)];
    for (int b = 0; b < 2; ++b) {
      const auto& cb = cells[static_cast<std::size_t>(b == 0 ? kBUp : kBDown)];
      std::vector<double> partial(ca.size(), 0.0);
      parallel_for(ca.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t u = begin; u < end; ++u) {
          const cplx* row = phi.data() + ca[u] * plane;
          double s = 0.0;
          for (std::size_t v : cb) s += std::norm(row[v]);
          partial[u] = s;
        }
      });
      double w = 0.0;
      for (double p : partial) w += p;
      table.raw[static_cast<std::size_t>(2 * a + b)] = w;
    }
  }
  if (table.total() < 1e-12)
    throw AnalysisError("mode regions hold no population (total weight " + std::to_string(table.total()) + ")");
  return table;
}

double correlator_from_table(const CorrelationTable& table) {
  const auto w = table.normalized();
  return w[0] + w[3] - w[1] - w[2];
}

double chsh_from_runs(const std::array<CorrelationTable, 4>& tables) {
  return correlator_from_table(tables[0]) - correlator_from_table(tables[1]) + correlator_from_table(tables[2]) +
         correlator_from_table(tables[3]);
}

Field2D slice_joint_density(const WaveFunction4D& psi_momentum, const SliceSelection& selection,
                            std::size_t workers) {
  if (psi_momentum.domain() != Domain::momentum)
    throw AnalysisError("slice_joint_density needs a momentum-space field");
  const std::size_t n = psi_momentum.extent();
  const double dp = psi_momentum.grid().momentum_step();
  const double hw = selection.half_width > 0.0 ? selection.half_width : 0.5 * dp;
  std::vector<std::size_t> xa, xb;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = psi_momentum.momentum_at(i);
    if (std::abs(p - selection.px_a) <= hw) xa.push_back(i);
    if (std::abs(p - selection.px_b) <= hw) xb.push_back(i);
  }
  if (xa.empty() || xb.empty()) throw AnalysisError("transverse slice window contains no grid point");
  Field2D out;
  out.n = n;
  out.step = dp;
  out.values.assign(n * n, 0.0);
  parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const std::size_t row = fft_to_centred(j, n);
      for (std::size_t l = 0; l < n; ++l) {
        double s = 0.0;
        for (std::size_t i : xa)
          for (std::size_t k : xb) s += std::norm(psi_momentum(i, j, k, l));
        out.at(row, fft_to_centred(l, n)) = s;
      }
    }
  });
  return out;
}

RingFit fit_ring(const Field2D& density, const std::function<bool(double, double)>& keep,
                 double threshold_fraction) {
  double peak = 0.0;
  for (std::size_t i = 0; i < density.n; ++i)
    for (std::size_t j = 0; j < density.n; ++j)
      if (keep(density.coordinate(i), density.coordinate(j))) peak = std::max(peak, density.at(i, j));
  if (!(peak > 0.0)) throw AnalysisError("ring fit: no population in the selected area");
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  RingFit fit;
  std::vector<std::array<double, 3>> used;
  for (std::size_t i = 0; i < density.n; ++i)
    for (std::size_t j = 0; j < density.n; ++j) {
      const double x = density.coordinate(i), z = density.coordinate(j);
      const double w = density.at(i, j);
      if (!keep(x, z) || w < threshold_fraction * peak) continue;
      const Eigen::Vector3d row(x, z, 1.0);
      a += w * row * row.transpose();
      b += w * row * -(x * x + z * z);
      used.push_back({x, z, w});
    }
  if (used.size() < 3) throw AnalysisError("ring fit needs at least three cells above threshold");
  const Eigen::Vector3d c = a.ldlt().solve(b);
  fit.center_x = -0.5 * c[0];
  fit.center_z = -0.5 * c[1];
  fit.radius = std::sqrt(std::max(0.0, fit.center_x * fit.center_x + fit.center_z * fit.center_z - c[2]));
  double num = 0.0, den = 0.0;
  for (const auto& [x, z, w] : used) {
    const double d = std::hypot(x - fit.center_x, z - fit.center_z) - fit.radius;
    num += w * d * d;
    den += w;
  }
  fit.rms = std::sqrt(num / den);
  fit.points = used.size();
  return fit;
}

VisibilityFit fit_visibility(const std::vector<double>& theta_sums, const std::vector<double>& correlators) {
  if (theta_sums.size() != correlators.size()) throw AnalysisError("visibility fit: mismatched inputs");
  double ec = 0.0, cc = 0.0;
  VisibilityFit fit;
  for (std::size_t i = 0; i < theta_sums.size(); ++i) {
    if (!std::isfinite(correlators[i])) continue;
    const double c = std::cos(theta_sums[i]);
    ec += correlators[i] * c;
    cc += c * c;
    ++fit.points;
  }
  if (fit.points == 0 || cc == 0.0) throw AnalysisError("visibility fit: no usable points");
  fit.visibility = ec / cc;
  double r2 = 0.0;
  for (std::size_t i = 0; i < theta_sums.size(); ++i) {
    if (!std::isfinite(correlators[i])) continue;
    const double r = correlators[i] - fit.visibility * std::cos(theta_sums[i]);
    r2 += r * r;
  }
  fit.rms = std::sqrt(r2 / static_cast<double>(fit.points));
  return fit;
}

ScanPoint evaluate_setting(const SequenceResult& prefix, const RunConfig& config, const Setting& setting,
                           const std::array<ModeRegion, 4>& regions) {
  ScanPoint point;
  point.table.theta_a = setting.theta_a;
  point.table.theta_b = setting.theta_b;
  point.table.phi_a = setting.phi_a;
  point.table.phi_b = setting.phi_b;
  try {
    RunConfig c = config;
    c.mixing = {PulseAngles{setting.theta_a, setting.phi_a}, PulseAngles{setting.theta_b, setting.phi_b}};
    SequenceResult run;
    run.state = prefix.state;
    run.calibration = prefix.calibration;
    run.stages = prefix.stages;
    finish_sequence(run, c);
    const auto table = joint_weights(run.state, regions, config.workers);
    point.table.raw = table.raw;
    point.correlator = correlator_from_table(point.table);
    point.ok = true;
  } catch (const Error& e) {
    point.error = e.what();
    point.correlator = std::nan("");
  }
  return point;
}

ScanResult scan_settings(const RunConfig& config, const std::vector<Setting>& settings,
                         const ScanOptions& options) {
  if (settings.empty()) throw ConfigError("scan needs at least one setting");
  ScanResult result;
  result.prefix = run_prefix(config, options.run);
  const auto regions = default_mode_regions(config.geometry(), config.grid, config.region_radius_fraction);
  result.points.resize(settings.size());
  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto worker = [&] {
    for (std::size_t i = next++; i < settings.size(); i = next++) {
      result.points[i] = evaluate_setting(result.prefix, config, settings[i], regions);
      if (options.on_point) {
        std::lock_guard lock(report);
        options.on_point(result.points[i]);
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.scan_workers, settings.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<double> sums, es;
  for (const auto& p : result.points) {
    sums.push_back(p.table.theta_a + p.table.theta_b);
    es.push_back(p.correlator);
  }
  try {
    result.fit = fit_visibility(sums, es);
  } catch (const AnalysisError&) {
    result.fit = VisibilityFit{std::nan(""), std::nan(""), 0};
  }
  return result;
}

ScanResult scan_correlator(const RunConfig& config, const std::vector<double>& theta_a,
                           const std::vector<double>& theta_b, const ScanOptions& options) {
  if (theta_a.empty() || theta_b.empty()) throw ConfigError("scan needs non-empty theta lists");
  std::vector<Setting> settings;
  for (double a : theta_a)
    for (double b : theta_b) settings.push_back({a, b, config.mixing[0].phi, config.mixing[1].phi});
  return scan_settings(config, settings, options);
}

}  // namespace bellsim
