#include "bellsim/propagator.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "bellsim/errors.hpp"
#include "bellsim/parallel.hpp"
#include "bellsim/simd/kernels.hpp"

namespace bellsim {

const char* to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::trap: return "trap";
    case PotentialKind::bragg_A: return "bragg_A";
    case PotentialKind::bragg_B: return "bragg_B";
    case PotentialKind::interaction: return "interaction";
  }
  return "?";
}

PotentialField& PotentialField::add_axis_term(int axis, AxisFn energy) {
  if (axis < 0 || axis > 3) throw Error("potential axis must be 0..3");
  axis_terms_.push_back({axis, std::move(energy)});
  return *this;
}

PotentialField& PotentialField::set_pair_term(PairFn energy) {
  pair_ = std::move(energy);
  return *this;
}

double PotentialField::evaluate(const std::array<double, 4>& r, double t) const {
  double v = 0.0;
  for (const auto& term : axis_terms_) v += term.energy(r[static_cast<std::size_t>(term.axis)], t);
  if (pair_) v += (*pair_)(r[0] - r[2], r[1] - r[3]);
  return v;
}

PotentialField harmonic_trap(std::array<double, 2> masses, std::array<double, 2> trap_frequencies) {
  PotentialField f(PotentialKind::trap, "trap");
  for (int axis = 0; axis < 4; ++axis) {
    const std::size_t s = static_cast<std::size_t>(axis / 2);
    const double k = 0.5 * masses[s] * trap_frequencies[s] * trap_frequencies[s];
    f.add_axis_term(axis, [k](double x, double) { return k * x * x; });
  }
  return f;
}

EnvelopeFn square_envelope(double depth, double start, double duration) {
  return [=](double t) { return (t >= start && t < start + duration) ? depth : 0.0; };
}

EnvelopeFn gaussian_envelope(double depth, double start, double duration) {
  const double centre = start + 0.5 * duration;
  const double sigma = duration / 6.0;
  return [=](double t) {
    if (t < start || t >= start + duration) return 0.0;
    const double u = (t - centre) / sigma;
    return depth * std::exp(-0.5 * u * u);
  };
}

PotentialField bragg_potential(Species target, EnvelopeFn envelope, double wavevector,
                               double detuning, double phi, double start) {
  const bool is_a = target == Species::A;
  PotentialField f(is_a ? PotentialKind::bragg_A : PotentialKind::bragg_B,
                   is_a ? "bragg_A" : "bragg_B");
  f.add_axis_term(is_a ? Axis::z3 : Axis::z4, [=](double z, double t) {
    const double depth = envelope(t);
    if (depth == 0.0) return 0.0;
    return depth * std::cos(wavevector * z - detuning * (t - start) - phi);
  });
  return f;
}

PotentialField interaction_potential(double strength, double width) {
  if (!(width > 0.0)) throw ConfigError("interaction width must be positive");
  PotentialField f(PotentialKind::interaction, "interaction");
  const double inv = 1.0 / (2.0 * width * width);
  f.set_pair_term([=](double dx, double dz) { return strength * std::exp(-(dx * dx + dz * dz) * inv); });
  return f;
}

SplitStepPropagator::SplitStepPropagator(const GridSpec& grid, std::array<double, 2> masses,
                                         const Units& units, std::size_t workers)
    : grid_(grid),
      masses_(masses),
      units_(units),
      workers_(workers == 0 ? 1 : workers),
      fft_(4, grid.points_per_dim(), 1, workers_) {
  if (!(masses[0] > 0.0) || !(masses[1] > 0.0)) throw ConfigError("propagator masses must be positive");
}

void SplitStepPropagator::build_kinetic_tables(double dt) {
  const std::size_t n = grid_.points_per_dim();
  const double dx = grid_.spatial_step() / units_.length;
  const double tau = dt / units_.time;
  const double dk = 2.0 * constants::pi / (static_cast<double>(n) * dx);
  auto axis_phase = [&](std::size_t s) {
    const double m = masses_[s] / units_.mass;
    std::vector<double> ph(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double k = static_cast<double>(grid_.frequency_index(i)) * dk;
      ph[i] = 0.5 * k * k / m * tau;
    }
    return ph;
  };
  const auto pa = axis_phase(0);
  const auto pb = axis_phase(1);
  const double n2 = static_cast<double>(n * n);
  const double norm = 1.0 / (n2 * n2);
  kin_outer_.assign(n * n, cplx{});
  kin_inner_.assign(n * n, cplx{});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      kin_outer_[i * n + j] = std::polar(norm, -(pa[i] + pa[j]));
      kin_inner_[i * n + j] = std::polar(1.0, -(pb[i] + pb[j]));
    }
  kinetic_dt_ = dt;
}

void SplitStepPropagator::apply_kinetic(WaveFunction4D& psi, double dt) {
  if (dt != kinetic_dt_ || kin_outer_.empty()) build_kinetic_tables(dt);
  const std::size_t n = grid_.points_per_dim();
  const std::size_t n2 = n * n;
  const auto& k = simd::active();
  fft_.forward(psi.data());
  parallel_for(n, workers_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t ij = i * n + j;
        k.mul_scaled(psi.data() + ij * n2, kin_inner_.data(), kin_outer_[ij], n2);
      }
  });
  fft_.backward(psi.data());
}

void SplitStepPropagator::apply_potentials(WaveFunction4D& psi,
                                           const std::vector<PotentialField>& potentials,
                                           double t_mid, double half_dt) {
  const std::size_t n = grid_.points_per_dim();
  const double scale = (half_dt / units_.time) / units_.energy;  // V * scale = V dt/(2 hbar)

  std::array<std::vector<double>, 4> axis_v;
  for (auto& v : axis_v) v.assign(n, 0.0);
  std::vector<double> pair_v;
  bool have_pair = false;
  const std::size_t span = 2 * n - 1;
  for (const auto& pot : potentials) {
    for (const auto& term : pot.axis_terms()) {
      auto& v = axis_v[static_cast<std::size_t>(term.axis)];
      for (std::size_t i = 0; i < n; ++i) v[i] += term.energy(grid_.coordinate(i), t_mid);
    }
    if (pot.has_pair_term()) {
      if (!have_pair) pair_v.assign(span * span, 0.0);
      have_pair = true;
      const auto& fn = *pot.pair_term();
      const auto half = static_cast<std::ptrdiff_t>(n / 2);
      const auto nn = static_cast<std::ptrdiff_t>(n);
      auto wrap = [&](std::ptrdiff_t d) { return d > half ? d - nn : (d < -half ? d + nn : d); };
      // Row r holds x3 - x4 = r - (N-1) cells; column c holds z4 - z3 = c - (N-1)
      // so that successive z4 indices read successive entries.
      for (std::size_t r = 0; r < span; ++r) {
        const double dx = static_cast<double>(wrap(static_cast<std::ptrdiff_t>(r) - (nn - 1))) * grid_.spatial_step();
        for (std::size_t c = 0; c < span; ++c) {
          const double dz = -static_cast<double>(wrap(static_cast<std::ptrdiff_t>(c) - (nn - 1))) * grid_.spatial_step();
          pair_v[r * span + c] += fn(dx, dz);
        }
      }
    }
  }

  double vmax = 0.0;
  std::array<std::vector<cplx>, 4> e;
  for (std::size_t a = 0; a < 4; ++a) {
    double m = 0.0;
    e[a].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      m = std::max(m, std::abs(axis_v[a][i]));
      e[a][i] = std::polar(1.0, -axis_v[a][i] * scale);
    }
    vmax += m;
  }
  std::vector<cplx> pair_e;
  if (have_pair) {
    double m = 0.0;
    pair_e.resize(pair_v.size());
    for (std::size_t q = 0; q < pair_v.size(); ++q) {
      m = std::max(m, std::abs(pair_v[q]));
      pair_e[q] = std::polar(1.0, -pair_v[q] * scale);
    }
    vmax += m;
  }
  last_max_phase_ = 2.0 * vmax * std::abs(scale);

  const auto& kern = simd::active();
  parallel_for(n, workers_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const cplx eij = e[0][i] * e[1][j];
        for (std::size_t k = 0; k < n; ++k) {
          cplx* row = &psi(i, j, k, 0);
          const cplx s = eij * e[2][k];
          if (have_pair) {
            const std::size_t r = i + n - 1 - k;
            kern.mul2_scaled(row, e[3].data(), pair_e.data() + r * span + (n - 1 - j), s, n);
          } else {
            kern.mul_scaled(row, e[3].data(), s, n);
          }
        }
      }
  });
}

void SplitStepPropagator::step(WaveFunction4D& psi, const std::vector<PotentialField>& potentials,
                               double dt) {
  if (psi.domain() != Domain::position) throw Error("step: field must be in the position domain");
  if (psi.extent() != grid_.points_per_dim()) throw Error("step: field does not match propagator grid");
  if (dt == 0.0 || !std::isfinite(dt)) throw Error("step: dt must be finite and non-zero");
  const double t_mid = psi.time() + 0.5 * dt;
  last_max_phase_ = 0.0;
  if (!potentials.empty()) apply_potentials(psi, potentials, t_mid, 0.5 * dt);
  apply_kinetic(psi, dt);
  if (!potentials.empty()) apply_potentials(psi, potentials, t_mid, 0.5 * dt);
  psi.set_time(psi.time() + dt);

  const double s = norm(psi, workers_);
  if (!std::isfinite(s)) {
    std::ostringstream os;
    os << "field became non-finite at t = " << psi.time() << " s; max |V| dt / hbar = " << last_max_phase_;
    throw NumericalBlowupError(os.str(), last_max_phase_);
  }
}

void SplitStepPropagator::evolve(WaveFunction4D& psi, const std::vector<PotentialField>& potentials,
                                 double duration, double dt) {
  if (duration <= 0.0) return;
  if (!(dt > 0.0)) throw Error("evolve: dt must be positive");
  const auto steps = std::max<long long>(1, std::llround(duration / dt));
  const double h = duration / static_cast<double>(steps);
  for (long long s = 0; s < steps; ++s) step(psi, potentials, h);
}

void SplitStepPropagator::free_evolve(WaveFunction4D& psi, double duration) {
  if (psi.domain() != Domain::position) throw Error("free_evolve: field must be in the position domain");
  if (duration == 0.0) return;
  apply_kinetic(psi, duration);
  psi.set_time(psi.time() + duration);
}

WaveFunction4D ground_state(const GridSpec& grid, std::array<double, 2> trap_frequencies,
                            std::array<double, 2> masses) {
  const std::size_t n = grid.points_per_dim();
  std::array<std::vector<cplx>, 4> factors;
  for (std::size_t s = 0; s < 2; ++s) {
    if (!(trap_frequencies[s] > 0.0)) throw ConfigError("trap frequencies must be positive");
    if (!(masses[s] > 0.0)) throw ConfigError("masses must be positive");
    const double sigma = std::sqrt(constants::hbar / (2.0 * masses[s] * trap_frequencies[s]));
    const double cells = sigma / grid.spatial_step();
    if (cells < 2.0 || cells > static_cast<double>(n) / 4.0) {
      std::ostringstream os;
      os << "ground state of species " << (s == 0 ? "A" : "B") << " spans " << cells
         << " grid cells; need between 2 and " << static_cast<double>(n) / 4.0;
      throw ResolutionError(os.str());
    }
    std::vector<cplx> f(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid.coordinate(i);
      f[i] = std::exp(-x * x / (4.0 * sigma * sigma));
    }
    factors[2 * s] = f;
    factors[2 * s + 1] = f;
  }
  return product_state(grid, masses, factors);
}

namespace {

WaveFunction4D transform_copy(const WaveFunction4D& psi, bool forward, std::size_t workers) {
  WaveFunction4D out = psi;
  const std::size_t n = psi.extent();
  fft::Transform t(4, n, 1, workers);
  if (forward)
    t.forward(out.data());
  else
    t.backward(out.data());
  const double s = 1.0 / static_cast<double>(n * n);
  simd::active().scale(out.data(), cplx(s, 0.0), out.size());
  out.set_domain(forward ? Domain::momentum : Domain::position);
  return out;
}

}  // namespace

WaveFunction4D to_momentum_space(const WaveFunction4D& psi, std::size_t workers) {
  if (psi.domain() == Domain::momentum) return psi;
  return transform_copy(psi, true, workers);
}

WaveFunction4D to_position_space(const WaveFunction4D& psi, std::size_t workers) {
  if (psi.domain() == Domain::position) return psi;
  return transform_copy(psi, false, workers);
}

double Field2D::total() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

Field2D momentum_density(const WaveFunction4D& psi, Species species, std::size_t workers) {
  std::optional<WaveFunction4D> holder;
  if (psi.domain() != Domain::momentum) holder = to_momentum_space(psi, workers);
  const WaveFunction4D& mom = holder ? *holder : psi;
  const std::size_t n = mom.extent();
  const std::size_t n2 = n * n;
  std::vector<double> raw(n2, 0.0);
  const auto& k = simd::active();
  if (species == Species::A) {
    parallel_for(n2, workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t ij = begin; ij < end; ++ij) raw[ij] = k.sum_abs2(mom.data() + ij * n2, n2);
    });
  } else {
    std::vector<std::vector<double>> partial(n, std::vector<double>(n2, 0.0));
    parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i)
        for (std::size_t j = 0; j < n; ++j) k.accumulate_abs2(partial[i].data(), mom.data() + (i * n + j) * n2, n2);
    });
    for (const auto& p : partial)
      for (std::size_t q = 0; q < n2; ++q) raw[q] += p[q];
  }
  Field2D out;
  out.n = n;
  out.step = psi.grid().momentum_step();
  out.values.assign(n2, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) out.at(fft_to_centred(r, n), fft_to_centred(c, n)) = raw[r * n + c];
  return out;
}

}  // namespace bellsim
