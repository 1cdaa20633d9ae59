#include "bellsim/bragg_ladder.hpp"

#include <Eigen/Dense>

#include <boost/math/tools/roots.hpp>

#include <cmath>

#include "bellsim/errors.hpp"

namespace bellsim::ladder {

std::vector<cplx> evolve(const Chain& chain, std::vector<cplx> amplitudes, const PulseSpec& pulse,
                         std::size_t steps) {
  if (amplitudes.size() != chain.size()) throw Error("ladder::evolve: amplitude count does not match chain");
  if (!(chain.mass > 0.0)) throw Error("ladder::evolve: mass must be positive");
  pulse.validate();
  steps = std::max<std::size_t>(steps, 1);
  const auto dim = static_cast<Eigen::Index>(chain.size());
  const double pk = constants::hbar * pulse.lattice_wavevector;
  const double h = pulse.duration / static_cast<double>(steps);
  const double phase_per_joule = h / constants::hbar;
  const EnvelopeFn env = pulse.envelope_fn();

  Eigen::VectorXd kinetic(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double p = chain.p0 + static_cast<double>(i - chain.half_width) * pk;
    kinetic[i] = p * p / (2.0 * chain.mass) * phase_per_joule;
  }
  Eigen::VectorXcd psi = Eigen::Map<const Eigen::VectorXcd>(amplitudes.data(), dim);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dim);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = pulse.start_time + (static_cast<double>(s) + 0.5) * h;
    const double depth = env(t) * phase_per_joule;
    // <n+1| V cos(kz - delta t' - phi) |n> = V/2 exp(-i(delta t' + phi))
    const cplx c = 0.5 * depth * std::polar(1.0, -(pulse.detuning * (t - pulse.start_time) + pulse.phi));
    a.setZero();
    a.diagonal() = kinetic.cast<cplx>();
    for (Eigen::Index i = 0; i + 1 < dim; ++i) {
      a(i + 1, i) = c;
      a(i, i + 1) = std::conj(c);
    }
    solver.compute(a);
    const Eigen::VectorXcd phases =
        solver.eigenvalues().unaryExpr([](double w) { return std::polar(1.0, -w); });
    psi = solver.eigenvectors() * (phases.asDiagonal() * (solver.eigenvectors().adjoint() * psi));
  }
  std::vector<cplx> out(chain.size());
  for (Eigen::Index i = 0; i < dim; ++i) out[static_cast<std::size_t>(i)] = psi[i];
  return out;
}

double transfer(const Chain& chain, int n_from, int n_to, const PulseSpec& pulse, std::size_t steps) {
  if (std::abs(n_from) > chain.half_width || std::abs(n_to) > chain.half_width)
    throw Error("ladder::transfer: order outside the chain");
  std::vector<cplx> amp(chain.size(), cplx{});
  amp[chain.index_of(n_from)] = 1.0;
  const auto out = evolve(chain, amp, pulse, steps);
  return std::norm(out[chain.index_of(n_to)]);
}

double calibrate_area_scale(const Chain& chain, int n_from, int n_to, PulseSpec pulse, double* best_transfer) {
  pulse.theta = constants::pi;
  auto f = [&](double scale) {
    pulse.area_scale = scale;
    return transfer(chain, n_from, n_to, pulse, 1000);
  };
  // Golden-section search for the first transfer maximum.
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.6, hi = 1.6;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 40 && hi - lo > 1e-5; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  const double scale = 0.5 * (lo + hi);
  if (best_transfer) *best_transfer = f(scale);
  return scale;
}

double area_scale_for_theta(const Chain& chain, int n_from, int n_to, PulseSpec pulse, double pi_scale) {
  const double two_pi = 2.0 * constants::pi;
  const double theta = pulse.theta;
  const double reduced = std::fmod(theta, two_pi);
  const double half_turns = theta / constants::pi;
  // Whole multiples of pi sit on a transfer extremum; the pi calibration holds there.
  if (std::abs(half_turns - std::round(half_turns)) < 1e-9 || !(theta > 0.0)) return pi_scale;
  const double target = std::pow(std::sin(0.5 * reduced), 2);
  const double j = std::floor(half_turns);
  const double lo = pi_scale * (j + 0.02) / half_turns;
  const double hi = pi_scale * (j + 0.98) / half_turns;
  auto f = [&](double scale) {
    pulse.area_scale = scale;
    return transfer(chain, n_from, n_to, pulse, 1000) - target;
  };
  const double f_lo = f(lo), f_hi = f(hi);
  if (f_lo * f_hi > 0.0) return pi_scale;
  std::uintmax_t iterations = 40;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                        boost::math::tools::eps_tolerance<double>(30), iterations);
  return 0.5 * (a + b);
}

}  // namespace bellsim::ladder
