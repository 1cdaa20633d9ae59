#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "bellsim/propagator.hpp"

namespace bellsim {

// When no potential couples the two particles, the Strang step is a tensor
// product of four 1D steps, and so is any sequence of such steps. This class
// records the 1D step sequence per axis as a dense N x N unitary (built by
// propagating all N basis vectors at once) and then applies the four
// unitaries to a 4D field with matrix products.
//
// The result agrees with the same steps taken by SplitStepPropagator up to
// rounding; tests/unit/test_axis_propagator.cpp checks this.
class AxisPropagator {
 public:
  AxisPropagator(const GridSpec& grid, std::array<double, 2> masses, const Units& units);

  // Appends round(duration/dt) Strang steps starting at t0. Throws if any
  // potential has a pair term.
  void record(const std::vector<PotentialField>& potentials, double t0, double duration, double dt);
  // Appends exact free flight.
  void record_free(double duration);

  double elapsed() const noexcept { return elapsed_; }
  const Eigen::MatrixXcd& unitary(int axis) const { return u_[static_cast<std::size_t>(axis)]; }

  // psi <- (U0 x U1 x U2 x U3) psi; advances psi's clock by elapsed().
  void apply(WaveFunction4D& psi, std::size_t workers = 1) const;

  void reset();

 private:
  void kinetic(int axis, double dt);

  GridSpec grid_;
  std::array<double, 2> masses_;
  Units units_;
  double elapsed_ = 0.0;
  std::array<Eigen::MatrixXcd, 4> u_;
  ComplexBuffer work_;
  fft::Transform fft_;
};

// Multiplies one axis of the field by an N x N matrix: psi_{..a'..} = sum_a M_{a'a} psi_{..a..}.
void apply_along_axis(WaveFunction4D& psi, int axis, const Eigen::MatrixXcd& m, std::size_t workers = 1);

}  // namespace bellsim
