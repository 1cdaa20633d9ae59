#include "bellsim/axis_propagator.hpp"

#include <cmath>

#include "bellsim/errors.hpp"
#include "bellsim/parallel.hpp"

namespace bellsim {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
constexpr std::size_t kChunk = 2048;

}  // namespace

AxisPropagator::AxisPropagator(const GridSpec& grid, std::array<double, 2> masses, const Units& units)
    : grid_(grid),
      masses_(masses),
      units_(units),
      work_(grid.points_per_dim() * grid.points_per_dim()),
      fft_(1, grid.points_per_dim(), grid.points_per_dim()) {
  reset();
}

void AxisPropagator::reset() {
  const auto n = static_cast<Eigen::Index>(grid_.points_per_dim());
  for (auto& u : u_) u = Eigen::MatrixXcd::Identity(n, n);
  elapsed_ = 0.0;
}

// Column c of u_ is the image of basis vector c, so left-multiplying by the
// step operator updates every column at once.
void AxisPropagator::kinetic(int axis, double dt) {
  const std::size_t n = grid_.points_per_dim();
  auto& u = u_[static_cast<std::size_t>(axis)];
  std::copy(u.data(), u.data() + n * n, work_.begin());
  fft_.forward(work_.data());
  const double m = masses_[static_cast<std::size_t>(axis / 2)] / units_.mass;
  const double tau = dt / units_.time;
  const double dk = 2.0 * constants::pi / (static_cast<double>(n) * grid_.spatial_step() / units_.length);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(grid_.frequency_index(i)) * dk;
    const cplx f = std::polar(1.0 / static_cast<double>(n), -0.5 * k * k / m * tau);
    for (std::size_t c = 0; c < n; ++c) work_[c * n + i] *= f;
  }
  fft_.backward(work_.data());
  std::copy(work_.begin(), work_.end(), u.data());
}

void AxisPropagator::record(const std::vector<PotentialField>& potentials, double t0, double duration,
                            double dt) {
  for (const auto& p : potentials)
    if (p.has_pair_term()) throw Error("AxisPropagator cannot represent the pair potential '" + p.name() + "'");
  if (duration <= 0.0) return;
  if (!(dt > 0.0)) throw Error("AxisPropagator::record: dt must be positive");
  const std::size_t n = grid_.points_per_dim();
  const auto steps = std::max<long long>(1, std::llround(duration / dt));
  const double h = duration / static_cast<double>(steps);
  const double scale = (0.5 * h / units_.time) / units_.energy;

  std::array<bool, 4> has_terms{};
  for (const auto& p : potentials)
    for (const auto& t : p.axis_terms()) has_terms[static_cast<std::size_t>(t.axis)] = true;

  std::vector<double> v(n);
  Eigen::VectorXcd e(static_cast<Eigen::Index>(n));
  for (int axis = 0; axis < 4; ++axis) {
    if (!has_terms[static_cast<std::size_t>(axis)]) {
      kinetic(axis, duration);
      continue;
    }
    auto& u = u_[static_cast<std::size_t>(axis)];
    for (long long s = 0; s < steps; ++s) {
      const double t_mid = t0 + (static_cast<double>(s) + 0.5) * h;
      std::fill(v.begin(), v.end(), 0.0);
      for (const auto& p : potentials)
        for (const auto& term : p.axis_terms())
          if (term.axis == axis)
            for (std::size_t i = 0; i < n; ++i) v[i] += term.energy(grid_.coordinate(i), t_mid);
      for (std::size_t i = 0; i < n; ++i) e[static_cast<Eigen::Index>(i)] = std::polar(1.0, -v[i] * scale);
      u = e.asDiagonal() * u;
      kinetic(axis, h);
      u = e.asDiagonal() * u;
    }
  }
  elapsed_ += duration;
}

void AxisPropagator::record_free(double duration) {
  if (duration == 0.0) return;
  for (int axis = 0; axis < 4; ++axis) kinetic(axis, duration);
  elapsed_ += duration;
}

void AxisPropagator::apply(WaveFunction4D& psi, std::size_t workers) const {
  if (psi.domain() != Domain::position) throw Error("AxisPropagator::apply: field must be in the position domain");
  if (psi.extent() != grid_.points_per_dim()) throw Error("AxisPropagator::apply: grid mismatch");
  for (int axis = 0; axis < 4; ++axis) apply_along_axis(psi, axis, u_[static_cast<std::size_t>(axis)], workers);
  psi.set_time(psi.time() + elapsed_);
}

void apply_along_axis(WaveFunction4D& psi, int axis, const Eigen::MatrixXcd& m, std::size_t workers) {
  const std::size_t n = psi.extent();
  const auto ni = static_cast<Eigen::Index>(n);
  if (m.rows() != ni || m.cols() != ni) throw Error("apply_along_axis: matrix size mismatch");
  if (m.isIdentity(0.0)) return;

  if (axis == 3) {
    // Field as (N^3 x N) row-major: rows are contiguous z4 lines.
    const std::size_t rows = n * n * n;
    const Eigen::MatrixXcd mt = m.transpose();
    const std::size_t chunks = (rows + kChunk - 1) / kChunk;
    parallel_for(chunks, workers, [&](std::size_t begin, std::size_t end) {
      RowMat tmp;
      for (std::size_t c = begin; c < end; ++c) {
        const std::size_t r0 = c * kChunk;
        const auto h = static_cast<Eigen::Index>(std::min(kChunk, rows - r0));
        Eigen::Map<RowMat> block(psi.data() + r0 * n, h, ni);
        tmp.noalias() = block * mt;
        block = tmp;
      }
    });
    return;
  }

  // Field as N^axis consecutive (N x inner) row-major blocks.
  std::size_t outer = 1, inner = 1;
  for (int a = 0; a < axis; ++a) outer *= n;
  for (int a = axis + 1; a < 4; ++a) inner *= n;
  const std::size_t col_chunks = (inner + kChunk - 1) / kChunk;
  parallel_for(outer * col_chunks, workers, [&](std::size_t begin, std::size_t end) {
    RowMat tmp;
    for (std::size_t task = begin; task < end; ++task) {
      const std::size_t o = task / col_chunks;
      const std::size_t c0 = (task % col_chunks) * kChunk;
      const auto w = static_cast<Eigen::Index>(std::min(kChunk, inner - c0));
      Eigen::Map<RowMat> block(psi.data() + o * n * inner, ni, static_cast<Eigen::Index>(inner));
      tmp.noalias() = m * block.middleCols(static_cast<Eigen::Index>(c0), w);
      block.middleCols(static_cast<Eigen::Index>(c0), w) = tmp;
    }
  });
}

}  // namespace bellsim
