#include "bellsim/wavefunction.hpp"

#include <cmath>

#include "bellsim/errors.hpp"
#include "bellsim/parallel.hpp"
#include "bellsim/simd/kernels.hpp"

namespace bellsim {

WaveFunction4D::WaveFunction4D(const GridSpec& grid, std::array<double, 2> masses, double time,
                               Domain domain)
    : grid_(grid), masses_(masses), time_(time), domain_(domain), data_(grid.total_points(), cplx{}) {}

double field_bytes(std::size_t points_per_dim) {
  const double n = static_cast<double>(points_per_dim);
  return n * n * n * n * static_cast<double>(sizeof(cplx));
}

double norm(const WaveFunction4D& psi, std::size_t workers) {
  const std::size_t n = psi.extent();
  const std::size_t slab = n * n * n;
  std::vector<double> partial(n, 0.0);
  const auto& k = simd::active();
  parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) partial[i] = k.sum_abs2(psi.data() + i * slab, slab);
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

cplx inner_product(const WaveFunction4D& a, const WaveFunction4D& b) {
  if (a.size() != b.size()) throw Error("inner_product: shape mismatch");
  const std::size_t n = a.extent();
  const std::size_t slab = n * n * n;
  const auto& k = simd::active();
  cplx total{};
  for (std::size_t i = 0; i < n; ++i) total += k.dot(a.data() + i * slab, b.data() + i * slab, slab);
  return total;
}

double fidelity(const WaveFunction4D& a, const WaveFunction4D& b) {
  return std::norm(inner_product(a, b)) / (norm(a) * norm(b));
}

void normalize(WaveFunction4D& psi, std::size_t workers) {
  const double s = norm(psi, workers);
  if (!(s > 0.0) || !std::isfinite(s)) throw NumericalBlowupError("cannot normalise field with norm " + std::to_string(s), 0.0);
  simd::active().scale(psi.data(), cplx(1.0 / std::sqrt(s), 0.0), psi.size());
}

WaveFunction4D product_state(const GridSpec& grid, std::array<double, 2> masses,
                             const std::array<std::vector<cplx>, 4>& factors) {
  const std::size_t n = grid.points_per_dim();
  std::array<std::vector<cplx>, 4> f = factors;
  for (auto& v : f) {
    if (v.size() != n) throw Error("product_state: factor length must equal points_per_dim");
    double s = 0.0;
    for (const auto& c : v) s += std::norm(c);
    if (!(s > 0.0)) throw Error("product_state: zero factor");
    for (auto& c : v) c /= std::sqrt(s);
  }
  WaveFunction4D psi(grid, masses);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const cplx ij = f[0][i] * f[1][j];
      for (std::size_t k = 0; k < n; ++k) {
        const cplx ijk = ij * f[2][k];
        cplx* row = &psi(i, j, k, 0);
        for (std::size_t l = 0; l < n; ++l) row[l] = ijk * f[3][l];
      }
    }
  return psi;
}

}  // namespace bellsim
