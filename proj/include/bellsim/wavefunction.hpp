#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <new>
#include <span>
#include <vector>

#include "bellsim/config.hpp"

namespace bellsim {

using cplx = std::complex<double>;

template <class T, std::size_t Alignment = 64>
struct AlignedAllocator {
  using value_type = T;
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Alignment>;
  };
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Alignment>&) noexcept {}

  T* allocate(std::size_t n) {
    const std::size_t bytes = ((n * sizeof(T) + Alignment - 1) / Alignment) * Alignment;
    void* p = std::aligned_alloc(Alignment, bytes == 0 ? Alignment : bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U, Alignment>&) const noexcept {
    return true;
  }
};

using ComplexBuffer = std::vector<cplx, AlignedAllocator<cplx>>;

enum class Domain { position, momentum };

// Two-particle amplitude on the (x3, z3, x4, z4) grid, x3 slowest. Axis 0,1
// belong to species A and axes 2,3 to species B.
//
// Stored values are cell amplitudes c = psi * dx^2, so sum |c|^2 equals the
// continuum norm sum |psi|^2 dx^4. In the momentum domain the values are the
// unitary DFT of the position values, in FFT index order.
class WaveFunction4D {
 public:
  WaveFunction4D() = default;
  WaveFunction4D(const GridSpec& grid, std::array<double, 2> masses, double time = 0.0,
                 Domain domain = Domain::position);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t extent() const noexcept { return grid_.points_per_dim(); }
  std::size_t size() const noexcept { return data_.size(); }
  double time() const noexcept { return time_; }
  void set_time(double t) noexcept { time_ = t; }
  const std::array<double, 2>& masses() const noexcept { return masses_; }
  double mass(Species s) const noexcept { return masses_[static_cast<int>(s)]; }
  Domain domain() const noexcept { return domain_; }
  void set_domain(Domain d) noexcept { domain_ = d; }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const noexcept {
    const std::size_t n = extent();
    return ((i * n + j) * n + k) * n + l;
  }
  cplx& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) noexcept {
    return data_[index(i, j, k, l)];
  }
  const cplx& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const noexcept {
    return data_[index(i, j, k, l)];
  }

  std::span<cplx> values() noexcept { return {data_.data(), data_.size()}; }
  std::span<const cplx> values() const noexcept { return {data_.data(), data_.size()}; }
  cplx* data() noexcept { return data_.data(); }
  const cplx* data() const noexcept { return data_.data(); }

  // Signed momentum of index i along any axis, in kg m/s (momentum domain).
  double momentum_at(std::size_t i) const noexcept {
    return static_cast<double>(grid_.frequency_index(i)) * grid_.momentum_step();
  }

 private:
  GridSpec grid_;
  std::array<double, 2> masses_{0.0, 0.0};
  double time_ = 0.0;
  Domain domain_ = Domain::position;
  ComplexBuffer data_;
};

// Bytes needed for one field of N^4 complex doubles.
double field_bytes(std::size_t points_per_dim);

// Discrete L2 norm sum |c|^2. The reduction runs per x3 slab and then sums
// the slabs in order, so the value does not depend on the worker count.
double norm(const WaveFunction4D& psi, std::size_t workers = 1);

// <a|b>
cplx inner_product(const WaveFunction4D& a, const WaveFunction4D& b);
double fidelity(const WaveFunction4D& a, const WaveFunction4D& b);

void normalize(WaveFunction4D& psi, std::size_t workers = 1);

// Outer product of four 1D amplitude vectors; each factor is normalised to
// unit sum |f|^2 first.
WaveFunction4D product_state(const GridSpec& grid, std::array<double, 2> masses,
                             const std::array<std::vector<cplx>, 4>& factors);

}  // namespace bellsim
