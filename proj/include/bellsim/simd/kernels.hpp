#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

// Pointwise complex kernels used by the propagator's inner loops.
//
// Every kernel has a scalar reference implementation; vector variants are
// selected once at runtime from the CPU feature set and must agree with the
// reference to rounding (see tests/unit/test_simd_kernels.cpp). Set
// BELLSIM_SIMD=scalar in the environment to force the reference path.
namespace bellsim::simd {

using cplx = std::complex<double>;

enum class Backend { scalar, avx2 };

struct KernelTable {
  Backend backend;
  // dst[i] *= a[i]
  void (*mul)(cplx* dst, const cplx* a, std::size_t n);
  // dst[i] *= s * a[i]
  void (*mul_scaled)(cplx* dst, const cplx* a, cplx s, std::size_t n);
  // dst[i] *= s * a[i] * b[i]
  void (*mul2_scaled)(cplx* dst, const cplx* a, const cplx* b, cplx s, std::size_t n);
  // dst[i] *= s
  void (*scale)(cplx* dst, cplx s, std::size_t n);
  // sum |src[i]|^2
  double (*sum_abs2)(const cplx* src, std::size_t n);
  // dst[i] += |src[i]|^2
  void (*accumulate_abs2)(double* dst, const cplx* src, std::size_t n);
  // sum conj(a[i]) * b[i]
  cplx (*dot)(const cplx* a, const cplx* b, std::size_t n);
};

const KernelTable& scalar_kernels();
// nullptr when the backend was not compiled in.
const KernelTable* avx2_kernels();

bool backend_available(Backend b);
const KernelTable& kernels_for(Backend b);

// The table chosen at startup (or forced with set_active_backend).
const KernelTable& active();
Backend active_backend();
void set_active_backend(Backend b);

std::string_view name(Backend b);

}  // namespace bellsim::simd
