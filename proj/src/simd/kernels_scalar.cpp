#include "bellsim/simd/kernels.hpp"

namespace bellsim::simd {

namespace {

// Explicit component arithmetic: std::complex operator* carries the C99
// Annex G inf/nan recovery path, which we never need here.
inline void cmul(double ar, double ai, double br, double bi, double& re, double& im) {
  re = ar * br - ai * bi;
  im = ar * bi + ai * br;
}

void mul(cplx* dst, const cplx* a, std::size_t n) {
  auto* d = reinterpret_cast<double*>(dst);
  const auto* x = reinterpret_cast<const double*>(a);
  for (std::size_t i = 0; i < n; ++i) {
    double re, im;
    cmul(d[2 * i], d[2 * i + 1], x[2 * i], x[2 * i + 1], re, im);
    d[2 * i] = re;
    d[2 * i + 1] = im;
  }
}

void mul_scaled(cplx* dst, const cplx* a, cplx s, std::size_t n) {
  auto* d = reinterpret_cast<double*>(dst);
  const auto* x = reinterpret_cast<const double*>(a);
  const double sr = s.real(), si = s.imag();
  for (std::size_t i = 0; i < n; ++i) {
    double fr, fi, re, im;
    cmul(sr, si, x[2 * i], x[2 * i + 1], fr, fi);
    cmul(d[2 * i], d[2 * i + 1], fr, fi, re, im);
    d[2 * i] = re;
    d[2 * i + 1] = im;
  }
}

void mul2_scaled(cplx* dst, const cplx* a, const cplx* b, cplx s, std::size_t n) {
  auto* d = reinterpret_cast<double*>(dst);
  const auto* x = reinterpret_cast<const double*>(a);
  const auto* y = reinterpret_cast<const double*>(b);
  const double sr = s.real(), si = s.imag();
  for (std::size_t i = 0; i < n; ++i) {
    double fr, fi, gr, gi, re, im;
    cmul(sr, si, x[2 * i], x[2 * i + 1], fr, fi);
    cmul(fr, fi, y[2 * i], y[2 * i + 1], gr, gi);
    cmul(d[2 * i], d[2 * i + 1], gr, gi, re, im);
    d[2 * i] = re;
    d[2 * i + 1] = im;
  }
}

void scale(cplx* dst, cplx s, std::size_t n) {
  auto* d = reinterpret_cast<double*>(dst);
  const double sr = s.real(), si = s.imag();
  for (std::size_t i = 0; i < n; ++i) {
    double re, im;
    cmul(d[2 * i], d[2 * i + 1], sr, si, re, im);
    d[2 * i] = re;
    d[2 * i + 1] = im;
  }
}

// Four running partial sums, matching the lane layout of the vector kernels.
double sum_abs2(const cplx* src, std::size_t n) {
  const auto* x = reinterpret_cast<const double*>(src);
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    for (int l = 0; l < 4; ++l) acc[l] += x[2 * i + l] * x[2 * i + l];
  }
  double total = (acc[0] + acc[2]) + (acc[1] + acc[3]);
  for (; i < n; ++i) total += x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1];
  return total;
}

void accumulate_abs2(double* dst, const cplx* src, std::size_t n) {
  const auto* x = reinterpret_cast<const double*>(src);
  for (std::size_t i = 0; i < n; ++i) dst[i] += x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1];
}

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  const auto* x = reinterpret_cast<const double*>(a);
  const auto* y = reinterpret_cast<const double*>(b);
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[2 * i] * y[2 * i] + x[2 * i + 1] * y[2 * i + 1];
    im += x[2 * i] * y[2 * i + 1] - x[2 * i + 1] * y[2 * i];
  }
  return {re, im};
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Backend::scalar, mul, mul_scaled, mul2_scaled, scale,
                                 sum_abs2,        accumulate_abs2, dot};
  return table;
}

}  // namespace bellsim::simd
