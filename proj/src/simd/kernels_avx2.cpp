// Compiled with -mavx2 -mfma; only reached when the CPU reports both.
#include <immintrin.h>

#include "bellsim/simd/kernels.hpp"

namespace bellsim::simd {

namespace {

// Two complex doubles per register: [re0, im0, re1, im1].
inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_swap = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_swap, b_im));
}

inline __m256d broadcast(cplx s) { return _mm256_setr_pd(s.real(), s.imag(), s.real(), s.imag()); }

inline cplx tail_mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

void mul(cplx* dst, const cplx* a, std::size_t n) {
  auto* d = reinterpret_cast<double*>(dst);
  const auto* x = reinterpret_cast<const double*>(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(d + 2 * i);
    _mm256_storeu_pd(d + 2 * i, cmul(v, _mm256_loadu_pd(x + 2 * i)));
  }
  for (; i < n; ++i) dst[i] = tail_mul(dst[i], a[i]);
}

void mul_scaled(cplx* dst, const cplx* a, cplx s, std::size_t n) {
  auto* d = reinterpret_cast<double*>(dst);
  const auto* x = reinterpret_cast<const double*>(a);
  const __m256d sv = broadcast(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d f = cmul(sv, _mm256_loadu_pd(x + 2 * i));
    _mm256_storeu_pd(d + 2 * i, cmul(_mm256_loadu_pd(d + 2 * i), f));
  }
  for (; i < n; ++i) dst[i] = tail_mul(dst[i], tail_mul(s, a[i]));
}

void mul2_scaled(cplx* dst, const cplx* a, const cplx* b, cplx s, std::size_t n) {
  auto* d = reinterpret_cast<double*>(dst);
  const auto* x = reinterpret_cast<const double*>(a);
  const auto* y = reinterpret_cast<const double*>(b);
  const __m256d sv = broadcast(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d f = cmul(cmul(sv, _mm256_loadu_pd(x + 2 * i)), _mm256_loadu_pd(y + 2 * i));
    _mm256_storeu_pd(d + 2 * i, cmul(_mm256_loadu_pd(d + 2 * i), f));
  }
  for (; i < n; ++i) dst[i] = tail_mul(dst[i], tail_mul(tail_mul(s, a[i]), b[i]));
}

void scale(cplx* dst, cplx s, std::size_t n) {
  auto* d = reinterpret_cast<double*>(dst);
  const __m256d sv = broadcast(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) _mm256_storeu_pd(d + 2 * i, cmul(_mm256_loadu_pd(d + 2 * i), sv));
  for (; i < n; ++i) dst[i] = tail_mul(dst[i], s);
}

double sum_abs2(const cplx* src, std::size_t n) {
  const auto* x = reinterpret_cast<const double*>(src);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(x + 2 * i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
  for (; i < n; ++i) total += std::norm(src[i]);
  return total;
}

void accumulate_abs2(double* dst, const cplx* src, std::size_t n) {
  const auto* x = reinterpret_cast<const double*>(src);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = _mm256_loadu_pd(x + 2 * i);
    const __m256d v1 = _mm256_loadu_pd(x + 2 * i + 4);
    // hadd pairs (re^2 + im^2) and interleaves: [s0, s2, s1, s3].
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
    const __m256d ordered = _mm256_permute4x64_pd(h, 0xD8);
    _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), ordered));
  }
  for (; i < n; ++i) dst[i] += std::norm(src[i]);
}

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  const auto* x = reinterpret_cast<const double*>(a);
  const auto* y = reinterpret_cast<const double*>(b);
  // conj(a) * b: re = ar br + ai bi, im = ar bi - ai br.
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d av = _mm256_loadu_pd(x + 2 * i);
    const __m256d bv = _mm256_loadu_pd(y + 2 * i);
    acc_re = _mm256_fmadd_pd(av, bv, acc_re);
    acc_im = _mm256_fmadd_pd(av, _mm256_permute_pd(bv, 0x5), acc_im);
  }
  alignas(32) double r[4], m[4];
  _mm256_store_pd(r, acc_re);
  _mm256_store_pd(m, acc_im);
  // m lanes hold [ar*bi, ai*br, ...]
  double re = (r[0] + r[1]) + (r[2] + r[3]);
  double im = (m[0] - m[1]) + (m[2] - m[3]);
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{Backend::avx2, mul, mul_scaled, mul2_scaled, scale,
                                 sum_abs2,      accumulate_abs2, dot};
  return &table;
}

}  // namespace bellsim::simd
