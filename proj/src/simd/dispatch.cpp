#include <atomic>
#include <cstdlib>
#include <string>

#include "bellsim/errors.hpp"
#include "bellsim/simd/kernels.hpp"

namespace bellsim::simd {

#if !defined(BELLSIM_HAVE_AVX2_TU)
const KernelTable* avx2_kernels() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(BELLSIM_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* forced = std::getenv("BELLSIM_SIMD")) {
    const std::string v(forced);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && cpu_has_avx2() && avx2_kernels()) return Backend::avx2;
  }
  return cpu_has_avx2() && avx2_kernels() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& selected() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2: return cpu_has_avx2() && avx2_kernels() != nullptr;
  }
  return false;
}

const KernelTable& kernels_for(Backend b) {
  if (!backend_available(b)) throw Error(std::string("SIMD backend unavailable: ") + std::string(name(b)));
  return b == Backend::avx2 ? *avx2_kernels() : scalar_kernels();
}

const KernelTable& active() { return kernels_for(selected().load(std::memory_order_relaxed)); }

Backend active_backend() { return selected().load(std::memory_order_relaxed); }

void set_active_backend(Backend b) {
  kernels_for(b);
  selected().store(b, std::memory_order_relaxed);
}

std::string_view name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

}  // namespace bellsim::simd
