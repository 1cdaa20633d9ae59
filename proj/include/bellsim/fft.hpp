#pragma once

#include <complex>
#include <cstddef>
#include <memory>

namespace bellsim::fft {

using cplx = std::complex<double>;

enum class PlanRigor { estimate, measure };

// Process-wide default; `measure` plans are faster but their algorithm choice
// can vary between processes, so bit-reproducible runs keep `estimate`.
void set_default_rigor(PlanRigor r);
PlanRigor default_rigor();

// Unnormalised in-place DFT over `rank` equal dimensions of extent n,
// applied to `batch` contiguous arrays. Buffers must be 64-byte aligned
// (AlignedAllocator) so a plan made once can run on any field.
class Transform {
 public:
  Transform(int rank, std::size_t n, std::size_t batch = 1, std::size_t threads = 1,
            PlanRigor rigor = default_rigor());
  ~Transform();
  Transform(const Transform&) = delete;
  Transform& operator=(const Transform&) = delete;
  Transform(Transform&&) noexcept;
  Transform& operator=(Transform&&) noexcept;

  void forward(cplx* data) const;   // sum_x f(x) e^{-i k x}
  void backward(cplx* data) const;  // sum_k f(k) e^{+i k x}

  std::size_t extent() const noexcept;
  std::size_t points() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bellsim::fft
