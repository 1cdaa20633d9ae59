#include "bellsim/fft.hpp"

#include <fftw3.h>

#include <atomic>
#include <mutex>
#include <vector>

#include "bellsim/errors.hpp"
#include "bellsim/wavefunction.hpp"

namespace bellsim::fft {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::atomic<PlanRigor>& rigor_setting() {
  static std::atomic<PlanRigor> r{PlanRigor::estimate};
  return r;
}

void ensure_threads_initialised() {
  static const bool ok = fftw_init_threads() != 0;
  if (!ok) throw Error("fftw_init_threads failed");
}

}  // namespace

void set_default_rigor(PlanRigor r) { rigor_setting().store(r); }
PlanRigor default_rigor() { return rigor_setting().load(); }

struct Transform::Impl {
  std::size_t n = 0;
  std::size_t points = 0;
  std::size_t batch = 1;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

Transform::Transform(int rank, std::size_t n, std::size_t batch, std::size_t threads, PlanRigor rigor)
    : impl_(std::make_unique<Impl>()) {
  if (rank < 1 || rank > 4) throw Error("fft rank must be 1..4");
  impl_->n = n;
  impl_->batch = batch;
  std::size_t pts = 1;
  for (int r = 0; r < rank; ++r) pts *= n;
  impl_->points = pts;

  // ESTIMATE never touches the array, so a one-element aligned probe is
  // enough; MEASURE needs a real scratch buffer.
  const std::size_t scratch_len = rigor == PlanRigor::measure ? pts * batch : 1;
  ComplexBuffer scratch(scratch_len);
  ComplexBuffer probe;
  cplx* target = scratch.data();
  std::vector<int> dims(static_cast<std::size_t>(rank), static_cast<int>(n));
  const unsigned flags = rigor == PlanRigor::measure ? FFTW_MEASURE : FFTW_ESTIMATE;

  std::lock_guard lock(planner_mutex());
  ensure_threads_initialised();
  fftw_plan_with_nthreads(static_cast<int>(threads == 0 ? 1 : threads));
  auto make = [&](int sign) {
    auto* p = reinterpret_cast<fftw_complex*>(target);
    return fftw_plan_many_dft(rank, dims.data(), static_cast<int>(batch), p, nullptr, 1,
                              static_cast<int>(pts), p, nullptr, 1, static_cast<int>(pts), sign,
                              flags | (rigor == PlanRigor::estimate ? 0u : FFTW_DESTROY_INPUT));
  };
  impl_->forward = make(FFTW_FORWARD);
  impl_->backward = make(FFTW_BACKWARD);
  if (!impl_->forward || !impl_->backward) throw Error("FFTW planning failed");
}

Transform::~Transform() = default;
Transform::Transform(Transform&&) noexcept = default;
Transform& Transform::operator=(Transform&&) noexcept = default;

void Transform::forward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(impl_->forward, p, p);
}

void Transform::backward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(impl_->backward, p, p);
}

std::size_t Transform::extent() const noexcept { return impl_->n; }
std::size_t Transform::points() const noexcept { return impl_->points; }

}  // namespace bellsim::fft
