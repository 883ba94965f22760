#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include "error.hpp"

namespace mdrdf {

// Plan creation in FFTW is not thread-safe; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Complex-to-complex transform of fixed size owning its buffer and plan.
class Fft {
 public:
  Fft(std::size_t n, bool forward) : n_(n) {
    if (n == 0) fail(ErrorCode::InvalidConfig, "FFT size must be positive");
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  ~Fft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }

  std::size_t size() const noexcept { return n_; }
  std::complex<double>* data() noexcept { return reinterpret_cast<std::complex<double>*>(buf_); }
  std::span<std::complex<double>> buffer() noexcept { return {data(), n_}; }
  void execute() { fftw_execute(plan_); }

 private:
  std::size_t n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan plan_ = nullptr;
};

// Circular zero-phase filtering: y = IDFT(H(w_k) DFT(x)) with a real, even
// response H evaluated at the DFT bin frequencies 2 pi k / n.
template <class Response>
std::vector<double> filter_zero_phase(std::span<const double> x, Response&& response) {
  const std::size_t n = x.size();
  Fft fwd(n, true), inv(n, false);
  auto* a = fwd.data();
  for (std::size_t i = 0; i < n; ++i) a[i] = {x[i], 0.0};
  fwd.execute();
  auto* b = inv.data();
  const double two_pi = 6.283185307179586;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = two_pi * static_cast<double>(k) / static_cast<double>(n);
    b[k] = a[k] * (response(w) / static_cast<double>(n));
  }
  inv.execute();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = b[i].real();
  return y;
}

}  // namespace mdrdf
