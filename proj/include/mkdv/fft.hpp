#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace mkdv::detail {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

// Real-to-complex / complex-to-real plans of one length. Plans are created
// once under a global lock (FFTW planning is not thread-safe) and executed
// through the new-array interface, which is.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    double* r = fftw_alloc_real(n);
    fftw_complex* c = fftw_alloc_complex(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), r, c, flags);
    backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), c, r, flags);
    fftw_free(r);
    fftw_free(c);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  // Instances live in the process-wide cache and die at exit.
  ~RealFft() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t spectrum_size() const noexcept { return n_ / 2 + 1; }

  // Unnormalised forward transform; `out` must hold n/2+1 entries.
  void forward(std::span<const double> in, std::span<Complex> out) const {
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
  }

  // Unnormalised backward transform. Destroys `in`.
  void backward(std::span<Complex> in, std::span<double> out) const {
    fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  }

  static const RealFft& of_size(std::size_t n) {
    static std::map<std::size_t, std::unique_ptr<RealFft>> cache;
    std::lock_guard lock(planner_mutex());
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<RealFft>(n);
    return *slot;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  std::size_t n_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

}  // namespace mkdv::detail
