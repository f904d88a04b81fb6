#include "faraday/fft.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>

#include <fftw3.h>

#include "faraday/error.hpp"

namespace faraday {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

RealFft::RealFft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n < 2) throw ValidationError("FFT length must be >= 2");
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->in = fftw_alloc_real(n);
  impl_->out = fftw_alloc_complex(n / 2 + 1);
  if (!impl_->in || !impl_->out) throw ComputationError("FFTW allocation failed");
  impl_->plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), impl_->in, impl_->out, FFTW_ESTIMATE);
  if (!impl_->plan) throw ComputationError("FFTW planning failed");
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(const double* in, std::size_t count, std::vector<std::complex<double>>& out) {
  if (count > n_) throw ValidationError("FFT input longer than transform length");
  std::memcpy(impl_->in, in, count * sizeof(double));
  std::fill(impl_->in + count, impl_->in + n_, 0.0);
  fftw_execute(impl_->plan);
  out.resize(bins());
  for (std::size_t k = 0; k < bins(); ++k) out[k] = {impl_->out[k][0], impl_->out[k][1]};
}

struct RealIfft::Impl {
  fftw_complex* in = nullptr;
  double* out = nullptr;
  fftw_plan plan = nullptr;
  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

RealIfft::RealIfft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n < 2) throw ValidationError("FFT length must be >= 2");
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->in = fftw_alloc_complex(n / 2 + 1);
  impl_->out = fftw_alloc_real(n);
  if (!impl_->in || !impl_->out) throw ComputationError("FFTW allocation failed");
  impl_->plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), impl_->in, impl_->out, FFTW_ESTIMATE);
  if (!impl_->plan) throw ComputationError("FFTW planning failed");
}

RealIfft::~RealIfft() = default;

void RealIfft::inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out) {
  const std::size_t nb = n_ / 2 + 1;
  if (in.size() != nb) throw ValidationError("inverse FFT expects n/2+1 bins");
  for (std::size_t k = 0; k < nb; ++k) {
    impl_->in[k][0] = in[k].real();
    impl_->in[k][1] = in[k].imag();
  }
  fftw_execute(impl_->plan);
  out.resize(n_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = impl_->out[i] * scale;
}

}  // namespace faraday
