#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace faraday {

/// Real-to-complex FFT of fixed length n (FFTW plan owned by the object).
/// Not thread-safe per instance; create one per thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// Forward transform; input shorter than n is zero-padded. Unnormalized.
  void forward(const double* in, std::size_t count, std::vector<std::complex<double>>& out);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

/// Complex-to-real inverse of RealFft, normalized so inverse(forward(x)) == x.
class RealIfft {
 public:
  explicit RealIfft(std::size_t n);
  ~RealIfft();
  RealIfft(const RealIfft&) = delete;
  RealIfft& operator=(const RealIfft&) = delete;

  void inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace faraday
