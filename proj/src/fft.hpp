#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace curveflow::detail {

/// Real <-> half-complex transform pair of a fixed length backed by FFTW.
/// Plans are built with FFTW_ESTIMATE so results are reproducible run to run.
class RealTransform {
 public:
  explicit RealTransform(std::size_t size);
  ~RealTransform();
  RealTransform(const RealTransform&) = delete;
  RealTransform& operator=(const RealTransform&) = delete;

  std::size_t size() const noexcept { return size_; }

  /// samples_j = sum_{n=-K}^{K} c_n e^{2 pi i j n / size} with c_{-n} = conj(c_n);
  /// coeffs holds c_0..c_K, K < size / 2.
  void inverse(std::span<const std::complex<double>> coeffs, std::span<double> samples);

  /// c_n = (1 / size) sum_j samples_j e^{-2 pi i j n / size} for n = 0..out.size()-1.
  void forward(std::span<const double> samples, std::span<std::complex<double>> out);

 private:
  std::size_t size_;
  double* real_ = nullptr;
  void* spectrum_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace curveflow::detail
