#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace curveflow::detail {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealTransform::RealTransform(std::size_t size) : size_(size) {
  if (size_ < 2) throw std::invalid_argument("transform size must be at least 2");
  const int n = static_cast<int>(size_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  real_ = fftw_alloc_real(size_);
  auto* spectrum = fftw_alloc_complex(size_ / 2 + 1);
  spectrum_ = spectrum;
  forward_plan_ = fftw_plan_dft_r2c_1d(n, real_, spectrum, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(n, spectrum, real_, FFTW_ESTIMATE);
}

RealTransform::~RealTransform() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(spectrum_);
}

void RealTransform::inverse(std::span<const std::complex<double>> coeffs, std::span<double> samples) {
  const std::size_t half = size_ / 2 + 1;
  if (coeffs.size() > half || 2 * (coeffs.size() - 1) >= size_) {
    throw std::invalid_argument("too many modes for transform size");
  }
  auto* spectrum = static_cast<fftw_complex*>(spectrum_);
  for (std::size_t n = 0; n < half; ++n) {
    std::complex<double> c = n < coeffs.size() ? coeffs[n] : std::complex<double>{};
    if (n == 0) c = {c.real(), 0.0};
    spectrum[n][0] = c.real();
    spectrum[n][1] = c.imag();
  }
  // c2r overwrites its input
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  std::copy(real_, real_ + size_, samples.begin());
}

void RealTransform::forward(std::span<const double> samples, std::span<std::complex<double>> out) {
  if (out.size() > size_ / 2 + 1) throw std::invalid_argument("too many output modes for transform size");
  std::copy(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(size_), real_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  const auto* spectrum = static_cast<const fftw_complex*>(spectrum_);
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = {spectrum[n][0] * scale, spectrum[n][1] * scale};
  }
}

}  // namespace curveflow::detail
