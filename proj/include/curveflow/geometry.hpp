#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <vector>

#include "curveflow/spectral.hpp"

namespace curveflow {

/// Planar curve sampled on a uniform tangent-angle grid over [0, 2 pi).
struct CurvePoints {
  std::vector<double> theta;
  std::vector<double> x;
  std::vector<double> y;
  /// |x(2 pi) - x(0)|; zero exactly when the curvature satisfies the closure condition.
  double closure_gap = 0.0;
  double perimeter = 0.0;
};

/// Perturbation amplitudes keyed by wavenumber n >= 1. An amplitude a adds
/// Re(a e^{i n theta}) to the curvature (to first order when closure is enforced).
using ModeMap = std::map<int, std::complex<double>>;

/// Initial curvature with average W. With enforce_closure the perturbation is
/// applied to the radius of curvature rho = 1/k, whose +-1 modes stay zero,
/// and k = 1/rho is transformed back; otherwise the amplitudes go straight
/// into khat. Throws on mode 1 under enforcement or when rho (or k) is not positive.
SpectralState make_initial(double W, const ModeMap& modes, bool enforce_closure, int N);

/// Integrates x'(theta) = (cos theta, sin theta) / k(theta) spectrally, starting
/// at the origin. `samples` points; defaults to 16N.
CurvePoints reconstruct(const SpectralState& state, std::size_t samples = 0);

/// 1/2 of the closed integral of (x dy - y dx) over the reconstructed curve.
double enclosed_area(const SpectralState& state);

/// Rescales k by sqrt(A / target) so the enclosed area becomes `target`.
SpectralState normalize_area(const SpectralState& state, double target = 3.14159265358979323846);

}  // namespace curveflow
