/// @file kernel.hpp
/// Radial interaction kernels with compact horizon support, plus the
/// two-point tensor and antisymmetric vector fields built from them.

#pragma once

#include <array>

namespace nld {

/// gamma(x,y) = profile(|x-y|) for |x-y| < horizon, zero beyond.
/// Power form:    gamma_lo / r^(dim + 2 beta); the bound
///                gamma_lo <= gamma * r^(dim+2 beta) <= gamma_hi holds with
///                equality on both sides.
/// Bounded form:  smooth blend between gamma_hi (r -> 0) and gamma_lo
///                (r -> horizon) over r^(dim + 2 beta).
struct KernelSpec {
  enum class Form { Power, Bounded };

  Form form = Form::Power;
  double beta = 0.25;
  double gamma_lo = 1.0;
  double gamma_hi = 1.0;
  double horizon = 0.125;
  /// Accumulate the action of the operator over reflection pairs.  Required
  /// for beta >= 1/2 where individual near-singular terms grow like
  /// h^(-2 beta) and only cancel pairwise.
  bool symmetric_pairing = false;

  void validate() const;

  /// Kernel value at separation r > 0 (zero at or beyond the horizon).
  double value(double r, int dim) const;

  bool operator==(const KernelSpec&) const = default;
};

/// Two-point diffusion tensor; scaled identity covers the supported cases.
struct TensorField {
  double scale = 1.0;

  void validate() const;
};

/// alpha(x,y): antisymmetric two-point vector chosen so that
/// alpha . (Theta alpha) reproduces the kernel exactly.  With the identity
/// tensor this is (y - x) sqrt(gamma(x,y)) / |y - x|.
struct AntisymmetricField {
  KernelSpec kernel;
  TensorField theta;

  std::array<double, 2> value(const std::array<double, 2>& x,
                              const std::array<double, 2>& y, int dim) const;
};

}  // namespace nld
