/// @file limit_check.hpp
/// Large-horizon consistency check: with the power kernel scaled by
/// C(1,beta)/2 and a horizon covering the whole window, the nonlocal
/// operator applied to a Gaussian bump must match the fractional Laplacian
/// (-Delta)^beta computed independently by Fourier-multiplier quadrature.

#pragma once

#include <string>
#include <vector>

namespace nld {

struct LimitCheckSpec {
  double beta = 0.25;
  int cells = 512;            // lattice cells across the unit window (0, 1)
  double bump_center = 0.15;  // Gaussian bump parameters
  double bump_sigma = 0.07;
  // Horizons for the truncation-tail trend, in units of the window length.
  std::vector<double> horizon_factors = {1.0, 2.0, 4.0};

  void validate() const;
};

struct LimitCheckReport {
  // Sup discrepancy over the central third of the window, relative to the
  // sup of the oracle there, at horizon = window length.
  double central_discrepancy = 0.0;
  // Relative discrepancy at the bump center for each horizon factor; the
  // kernel truncation tail dominates here, so it must decrease.
  std::vector<double> center_discrepancies;
  double kernel_scale = 0.0;  // C(1,beta)/2

  bool central_pass = false;  // central_discrepancy <= 2%
  bool trend_pass = false;    // center_discrepancies strictly decreasing

  std::string to_json() const;
};

/// Riesz constant C(d=1, beta) = 4^beta beta Gamma(1/2+beta) /
/// (sqrt(pi) Gamma(1-beta)); the power-kernel lower bound C/2 makes the
/// nonlocal operator converge to (-Delta)^beta as the horizon grows.
double riesz_constant_1d(double beta);

/// (-Delta)^beta of exp(-((x-center)/sigma)^2) at x, by adaptive-resolution
/// Simpson quadrature of the Fourier multiplier |xi|^(2 beta).
double fractional_laplacian_gaussian(double beta, double center, double sigma,
                                     double x);

LimitCheckReport run_limit_check(const LimitCheckSpec& spec);

}  // namespace nld
