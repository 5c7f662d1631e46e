/// @file fractional.hpp
/// L1 discretization of Caputo time derivatives on uniform grids, single and
/// multi-term, with the discrete extremum property check.

#pragma once

#include <cstddef>
#include <vector>

namespace nld {

/// Multi-term operator D^alpha + sum_k p_k D^(orders[k]) with
/// 0 < orders[0] < ... < orders[m-1] < alpha < 1.
struct FractionalSpec {
  double alpha = 0.7;
  std::vector<double> orders;
  std::vector<double> weights;

  void validate() const;

  bool operator==(const FractionalSpec&) const = default;
};

/// Convolution weights of the L1 scheme:
///   D^alpha f(t_n) ~ sum_{j=1..n} lag(n-j) (f_j - f_{j-1}),
///   lag(k) = ((k+1)^(1-alpha) - k^(1-alpha)) / (Gamma(2-alpha) dt^alpha).
/// Lags are positive and strictly decreasing.
class L1Weights {
 public:
  L1Weights(double alpha, double dt, std::size_t n_steps);

  double lag(std::size_t k) const { return lags_[k]; }
  double leading() const { return lags_[0]; }
  std::size_t steps() const { return lags_.size(); }
  double alpha() const { return alpha_; }
  double dt() const { return dt_; }

 private:
  double alpha_;
  double dt_;
  std::vector<double> lags_;
};

/// Lag coefficients of the combined multi-term operator (the single-order
/// case falls out with empty lower-order lists).
std::vector<double> multiterm_lag_coefficients(const FractionalSpec& spec,
                                               double dt, std::size_t n_steps);

/// Applies the discrete Caputo derivative to samples f(t_0 .. t_N);
/// element 0 of the result is zero by convention.
std::vector<double> caputo_apply(const L1Weights& weights,
                                 const std::vector<double>& f);
std::vector<double> caputo_apply(double alpha, double dt,
                                 const std::vector<double>& f);

/// Discrete multi-term derivative of a sample series.
std::vector<double> multiterm_apply(const FractionalSpec& spec, double dt,
                                    const std::vector<double>& f);

/// At a (discrete, interior-in-time) minimizer of f the discrete fractional
/// derivative is non-positive up to an O(dt) slack; mirrors the continuous
/// extremum property of the Caputo derivative.
struct ExtremumCheck {
  std::size_t argmin = 0;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
};

ExtremumCheck check_extremum_lemma(const FractionalSpec& spec, double dt,
                                   const std::vector<double>& f);

}  // namespace nld
