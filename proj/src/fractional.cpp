#include "nld/fractional.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nld {

void FractionalSpec::validate() const {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("fractional: alpha must lie strictly in (0, 1)");
  if (orders.size() != weights.size())
    throw std::invalid_argument("fractional: orders and weights size mismatch");
  double prev = 0.0;
  for (double a : orders) {
    if (!(a > prev))
      throw std::invalid_argument("fractional: lower orders must be strictly increasing");
    if (!(a < alpha))
      throw std::invalid_argument("fractional: lower orders must stay below alpha");
    prev = a;
  }
  for (double p : weights)
    if (!(p >= 0.0) || !std::isfinite(p))
      throw std::invalid_argument("fractional: term weights must be nonnegative");
}

L1Weights::L1Weights(double alpha, double dt, std::size_t n_steps)
    : alpha_(alpha), dt_(dt) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("L1 weights: alpha must lie strictly in (0, 1)");
  if (!(dt > 0.0)) throw std::invalid_argument("L1 weights: dt must be positive");
  if (n_steps == 0) throw std::invalid_argument("L1 weights: need at least one step");
  const double c = 1.0 / (std::tgamma(2.0 - alpha) * std::pow(dt, alpha));
  const double e = 1.0 - alpha;
  lags_.resize(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k)
    lags_[k] = c * (std::pow(double(k + 1), e) - std::pow(double(k), e));
}

std::vector<double> multiterm_lag_coefficients(const FractionalSpec& spec,
                                               double dt, std::size_t n_steps) {
  spec.validate();
  const L1Weights lead(spec.alpha, dt, n_steps);
  std::vector<double> c(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) c[k] = lead.lag(k);
  for (std::size_t t = 0; t < spec.orders.size(); ++t) {
    const L1Weights low(spec.orders[t], dt, n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) c[k] += spec.weights[t] * low.lag(k);
  }
  return c;
}

namespace {

std::vector<double> convolve_increments(const std::vector<double>& lags,
                                        const std::vector<double>& f) {
  if (f.size() < 2)
    throw std::invalid_argument("fractional apply: need at least two samples");
  if (lags.size() < f.size() - 1)
    throw std::invalid_argument("fractional apply: weight table too short");
  std::vector<double> g(f.size(), 0.0);
  for (std::size_t n = 1; n < f.size(); ++n) {
    double acc = 0.0;
    for (std::size_t j = 1; j <= n; ++j) acc += lags[n - j] * (f[j] - f[j - 1]);
    g[n] = acc;
  }
  return g;
}

}  // namespace

std::vector<double> caputo_apply(const L1Weights& weights,
                                 const std::vector<double>& f) {
  std::vector<double> lags(weights.steps());
  for (std::size_t k = 0; k < lags.size(); ++k) lags[k] = weights.lag(k);
  return convolve_increments(lags, f);
}

std::vector<double> caputo_apply(double alpha, double dt,
                                 const std::vector<double>& f) {
  if (f.size() < 2)
    throw std::invalid_argument("fractional apply: need at least two samples");
  return caputo_apply(L1Weights(alpha, dt, f.size() - 1), f);
}

std::vector<double> multiterm_apply(const FractionalSpec& spec, double dt,
                                    const std::vector<double>& f) {
  if (f.size() < 2)
    throw std::invalid_argument("fractional apply: need at least two samples");
  return convolve_increments(multiterm_lag_coefficients(spec, dt, f.size() - 1), f);
}

ExtremumCheck check_extremum_lemma(const FractionalSpec& spec, double dt,
                                   const std::vector<double>& f) {
  const auto g = multiterm_apply(spec, dt, f);
  // Discrete argmin over n >= 1 (the scheme has no value at t_0).
  std::size_t argmin = 1;
  for (std::size_t n = 2; n < f.size(); ++n)
    if (f[n] < f[argmin]) argmin = n;

  double scale = 0.0;
  for (double v : f) scale = std::max(scale, std::abs(v));

  ExtremumCheck out;
  out.argmin = argmin;
  out.value = g[argmin];
  // Non-positive up to roundoff whenever f[argmin] <= f[0]; the O(dt) slack
  // covers sample series whose discrete argmin sits a step away from the
  // continuous one.
  out.tol = (1e-12 + dt) * std::max(1.0, scale);
  out.pass = out.value <= out.tol;
  return out;
}

}  // namespace nld
