#include "nld/limit_check.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace nld {

void LimitCheckSpec::validate() const {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("limit check: beta must lie in (0, 1)");
  if (cells < 16) throw std::invalid_argument("limit check: need >= 16 cells");
  if (!(bump_sigma > 0.0))
    throw std::invalid_argument("limit check: bump sigma must be positive");
  if (horizon_factors.empty())
    throw std::invalid_argument("limit check: need at least one horizon");
  for (double f : horizon_factors)
    if (!(f >= 1.0))
      throw std::invalid_argument(
          "limit check: horizons must cover the window (factor >= 1)");
}

double riesz_constant_1d(double beta) {
  return std::pow(4.0, beta) * beta * std::tgamma(0.5 + beta) /
         (std::sqrt(M_PI) * std::tgamma(1.0 - beta));
}

double fractional_laplacian_gaussian(double beta, double center, double sigma,
                                     double x) {
  // Fourier transform of the bump: sigma sqrt(pi) exp(-sigma^2 xi^2 / 4)
  // centered by a phase, so
  //   (-Delta)^beta u(x)
  //     = (sigma / sqrt(pi)) int_0^inf xi^(2 beta) exp(-sigma^2 xi^2 / 4)
  //                                   cos(xi (x - center)) d xi.
  const double cutoff = 40.0 / sigma;          // integrand ~ exp(-400) there
  const std::size_t n = 1u << 18;              // Simpson subintervals (even)
  const double d = cutoff / static_cast<double>(n);
  const double r = x - center;

  auto f = [&](double xi) {
    return std::pow(xi, 2.0 * beta) *
           std::exp(-0.25 * sigma * sigma * xi * xi) * std::cos(xi * r);
  };
  double sum = f(0.0) + f(cutoff);
  for (std::size_t k = 1; k < n; ++k)
    sum += (k % 2 ? 4.0 : 2.0) * f(static_cast<double>(k) * d);
  return sigma / std::sqrt(M_PI) * sum * d / 3.0;
}

namespace {

// Direct nodal sum for 2 int (u(x_i) - u(y)) gamma |x_i - y|^(-1-2 beta) dy
// over the open ball of radius `horizon`, on the infinite lattice j h.  The
// bump is known everywhere, so nodes outside the window are simply used.
double discrete_neg_l(const LimitCheckSpec& spec, double gamma, double horizon,
                      long i) {
  const double h = 1.0 / static_cast<double>(spec.cells);
  const long m = static_cast<long>(std::floor(horizon / h + 1e-12));
  const double xi = static_cast<double>(i) * h;
  const double ui =
      std::exp(-std::pow((xi - spec.bump_center) / spec.bump_sigma, 2));
  double acc = 0.0;
  for (long k = 1; k <= m; ++k) {
    const double rk = static_cast<double>(k) * h;
    if (rk >= horizon) break;  // open interaction ball
    const double w = gamma * std::pow(rk, -1.0 - 2.0 * spec.beta);
    const double up = std::exp(
        -std::pow((xi + rk - spec.bump_center) / spec.bump_sigma, 2));
    const double um = std::exp(
        -std::pow((xi - rk - spec.bump_center) / spec.bump_sigma, 2));
    acc += w * (2.0 * ui - up - um);
  }
  return 2.0 * h * acc;
}

}  // namespace

LimitCheckReport run_limit_check(const LimitCheckSpec& spec) {
  spec.validate();
  LimitCheckReport rep;
  rep.kernel_scale = 0.5 * riesz_constant_1d(spec.beta);

  // Central-third sweep at horizon = window length.
  const long lo = (spec.cells + 2) / 3;
  const long hi = (2 * spec.cells) / 3;
  const double h = 1.0 / static_cast<double>(spec.cells);
  double max_diff = 0.0, max_oracle = 0.0;
  for (long i = lo; i <= hi; ++i) {
    const double oracle = fractional_laplacian_gaussian(
        spec.beta, spec.bump_center, spec.bump_sigma,
        static_cast<double>(i) * h);
    const double ours = discrete_neg_l(spec, rep.kernel_scale, 1.0, i);
    max_diff = std::max(max_diff, std::abs(ours - oracle));
    max_oracle = std::max(max_oracle, std::abs(oracle));
  }
  rep.central_discrepancy = max_oracle > 0.0 ? max_diff / max_oracle : 0.0;
  rep.central_pass = rep.central_discrepancy <= 0.02;

  // Truncation-tail trend at the bump center.
  const long ic = std::lround(spec.bump_center / h);
  const double oracle_c = fractional_laplacian_gaussian(
      spec.beta, spec.bump_center, spec.bump_sigma,
      static_cast<double>(ic) * h);
  for (double factor : spec.horizon_factors) {
    const double ours = discrete_neg_l(spec, rep.kernel_scale, factor, ic);
    rep.center_discrepancies.push_back(std::abs(ours - oracle_c) /
                                       std::abs(oracle_c));
  }
  rep.trend_pass = true;
  for (std::size_t k = 1; k < rep.center_discrepancies.size(); ++k)
    if (rep.center_discrepancies[k] >= rep.center_discrepancies[k - 1])
      rep.trend_pass = false;
  return rep;
}

std::string LimitCheckReport::to_json() const {
  nlohmann::json j;
  j["central_discrepancy"] = central_discrepancy;
  j["center_discrepancies"] = center_discrepancies;
  j["kernel_scale"] = kernel_scale;
  j["central_pass"] = central_pass;
  j["trend_pass"] = trend_pass;
  return j.dump(2);
}

}  // namespace nld
