#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nld/limit_check.hpp"

using namespace nld;

namespace {

// (-Delta)^beta of the unit Gaussian bump evaluated at its center: the
// Fourier integral collapses to 4^beta Gamma(beta + 1/2) / (sqrt(pi)
// sigma^(2 beta)).
double center_value(double beta, double sigma) {
  return std::pow(4.0, beta) * std::tgamma(beta + 0.5) /
         (std::sqrt(M_PI) * std::pow(sigma, 2.0 * beta));
}

}  // namespace

TEST_SUITE("limit") {

TEST_CASE("riesz constant closed forms") {
  CHECK(riesz_constant_1d(0.5) == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
  // At beta = 1/4 the Gamma(3/4) factors cancel.
  CHECK(riesz_constant_1d(0.25) ==
        doctest::Approx(std::sqrt(2.0) / (4.0 * std::sqrt(M_PI)))
            .epsilon(1e-14));
  for (double beta : {0.1, 0.3, 0.6, 0.9})
    CHECK(riesz_constant_1d(beta) > 0.0);
}

TEST_CASE("fractional laplacian of a gaussian at its center") {
  for (double beta : {0.25, 0.5, 0.7}) {
    for (double sigma : {0.07, 0.15}) {
      // The |xi|^(2 beta) kink at the origin limits fixed-step Simpson to
      // about 1e-7 relative at beta = 1/4.
      const double got = fractional_laplacian_gaussian(beta, 0.15, sigma, 0.15);
      CHECK(got == doctest::Approx(center_value(beta, sigma)).epsilon(1e-6));
    }
  }
  // Even symmetry about the bump center and decay away from it.
  const double left = fractional_laplacian_gaussian(0.3, 0.5, 0.07, 0.45);
  const double right = fractional_laplacian_gaussian(0.3, 0.5, 0.07, 0.55);
  CHECK(left == doctest::Approx(right).epsilon(1e-10));
  const double at_center = fractional_laplacian_gaussian(0.3, 0.5, 0.07, 0.5);
  const double far = fractional_laplacian_gaussian(0.3, 0.5, 0.07, 1.5);
  CHECK(at_center > std::abs(far));
}

TEST_CASE("limit check report is internally consistent") {
  LimitCheckSpec spec;
  spec.cells = 192;
  spec.horizon_factors = {1.0, 2.0};
  const LimitCheckReport rep = run_limit_check(spec);

  CHECK(rep.kernel_scale ==
        doctest::Approx(0.5 * riesz_constant_1d(spec.beta)).epsilon(1e-14));
  REQUIRE(rep.center_discrepancies.size() == 2);
  CHECK(rep.central_discrepancy >= 0.0);
  CHECK(rep.central_pass == (rep.central_discrepancy <= 0.02));
  CHECK(rep.trend_pass ==
        (rep.center_discrepancies[1] < rep.center_discrepancies[0]));
  // Even at this reduced resolution the central third tracks the oracle.
  CHECK(rep.central_discrepancy <= 0.05);

  const std::string json = rep.to_json();
  CHECK(json.find("central_discrepancy") != std::string::npos);
  CHECK(json.find("kernel_scale") != std::string::npos);
}

TEST_CASE("limit check spec validation") {
  LimitCheckSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.beta = 1.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.beta = 0.25;
  spec.cells = 8;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.cells = 512;
  spec.bump_sigma = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.bump_sigma = 0.07;
  spec.horizon_factors = {};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.horizon_factors = {0.5, 2.0};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

}  // TEST_SUITE
