#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "nld/grid.hpp"
#include "nld/measurement.hpp"
#include "nld/operators.hpp"
#include "nld/solvers.hpp"

using namespace nld;

namespace {

struct Setup {
  NodeSet nodes;
  OperatorMatrix op;
  CoefficientField q;
  TimeGrid grid{1.0 / 16.0, 16};
};

Setup make_setup(AccessibleSelector sel = AccessibleSelector::side(0, +1)) {
  DomainSpec d;
  d.dim = 1;
  d.lo = {0.0, 0.0};
  d.hi = {1.0, 1.0};
  d.h = 1.0 / 16.0;
  d.horizon = 3.0 / 16.0;
  d.accessible = sel;
  KernelSpec k;
  k.beta = 0.25;
  k.gamma_lo = k.gamma_hi = 1.0;
  k.horizon = d.horizon;
  NodeSet nodes = build_nodes(d);
  OperatorMatrix op = assemble_L(nodes, k);
  CoefficientField q;
  q.q = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(nodes.interior_count()), 1.0);
  return {std::move(nodes), std::move(op), std::move(q)};
}

std::vector<double> bump(const TimeGrid& grid) {
  std::vector<double> v(grid.steps + 1, 0.0);
  const double T = grid.horizon_time();
  for (std::size_t n = 1; n < grid.steps; ++n) {
    const double t = grid.dt * static_cast<double>(n);
    v[n] = 4.0 * t * (T - t) / (T * T);
  }
  return v;
}

}  // namespace

TEST_SUITE("measurement") {

TEST_CASE("measure agrees with a brute-force quadrature") {
  const Setup s = make_setup();
  const SensorSpec sensor = default_sensor(s.nodes, s.grid);
  const Eigen::VectorXd phi = Eigen::VectorXd::Ones(
      static_cast<Eigen::Index>(s.nodes.interior_count()));
  const SpaceTimeField u =
      solve_forward(s.nodes, s.op, s.q, phi, bump(s.grid), s.grid);

  const double got = measure(s.nodes, s.op, u, sensor);

  // Recompute from first principles: trapezoid in time of the weighted flux
  // restricted to the accessible nodes.
  double want = 0.0;
  for (std::size_t n = 0; n <= s.grid.steps; ++n) {
    const double cn = (n == 0 || n == s.grid.steps) ? 0.5 : 1.0;
    double level = 0.0;
    for (std::size_t k = 0; k < sensor.accessible().size(); ++k) {
      const std::size_t a = sensor.accessible()[k];
      double flux = 0.0;
      for (std::size_t j = 0; j < s.nodes.size(); ++j) {
        if (j == a) continue;
        const double g = s.op.stencil()(static_cast<Eigen::Index>(a),
                                        static_cast<Eigen::Index>(j));
        // Stencil row a stores -2 w gamma(a, j) off the diagonal.
        flux += -g * (u(j, n) - u(a, n));
      }
      level += s.nodes.weight() * flux *
               sensor.values()(static_cast<Eigen::Index>(k),
                               static_cast<Eigen::Index>(n));
    }
    want += cn * s.grid.dt * level;
  }
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
  CHECK(got != 0.0);
}

TEST_CASE("zero trajectory measures zero") {
  const Setup s = make_setup();
  const SensorSpec sensor = default_sensor(s.nodes, s.grid);
  const SpaceTimeField zero(s.nodes.size(), s.grid);
  CHECK(measure(s.nodes, s.op, zero, sensor) == 0.0);
}

TEST_CASE("sensor validation") {
  const Setup s = make_setup();
  const auto na = static_cast<Eigen::Index>(s.nodes.accessible_count());
  const auto levels = static_cast<Eigen::Index>(s.grid.steps + 1);

  Eigen::MatrixXd ok = Eigen::MatrixXd::Zero(na, levels);
  ok.block(0, 1, na, levels - 2).setConstant(1.0);
  CHECK_NOTHROW(SensorSpec(s.nodes, ok));

  Eigen::MatrixXd bad = ok;
  bad(0, 0) = 0.5;  // nonzero at the first level
  CHECK_THROWS_AS(SensorSpec(s.nodes, bad), std::invalid_argument);

  bad = ok;
  bad(0, levels - 1) = 0.5;  // nonzero at the final level
  CHECK_THROWS_AS(SensorSpec(s.nodes, bad), std::invalid_argument);

  bad = ok;
  bad(1, 3) = -0.25;  // negative weight
  CHECK_THROWS_AS(SensorSpec(s.nodes, bad), std::invalid_argument);

  CHECK_THROWS_AS(SensorSpec(s.nodes, Eigen::MatrixXd::Zero(na, levels)),
                  std::invalid_argument);  // identically zero
  CHECK_THROWS_AS(SensorSpec(s.nodes, Eigen::MatrixXd::Zero(na + 1, levels)),
                  std::invalid_argument);  // row count mismatch

  // No accessible nodes at all.
  const Setup closed = make_setup(AccessibleSelector::none());
  CHECK_THROWS_AS(SensorSpec(closed.nodes, ok), std::invalid_argument);
  CHECK_THROWS_AS(accessible_hat(closed.nodes), std::invalid_argument);
}

TEST_CASE("hat profile is positive and peaks at the patch center") {
  const Setup s = make_setup(AccessibleSelector::full_collar());
  const Eigen::VectorXd hat = accessible_hat(s.nodes);
  REQUIRE(hat.size() ==
          static_cast<Eigen::Index>(s.nodes.accessible_count()));
  for (Eigen::Index i = 0; i < hat.size(); ++i) {
    CHECK(hat[i] > 0.0);
    CHECK(hat[i] <= 1.0);
  }
}

TEST_CASE("exterior matrix embeds sensor rows and zero-fills the rest") {
  const Setup s = make_setup();
  const SensorSpec sensor = default_sensor(s.nodes, s.grid);
  const Eigen::MatrixXd h0 = sensor.exterior_matrix(s.nodes);
  REQUIRE(h0.rows() == static_cast<Eigen::Index>(s.nodes.exterior_count()));

  std::vector<bool> is_acc(s.nodes.size(), false);
  for (std::size_t a : s.nodes.accessible()) is_acc[a] = true;
  for (std::size_t e = s.nodes.interior_count(); e < s.nodes.size(); ++e) {
    const auto row = static_cast<Eigen::Index>(e - s.nodes.interior_count());
    if (!is_acc[e]) CHECK(h0.row(row).cwiseAbs().maxCoeff() == 0.0);
  }
  for (std::size_t k = 0; k < sensor.accessible().size(); ++k) {
    const auto row = static_cast<Eigen::Index>(sensor.accessible()[k] -
                                               s.nodes.interior_count());
    CHECK((h0.row(row) - sensor.values().row(static_cast<Eigen::Index>(k)))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("derived series per model") {
  const double dt = 0.25;
  const std::vector<double> v{0.0, 1.0, 3.0, 2.0};
  const FractionalSpec frac{0.7, {0.3}, {0.5}};

  const auto dv = derived_series(Model::Classical, frac, dt, v);
  CHECK(dv[0] == 0.0);
  CHECK(dv[1] == doctest::Approx(4.0));
  CHECK(dv[2] == doctest::Approx(8.0));
  CHECK(dv[3] == doctest::Approx(-4.0));

  const auto df = derived_series(Model::Fractional, frac, dt, v);
  const auto want = multiterm_apply(frac, dt, v);
  for (std::size_t n = 0; n < v.size(); ++n)
    CHECK(df[n] == doctest::Approx(want[n]));
}

TEST_CASE("dataset synthesis is deterministic and noise is seeded") {
  const Setup s = make_setup();
  const SensorSpec sensor = default_sensor(s.nodes, s.grid);
  const auto v = bump(s.grid);
  const auto v2 = derived_series(Model::Classical, {}, s.grid.dt, v);
  std::vector<Eigen::VectorXd> sources;
  for (int j = 0; j < 3; ++j) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(
        static_cast<Eigen::Index>(s.nodes.interior_count()));
    p[4 * j + 1] = 1.0;
    sources.push_back(p);
  }

  const auto clean = [&](int threads) {
    return synthesize_dataset(s.nodes, s.op, Model::Classical, {}, s.q,
                              sources, v, v2, sensor, s.grid, 0.0, 0, threads);
  };
  const MeasurementSet a = clean(1), b = clean(1), c = clean(4);
  CHECK((a.data - b.data).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.data - c.data).cwiseAbs().maxCoeff() == 0.0);

  const auto noisy = [&](std::uint64_t seed) {
    return synthesize_dataset(s.nodes, s.op, Model::Classical, {}, s.q,
                              sources, v, v2, sensor, s.grid, 0.01, seed, 1);
  };
  const MeasurementSet n1 = noisy(42), n2 = noisy(42), n3 = noisy(43);
  CHECK((n1.data - n2.data).cwiseAbs().maxCoeff() == 0.0);
  CHECK((n1.data - n3.data).cwiseAbs().maxCoeff() > 0.0);
  CHECK((n1.data - a.data).cwiseAbs().maxCoeff() > 0.0);
  // Multiplicative noise at 1% stays within a loose band of the clean data.
  for (Eigen::Index i = 0; i < a.data.rows(); ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      CHECK(std::abs(n1.data(i, j) - a.data(i, j)) <=
            0.1 * std::abs(a.data(i, j)));
}

TEST_CASE("synthesis validation") {
  const Setup s = make_setup();
  const SensorSpec sensor = default_sensor(s.nodes, s.grid);
  auto v = bump(s.grid);
  const auto v2 = derived_series(Model::Classical, {}, s.grid.dt, v);
  const std::vector<Eigen::VectorXd> sources{Eigen::VectorXd::Ones(
      static_cast<Eigen::Index>(s.nodes.interior_count()))};

  CHECK_THROWS_AS(
      synthesize_dataset(s.nodes, s.op, Model::Classical, {}, s.q, {}, v, v2,
                         sensor, s.grid),
      std::invalid_argument);
  CHECK_THROWS_AS(
      synthesize_dataset(s.nodes, s.op, Model::Classical, {}, s.q, sources, v,
                         v2, sensor, s.grid, -0.5),
      std::invalid_argument);
  v[0] = 1.0;
  CHECK_THROWS_AS(
      synthesize_dataset(s.nodes, s.op, Model::Classical, {}, s.q, sources, v,
                         v2, sensor, s.grid),
      std::invalid_argument);
}

}  // TEST_SUITE
