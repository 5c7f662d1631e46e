#include "nld/measurement.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <thread>

#include "nld/io.hpp"

namespace nld {

const char* to_string(Model m) {
  return m == Model::Classical ? "classical" : "fractional";
}

SensorSpec::SensorSpec(const NodeSet& nodes, Eigen::MatrixXd values)
    : values_(std::move(values)), accessible_(nodes.accessible()) {
  if (accessible_.empty())
    throw std::invalid_argument(
        "sensor: accessible selector matches no collar nodes");
  if (values_.rows() != static_cast<Eigen::Index>(accessible_.size()))
    throw std::invalid_argument("sensor: expected one row per accessible node");
  if (values_.cols() < 2)
    throw std::invalid_argument("sensor: need at least two time levels");
  if (values_.minCoeff() < 0.0 || !values_.allFinite())
    throw std::invalid_argument("sensor: values must be finite and >= 0");
  if (values_.col(0).cwiseAbs().maxCoeff() != 0.0 ||
      values_.col(values_.cols() - 1).cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument(
        "sensor: values must vanish at the first and last time level");
  if (values_.maxCoeff() == 0.0)
    throw std::invalid_argument("sensor: values must not be identically zero");
}

Eigen::MatrixXd SensorSpec::exterior_matrix(const NodeSet& nodes) const {
  const auto ne = static_cast<Eigen::Index>(nodes.exterior_count());
  Eigen::MatrixXd h0 = Eigen::MatrixXd::Zero(ne, values_.cols());
  for (std::size_t k = 0; k < accessible_.size(); ++k) {
    const auto row =
        static_cast<Eigen::Index>(accessible_[k] - nodes.interior_count());
    h0.row(row) = values_.row(static_cast<Eigen::Index>(k));
  }
  return h0;
}

Eigen::VectorXd accessible_hat(const NodeSet& nodes) {
  const auto& acc = nodes.accessible();
  if (acc.empty())
    throw std::invalid_argument(
        "sensor: accessible selector matches no collar nodes");

  std::array<double, 2> clo{nodes.coord(acc[0], 0), nodes.coord(acc[0], 1)};
  std::array<double, 2> chi = clo;
  for (std::size_t a : acc)
    for (int ax = 0; ax < nodes.dim(); ++ax) {
      clo[ax] = std::min(clo[ax], nodes.coord(a, ax));
      chi[ax] = std::max(chi[ax], nodes.coord(a, ax));
    }
  const std::array<double, 2> center{0.5 * (clo[0] + chi[0]),
                                     0.5 * (clo[1] + chi[1])};
  const auto dist = [&](std::size_t a) {
    double r2 = 0.0;
    for (int ax = 0; ax < nodes.dim(); ++ax) {
      const double d = nodes.coord(a, ax) - center[ax];
      r2 += d * d;
    }
    return std::sqrt(r2);
  };
  double radius = nodes.h();
  for (std::size_t a : acc) radius = std::max(radius, dist(a) + nodes.h());

  Eigen::VectorXd hat(static_cast<Eigen::Index>(acc.size()));
  for (std::size_t k = 0; k < acc.size(); ++k)
    hat[static_cast<Eigen::Index>(k)] = 1.0 - dist(acc[k]) / radius;
  return hat;
}

SensorSpec default_sensor(const NodeSet& nodes, const TimeGrid& grid) {
  const Eigen::VectorXd hat = accessible_hat(nodes);
  const double T = grid.horizon_time();
  Eigen::MatrixXd values(hat.size(),
                         static_cast<Eigen::Index>(grid.steps + 1));
  for (std::size_t n = 0; n <= grid.steps; ++n) {
    const double t = grid.dt * static_cast<double>(n);
    values.col(static_cast<Eigen::Index>(n)) = hat * (t * (T - t));
  }
  values /= values.maxCoeff();
  return SensorSpec(nodes, std::move(values));
}

double measure(const NodeSet& nodes, const OperatorMatrix& op,
               const SpaceTimeField& u, const SensorSpec& sensor) {
  if (u.nodes() != nodes.size())
    throw std::invalid_argument("measure: trajectory does not match the node set");
  if (sensor.values().cols() != static_cast<Eigen::Index>(u.levels()))
    throw std::invalid_argument("measure: sensor time levels mismatch");

  const double w = nodes.weight();
  const double dt = u.grid().dt;
  const auto& acc = sensor.accessible();
  const std::size_t last = u.levels() - 1;

  double datum = 0.0;
  for (std::size_t n = 0; n <= last; ++n) {
    const double cn = (n == 0 || n == last) ? 0.5 : 1.0;
    const Eigen::VectorXd flux =
        interaction_flux(op, u.values().col(static_cast<Eigen::Index>(n)));
    double level = 0.0;
    for (std::size_t k = 0; k < acc.size(); ++k) {
      const auto row =
          static_cast<Eigen::Index>(acc[k] - nodes.interior_count());
      level += w * flux[row] *
               sensor.values()(static_cast<Eigen::Index>(k),
                               static_cast<Eigen::Index>(n));
    }
    datum += cn * dt * level;
  }
  return datum;
}

void MeasurementSet::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "source,mode,value\n";
  for (Eigen::Index j = 0; j < data.rows(); ++j)
    for (Eigen::Index i = 0; i < data.cols(); ++i)
      os << j << ',' << i << ',' << format_double(data(j, i)) << '\n';
}

std::vector<double> derived_series(Model model, const FractionalSpec& frac,
                                   double dt, const std::vector<double>& v) {
  if (model == Model::Classical) return discrete_time_derivative(v, dt);
  return multiterm_apply(frac, dt, v);
}

namespace {

// Portable deterministic standard normal (Box-Muller); std distributions are
// implementation-defined and would break byte reproducibility.
double draw_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - static_cast<double>(rng() >> 11) * 0x1p-53;
  const double u2 = static_cast<double>(rng() >> 11) * 0x1p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

MeasurementSet synthesize_dataset(
    const NodeSet& nodes, const OperatorMatrix& op, Model model,
    const FractionalSpec& frac, const CoefficientField& q,
    const std::vector<Eigen::VectorXd>& sources, const std::vector<double>& v,
    const std::vector<double>& v2, const SensorSpec& sensor,
    const TimeGrid& grid, double noise_level, std::uint64_t seed, int threads) {
  if (sources.empty())
    throw std::invalid_argument("synthesize: need at least one source profile");
  if (v.size() != grid.steps + 1 || v2.size() != grid.steps + 1)
    throw std::invalid_argument("synthesize: excitation series length mismatch");
  if (v[0] != 0.0)
    throw std::invalid_argument("synthesize: v must vanish at t = 0");
  if (noise_level < 0.0)
    throw std::invalid_argument("synthesize: noise level must be >= 0");

  MeasurementSet out;
  out.model = model;
  out.noise_level = noise_level;
  out.seed = seed;
  out.data.resize(static_cast<Eigen::Index>(sources.size()), 2);

  const auto run = [&](std::size_t j, int mode) {
    const std::vector<double>& series = mode == 0 ? v : v2;
    const SpaceTimeField u =
        model == Model::Classical
            ? solve_forward(nodes, op, q, sources[j], series, grid)
            : solve_fractional_forward(nodes, op, frac, q, sources[j], series,
                                       grid);
    out.data(static_cast<Eigen::Index>(j), mode) = measure(nodes, op, u, sensor);
  };

  const std::size_t tasks = sources.size() * 2;
  const int nthreads =
      std::max(1, std::min<int>(threads, static_cast<int>(tasks)));
  if (nthreads == 1) {
    for (std::size_t j = 0; j < sources.size(); ++j)
      for (int mode = 0; mode < 2; ++mode) run(j, mode);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t task = static_cast<std::size_t>(t); task < tasks;
             task += static_cast<std::size_t>(nthreads))
          run(task / 2, static_cast<int>(task % 2));
      });
    for (auto& th : pool) th.join();
  }

  if (noise_level > 0.0) {
    std::mt19937_64 rng(seed);
    for (Eigen::Index j = 0; j < out.data.rows(); ++j)
      for (Eigen::Index i = 0; i < out.data.cols(); ++i)
        out.data(j, i) *= 1.0 + noise_level * draw_normal(rng);
  }
  return out;
}

}  // namespace nld
