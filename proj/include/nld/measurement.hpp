/// @file measurement.hpp
/// Flux measurements on the accessible part of the collar and synthetic
/// dataset generation for the two excitation modes of the reconstruction.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nld/fractional.hpp"
#include "nld/grid.hpp"
#include "nld/operators.hpp"
#include "nld/solvers.hpp"

namespace nld {

enum class Model { Classical, Fractional };

const char* to_string(Model m);

/// Nonnegative space-time weight h(x, t) supported on the accessible collar
/// nodes, vanishing at the first and last time level.
class SensorSpec {
 public:
  /// values: one row per accessible node (in node-set order), one column per
  /// time level.
  SensorSpec(const NodeSet& nodes, Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::size_t>& accessible() const { return accessible_; }

  /// Exterior trace h0: sensor values on accessible nodes, zero on the rest
  /// of the collar (n_exterior x levels).
  Eigen::MatrixXd exterior_matrix(const NodeSet& nodes) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<std::size_t> accessible_;
};

/// Hat profile over the accessible nodes: 1 at the centroid of their
/// bounding box, decaying linearly, strictly positive on every one of them.
Eigen::VectorXd accessible_hat(const NodeSet& nodes);

/// Product sensor: spatial hat centered on the accessible region times the
/// time bump t (T - t), normalized to peak value 1.
SensorSpec default_sensor(const NodeSet& nodes, const TimeGrid& grid);

/// Time-integrated weighted flux through the accessible collar:
///   sum_n c_n dt sum_a w N(u)(x_a, t_n) h(x_a, t_n)
/// with trapezoid endpoint weights c_n.
double measure(const NodeSet& nodes, const OperatorMatrix& op,
               const SpaceTimeField& u, const SensorSpec& sensor);

/// Flux data for a family of source profiles under the two excitation modes
/// (v itself, and the model-specific derived series v2).
struct MeasurementSet {
  Eigen::MatrixXd data;  // n_sources x 2
  Model model = Model::Classical;
  double noise_level = 0.0;
  std::uint64_t seed = 0;

  void write_csv(const std::string& path) const;
};

/// Second excitation series of a model: backward differences of v for the
/// classical model, the discrete multi-term Caputo derivative of v for the
/// fractional one.
std::vector<double> derived_series(Model model, const FractionalSpec& frac,
                                   double dt, const std::vector<double>& v);

/// Runs one forward solve per (source, mode) pair and measures the flux.
/// v2 must already be the derived series of the scenario's excitation
/// (backward differences for the classical model, the discrete multi-term
/// derivative for the fractional one).  Optional multiplicative Gaussian
/// noise of relative size `noise_level` is applied to the data only, from a
/// deterministic stream seeded by `seed`.
MeasurementSet synthesize_dataset(
    const NodeSet& nodes, const OperatorMatrix& op, Model model,
    const FractionalSpec& frac, const CoefficientField& q,
    const std::vector<Eigen::VectorXd>& sources, const std::vector<double>& v,
    const std::vector<double>& v2, const SensorSpec& sensor,
    const TimeGrid& grid, double noise_level = 0.0, std::uint64_t seed = 0,
    int threads = 1);

}  // namespace nld
