/// @file inversion.hpp
/// Recovery of the reaction coefficient from flux data: moment-field
/// recovery through a basis expansion, exterior extension from the known
/// sensor trace, and the pointwise division identity.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nld/grid.hpp"
#include "nld/measurement.hpp"
#include "nld/operators.hpp"
#include "nld/solvers.hpp"

namespace nld {

/// Source/expansion basis sampled on interior nodes.
///   Nodal: one indicator per interior node; complete at the discrete level,
///          diagonal Gram with entries w.
///   Sine:  L2-orthonormal sine modes (d = 1); exactly orthonormal in the
///          discrete inner product while modes < cells.
struct BasisSpec {
  enum class Family { Nodal, Sine };

  Family family = Family::Nodal;
  std::size_t modes = 0;  // 0 with Nodal means one mode per interior node
  bool ridge = false;     // stabilize an ill-conditioned Gram when solving

  void validate(const NodeSet& nodes) const;
  std::size_t count(const NodeSet& nodes) const;

  bool operator==(const BasisSpec&) const = default;

  /// Basis matrix, one column per mode (n_interior x J).
  Eigen::MatrixXd build(const NodeSet& nodes) const;
};

const char* to_string(BasisSpec::Family f);

/// Gram matrix G_{jk} = w sum_I basis(i,j) basis(i,k).
Eigen::MatrixXd gram_matrix(const NodeSet& nodes, const Eigen::MatrixXd& basis);

struct MomentFields {
  Eigen::VectorXd v1, v2;      // interior nodes
  double gram_condition = 1.0;
  double ridge = 0.0;          // 0 when no ridge was applied
};

/// Solves G a = m for both data columns and expands in the basis.  Throws
/// when the Gram condition estimate exceeds 1e12 and no ridge is enabled.
MomentFields recover_moments(const NodeSet& nodes, const BasisSpec& basis,
                             const MeasurementSet& data);

/// Moment value on every collar node: dt * sum_{n>=1} series_n h0(x, t_n).
/// Zero outside the accessible region where the sensor vanishes.
Eigen::VectorXd extend_moment_exterior(const NodeSet& nodes,
                                       const SensorSpec& sensor,
                                       const std::vector<double>& series,
                                       const TimeGrid& grid);

/// Sup-norm residual of  V2 + (-L V1) + q V1 = 0  on interior nodes,
/// relative to the sup norms of the three terms.  v1_full carries interior
/// values followed by the collar extension.
double identity_residual(const NodeSet& nodes, const OperatorMatrix& op,
                         const Eigen::VectorXd& v1_full,
                         const Eigen::VectorXd& v2,
                         const Eigen::VectorXd& q);

struct ReconstructionResult {
  Eigen::VectorXd q;            // interior nodes; NaN on masked nodes
  Eigen::VectorXd v1, v2;       // recovered moment fields on interior nodes
  Eigen::VectorXd v1_exterior;  // collar extension of v1
  std::vector<std::uint8_t> masked;      // 1 = |v1| below threshold
  std::vector<std::size_t> masked_nodes;

  Model model = Model::Classical;
  std::size_t modes = 0;
  double min_v1 = 0.0;
  double gram_condition = 1.0;
  double ridge = 0.0;
  double mask_threshold = 0.0;
  double residual = 0.0;  // identity residual with the recovered q

  double masked_fraction() const;

  /// CSV: coordinates, q_true (empty fields when unknown), q_hat, masked.
  void write_csv(const NodeSet& nodes, const std::string& path,
                 const Eigen::VectorXd* q_true = nullptr) const;
  std::string diagnostics_json() const;
};

/// Full classical pipeline: moment recovery, exterior extension, division.
/// Nodes where |v1| < 1e-10 max|v1| are masked; if every node is masked the
/// sensor does not illuminate the domain and the call throws.
ReconstructionResult reconstruct_q(const NodeSet& nodes,
                                   const OperatorMatrix& op,
                                   const BasisSpec& basis,
                                   const MeasurementSet& data,
                                   const SensorSpec& sensor,
                                   const std::vector<double>& v,
                                   const TimeGrid& grid);

/// Fractional pipeline: identical construction with the discrete multi-term
/// derivative of v as the second excitation series.
ReconstructionResult reconstruct_q_fractional(const NodeSet& nodes,
                                              const OperatorMatrix& op,
                                              const FractionalSpec& frac,
                                              const BasisSpec& basis,
                                              const MeasurementSet& data,
                                              const SensorSpec& sensor,
                                              const std::vector<double>& v,
                                              const TimeGrid& grid);

/// Data-space separation of two coefficient fields under the same scenario:
/// distinct coefficients must produce distinct datasets.
struct UniquenessReport {
  double coefficient_distance = 0.0;  // max-abs difference of the q fields
  double data_distance = 0.0;         // max-abs difference of the datasets
  double data_scale = 0.0;            // max-abs entry across both datasets
};

UniquenessReport uniqueness_probe(const NodeSet& nodes,
                                  const OperatorMatrix& op, Model model,
                                  const FractionalSpec& frac,
                                  const CoefficientField& q_a,
                                  const CoefficientField& q_b,
                                  const BasisSpec& basis,
                                  const SensorSpec& sensor,
                                  const std::vector<double>& v,
                                  const TimeGrid& grid, int threads = 1);

}  // namespace nld
