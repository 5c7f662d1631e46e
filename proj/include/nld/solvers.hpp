/// @file solvers.hpp
/// Time steppers for the volume-constrained diffusion problems and their
/// adjoints.
///
/// Forward (classical):   du/dt - L u + q u = phi v(t),  u = g outside,
///                        u(.,0) = 0, implicit Euler.
/// Forward (multi-term):  D^alpha u + sum_k p_k D^(alpha_k) u - L u + q u =
///                        phi v(t), L1-implicit stepping.
/// Adjoints are discretized as the exact algebraic transpose of the forward
/// step maps, so the duality between source integrals and collar flux
/// measurements holds to machine precision.  For the classical model the
/// transpose coincides with time reversal of the forward stepper applied to
/// time-reversed exterior data.

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "nld/fractional.hpp"
#include "nld/grid.hpp"
#include "nld/operators.hpp"

namespace nld {

struct TimeGrid {
  double dt = 1.0 / 64.0;
  std::size_t steps = 64;

  double horizon_time() const { return dt * static_cast<double>(steps); }
  void validate() const;

  bool operator==(const TimeGrid&) const = default;
};

/// Reaction coefficient sampled at interior nodes; nonnegative and bounded.
struct CoefficientField {
  Eigen::VectorXd q;

  void validate(std::size_t n_interior) const;
};

/// Separated source phi(x) v(t) with v(0) = 0.
struct SourceSpec {
  Eigen::VectorXd phi;    // interior profile
  std::vector<double> v;  // samples at t_0 .. t_N

  void validate(std::size_t n_interior, std::size_t n_steps) const;
};

/// Backward difference quotients (element 0 is zero): the discrete
/// realization of d/dt consistent with the implicit Euler stepper, used to
/// derive second-mode source series.
std::vector<double> discrete_time_derivative(const std::vector<double>& v,
                                             double dt);

/// Nodal trajectory over time levels t_0 .. t_N.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  SpaceTimeField(std::size_t n_nodes, const TimeGrid& grid)
      : grid_(grid),
        values_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_nodes),
                                      static_cast<Eigen::Index>(grid.steps + 1))) {}

  const TimeGrid& grid() const { return grid_; }
  std::size_t nodes() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t levels() const { return static_cast<std::size_t>(values_.cols()); }
  double time(std::size_t n) const { return grid_.dt * static_cast<double>(n); }

  double operator()(std::size_t node, std::size_t level) const {
    return values_(static_cast<Eigen::Index>(node),
                   static_cast<Eigen::Index>(level));
  }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  void write_csv(const NodeSet& nodes, const std::string& path) const;
  void write_binary(const std::string& path) const;

 private:
  TimeGrid grid_;
  Eigen::MatrixXd values_;
};

/// Implicit Euler solve of the classical problem.  `exterior` optionally
/// prescribes time-dependent collar values (n_exterior x (steps+1)); the
/// default is the homogeneous volume constraint.
SpaceTimeField solve_forward(const NodeSet& nodes, const OperatorMatrix& op,
                         const CoefficientField& q, const Eigen::VectorXd& phi,
                         const std::vector<double>& v, const TimeGrid& grid,
                         const Eigen::MatrixXd* exterior = nullptr);

/// L1-implicit solve of the multi-term time-fractional problem.
SpaceTimeField solve_fractional_forward(const NodeSet& nodes, const OperatorMatrix& op,
                             const FractionalSpec& frac,
                             const CoefficientField& q,
                             const Eigen::VectorXd& phi,
                             const std::vector<double>& v, const TimeGrid& grid,
                             const Eigen::MatrixXd* exterior = nullptr);

enum class AdjointMethod { TimeReversal, Transpose };

/// Backward-in-time adjoint of the classical stepper with exterior data h0
/// (n_exterior x (steps+1), vanishing at the final level).  Both methods
/// produce the same trajectory; TimeReversal runs the forward stepper on
/// reversed exterior data, Transpose steps the transposed recursion
/// directly.
SpaceTimeField solve_adjoint(const NodeSet& nodes, const OperatorMatrix& op,
                                 const CoefficientField& q,
                                 const Eigen::MatrixXd& h0, const TimeGrid& grid,
                                 AdjointMethod method = AdjointMethod::TimeReversal);

/// Adjoint of the multi-term stepper: the exact algebraic transpose of the
/// lower-triangular forward map, solved backward in time.
SpaceTimeField solve_fractional_adjoint(const NodeSet& nodes,
                                     const OperatorMatrix& op,
                                     const FractionalSpec& frac,
                                     const CoefficientField& q,
                                     const Eigen::MatrixXd& h0,
                                     const TimeGrid& grid);

struct WeakMPReport {
  double min_value = 0.0;
  double max_abs = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// Weak maximum principle: with nonnegative source and exterior data the
/// trajectory stays nonnegative up to a roundoff margin.
WeakMPReport verify_weak_mp(const SpaceTimeField& field,
                            double tol_factor = 1e-12);

struct StrongMPReport {
  std::size_t cone_nodes = 0;
  double min_in_cone = 0.0;
  bool pass = false;
};

/// Strong maximum principle probe: the field at the final level must be
/// strictly positive on every interior node reachable from the support of
/// the data through at most `steps` horizon hops of the stencil graph.
StrongMPReport verify_strong_mp(const SpaceTimeField& field,
                                const OperatorMatrix& op,
                                const std::vector<std::size_t>& support);

}  // namespace nld
