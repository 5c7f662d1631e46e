/// @file operators.hpp
/// Dense nodal discretization of the nonlocal diffusion operator
///   L u(x) = 2 int (u(y) - u(x)) gamma(x,y) dy
/// together with the collar flux operator and the discrete integral
/// identities (nonlocal Gauss theorem and first Green identity) used to
/// verify it.

#pragma once

#include <Eigen/Dense>
#include <functional>

#include "nld/grid.hpp"
#include "nld/kernel.hpp"

namespace nld {

/// Square stencil over all nodes.  Row i holds the nodal quadrature of
/// 2 int (u(x_i) - u(y)) gamma(x_i, y) dy, so interior rows give (-L u) and
/// collar rows give the negated flux density.  Row sums vanish, off-diagonal
/// entries are <= 0, and the interior block is symmetric.
class OperatorMatrix {
 public:
  const Eigen::MatrixXd& stencil() const { return s_; }
  std::size_t size() const { return static_cast<std::size_t>(s_.rows()); }
  std::size_t interior_count() const { return n_interior_; }
  double node_weight() const { return weight_; }

  /// (-L u) at interior nodes; u is a value per node (collar included).
  Eigen::VectorXd apply_neg_L(const Eigen::VectorXd& u) const;

  /// A_II: interior-to-interior coupling.
  Eigen::Block<const Eigen::MatrixXd> interior_block() const {
    const auto n = static_cast<Eigen::Index>(n_interior_);
    return s_.block(0, 0, n, n);
  }
  /// A_IE: interior rows, collar columns.
  Eigen::Block<const Eigen::MatrixXd> coupling_block() const {
    const auto n = static_cast<Eigen::Index>(n_interior_);
    return s_.block(0, n, n, s_.cols() - n);
  }

  void write_csv(const std::string& path) const;

 private:
  friend OperatorMatrix assemble_L(const NodeSet&, const KernelSpec&,
                                   const TensorField&,
                                   const AntisymmetricField*);
  Eigen::MatrixXd s_;
  std::size_t n_interior_ = 0;
  double weight_ = 0.0;
};

/// Builds the dense stencil.  Node pairs interact iff their exact lattice
/// distance is below the horizon.  When an alpha field is supplied, the
/// factorization alpha . (Theta alpha) = gamma is validated on every
/// interacting pair.  Throws if the kernel is inconsistent with the grid or
/// if near-singular accumulation overflows without the symmetric-pairing
/// mitigation.
OperatorMatrix assemble_L(const NodeSet& nodes, const KernelSpec& kernel,
                          const TensorField& theta = {},
                          const AntisymmetricField* alpha = nullptr);

/// Flux density N at every collar node for nodal values u:
///   N(x) = 2 sum_j w gamma(x, x_j) (u_j - u(x)),
/// returned in node-set order for collar nodes (size = exterior_count()).
/// Zero at collar nodes with no in-horizon partners.
Eigen::VectorXd interaction_flux(const OperatorMatrix& op,
                                 const Eigen::VectorXd& u);

/// Direct (unassembled) action of (-L) at one node; used for quadrature
/// sensitivity diagnostics.  With `paired` the sum accumulates reflection
/// pairs together, restoring cancellation of the leading singularity.
double apply_neg_L_direct(const NodeSet& nodes, const KernelSpec& kernel,
                          const TensorField& theta, const Eigen::VectorXd& u,
                          std::size_t row, bool paired);

/// Two-point vector field given by node indices; only the first dim()
/// components are used.
using TwoPointField =
    std::function<std::array<double, 2>(std::size_t, std::size_t)>;

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;       // for Green: rhs = bilinear + collar terms
  double residual = 0.0;  // relative
  bool pass = false;
};

/// Discrete nonlocal Gauss theorem: sum over the domain of the nonlocal
/// divergence of nu equals the collar sum of the interaction operator.
IdentityCheck check_nonlocal_gauss(const NodeSet& nodes,
                                   const AntisymmetricField& alpha,
                                   const TwoPointField& nu,
                                   double tol = 1e-12);

/// Discrete first Green identity for scalar fields u, v:
///   sum_I w v (-L u)  -  sum_ij w^2 (v_j - v_i)(u_j - u_i) gamma_ij
///     = sum_E w v N(u).
IdentityCheck check_nonlocal_green(const NodeSet& nodes,
                                   const KernelSpec& kernel,
                                   const TensorField& theta,
                                   const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& v,
                                   double tol = 1e-12);

}  // namespace nld
