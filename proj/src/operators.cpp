#include "nld/operators.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "nld/io.hpp"

namespace nld {

namespace {

// Exact in-horizon test via lattice indices: |x_i - x_j| < horizon iff the
// squared lattice distance is strictly below m^2.
long lattice_dist2(const NodeSet& nodes, std::size_t i, std::size_t j) {
  const auto& a = nodes.lattice(i);
  const auto& b = nodes.lattice(j);
  long s = 0;
  for (int ax = 0; ax < nodes.dim(); ++ax) {
    const long d = a[ax] - b[ax];
    s += d * d;
  }
  return s;
}

}  // namespace

OperatorMatrix assemble_L(const NodeSet& nodes, const KernelSpec& kernel,
                          const TensorField& theta,
                          const AntisymmetricField* alpha) {
  kernel.validate();
  theta.validate();
  const int m = nodes.spec().horizon_cells();
  if (std::abs(kernel.horizon - nodes.horizon()) >
      1e-12 * std::max(1.0, nodes.horizon()))
    throw std::invalid_argument(
        "assemble_L: kernel horizon differs from the node-set horizon");

  const auto n = static_cast<Eigen::Index>(nodes.size());
  const long m2 = static_cast<long>(m) * m;
  const double w = nodes.weight();

  OperatorMatrix op;
  op.n_interior_ = nodes.interior_count();
  op.weight_ = w;
  op.s_ = Eigen::MatrixXd::Zero(n, n);

  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (lattice_dist2(nodes, i, j) >= m2) continue;
      const double g = kernel.value(nodes.distance(i, j), nodes.dim());
      if (alpha) {
        // The factorization alpha . (Theta alpha) must reproduce the kernel
        // on every interacting pair, and alpha must be antisymmetric.
        const auto aij = alpha->value(nodes.coord(i), nodes.coord(j), nodes.dim());
        const auto aji = alpha->value(nodes.coord(j), nodes.coord(i), nodes.dim());
        double quad = 0.0, antisym = 0.0;
        for (int ax = 0; ax < nodes.dim(); ++ax) {
          quad += aij[ax] * theta.scale * aij[ax];
          antisym = std::max(antisym, std::abs(aij[ax] + aji[ax]));
        }
        if (std::abs(quad - g) > 1e-12 * std::max(1.0, g) ||
            antisym > 1e-12 * std::max(1.0, std::abs(aij[0]) + std::abs(aij[1])))
          throw std::runtime_error(
              "assemble_L: alpha/theta factorization inconsistent with the "
              "kernel on an interacting node pair");
      }
      op.s_(i, j) = -2.0 * w * g;
      diag += 2.0 * w * g;
    }
    if (!std::isfinite(diag)) {
      if (kernel.beta >= 0.5 && !kernel.symmetric_pairing)
        throw std::runtime_error(
            "assemble_L: near-singular accumulation overflowed; enable "
            "symmetric pairing for beta >= 1/2");
      throw std::runtime_error("assemble_L: non-finite row accumulation");
    }
    op.s_(i, i) = diag;
  }
  return op;
}

Eigen::VectorXd OperatorMatrix::apply_neg_L(const Eigen::VectorXd& u) const {
  if (u.size() != s_.rows())
    throw std::invalid_argument("apply_neg_L: field size mismatch");
  return s_.topRows(static_cast<Eigen::Index>(n_interior_)) * u;
}

void OperatorMatrix::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  for (Eigen::Index i = 0; i < s_.rows(); ++i) {
    for (Eigen::Index j = 0; j < s_.cols(); ++j) {
      if (j) os << ',';
      os << format_double(s_(i, j));
    }
    os << '\n';
  }
}

Eigen::VectorXd interaction_flux(const OperatorMatrix& op,
                                 const Eigen::VectorXd& u) {
  const auto n = static_cast<Eigen::Index>(op.size());
  const auto ni = static_cast<Eigen::Index>(op.interior_count());
  if (u.size() != n)
    throw std::invalid_argument("interaction_flux: field size mismatch");
  return -(op.stencil().bottomRows(n - ni) * u);
}

double apply_neg_L_direct(const NodeSet& nodes, const KernelSpec& kernel,
                          const TensorField& theta, const Eigen::VectorXd& u,
                          std::size_t row, bool paired) {
  theta.validate();
  const int m = nodes.spec().horizon_cells();
  const long m2 = static_cast<long>(m) * m;
  const double w = nodes.weight();
  const double ui = u[static_cast<Eigen::Index>(row)];

  if (!paired) {
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j == row || lattice_dist2(nodes, row, j) >= m2) continue;
      const double g = kernel.value(nodes.distance(row, j), nodes.dim());
      acc += 2.0 * w * g * (ui - u[static_cast<Eigen::Index>(j)]);
    }
    return acc;
  }

  // Pair each partner with its reflection through the row node, so the first
  // order parts of (u_j - u_i) cancel before multiplication by the large
  // near-singular kernel values.
  const auto& lat0 = nodes.lattice(row);
  double acc = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (j == row || lattice_dist2(nodes, row, j) >= m2) continue;
    const std::array<int, 2> refl{2 * lat0[0] - nodes.lattice(j)[0],
                                  2 * lat0[1] - nodes.lattice(j)[1]};
    std::size_t jr = nodes.size();
    for (std::size_t k = 0; k < nodes.size(); ++k)
      if (nodes.lattice(k) == refl) {
        jr = k;
        break;
      }
    const double g = kernel.value(nodes.distance(row, j), nodes.dim());
    if (jr < nodes.size() && jr > j) {
      const double du = (ui - u[static_cast<Eigen::Index>(j)]) +
                        (ui - u[static_cast<Eigen::Index>(jr)]);
      acc += 2.0 * w * g * du;
    } else if (jr == nodes.size()) {
      acc += 2.0 * w * g * (ui - u[static_cast<Eigen::Index>(j)]);
    }
  }
  return acc;
}

IdentityCheck check_nonlocal_gauss(const NodeSet& nodes,
                                   const AntisymmetricField& alpha,
                                   const TwoPointField& nu, double tol) {
  const int d = nodes.dim();
  const double w = nodes.weight();
  double lhs = 0.0, rhs = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double div = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (i == j) continue;
      const auto a = alpha.value(nodes.coord(i), nodes.coord(j), d);
      const auto nij = nu(i, j);
      const auto nji = nu(j, i);
      for (int ax = 0; ax < d; ++ax) div += (nij[ax] + nji[ax]) * a[ax];
    }
    div *= w;
    if (nodes.is_exterior(i))
      rhs += -w * div;  // interaction operator carries the opposite sign
    else
      lhs += w * div;
    scale += w * std::abs(div);
  }
  IdentityCheck out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.residual = std::abs(lhs - rhs) / std::max(scale, 1e-300);
  out.pass = out.residual <= tol;
  return out;
}

IdentityCheck check_nonlocal_green(const NodeSet& nodes,
                                   const KernelSpec& kernel,
                                   const TensorField& theta,
                                   const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& v, double tol) {
  theta.validate();
  const int m = nodes.spec().horizon_cells();
  const long m2 = static_cast<long>(m) * m;
  const double w = nodes.weight();
  const auto n = nodes.size();
  if (u.size() != static_cast<Eigen::Index>(n) || v.size() != u.size())
    throw std::invalid_argument("check_nonlocal_green: field size mismatch");

  double domain_term = 0.0, bilinear = 0.0, collar_term = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    double action = 0.0;  // 2 sum_j w gamma (u_j - u_i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || lattice_dist2(nodes, i, j) >= m2) continue;
      const auto jj = static_cast<Eigen::Index>(j);
      const double g = kernel.value(nodes.distance(i, j), nodes.dim());
      action += 2.0 * w * g * (u[jj] - u[ii]);
      bilinear += w * w * (v[jj] - v[ii]) * (u[jj] - u[ii]) * g;
    }
    if (nodes.is_exterior(i))
      collar_term += w * v[ii] * action;
    else
      domain_term += w * v[ii] * (-action);
  }
  IdentityCheck out;
  out.lhs = domain_term - bilinear;
  out.rhs = collar_term;
  const double scale = std::max({std::abs(domain_term), std::abs(bilinear),
                                 std::abs(collar_term), 1e-300});
  out.residual = std::abs(out.lhs - out.rhs) / scale;
  out.pass = out.residual <= tol;
  return out;
}

}  // namespace nld
