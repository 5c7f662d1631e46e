#include "nld/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "nld/io.hpp"

namespace nld {

void TimeGrid::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("time grid: dt must be positive");
  if (steps < 1) throw std::invalid_argument("time grid: need at least one step");
}

void CoefficientField::validate(std::size_t n_interior) const {
  if (q.size() != static_cast<Eigen::Index>(n_interior))
    throw std::invalid_argument("coefficient: expected one value per interior node");
  for (Eigen::Index i = 0; i < q.size(); ++i)
    if (!(q[i] >= 0.0) || !std::isfinite(q[i]))
      throw std::invalid_argument("coefficient: values must be finite and >= 0");
}

void SourceSpec::validate(std::size_t n_interior, std::size_t n_steps) const {
  if (phi.size() != static_cast<Eigen::Index>(n_interior))
    throw std::invalid_argument("source: profile must have one value per interior node");
  if (v.size() != n_steps + 1)
    throw std::invalid_argument("source: need one v sample per time level");
  if (v[0] != 0.0)
    throw std::invalid_argument("source: v must vanish at t = 0");
  for (double s : v)
    if (!std::isfinite(s)) throw std::invalid_argument("source: v must be finite");
}

std::vector<double> discrete_time_derivative(const std::vector<double>& v,
                                             double dt) {
  if (v.size() < 2)
    throw std::invalid_argument("time derivative: need at least two samples");
  std::vector<double> d(v.size(), 0.0);
  for (std::size_t n = 1; n < v.size(); ++n) d[n] = (v[n] - v[n - 1]) / dt;
  return d;
}

void SpaceTimeField::write_csv(const NodeSet& nodes, const std::string& path) const {
  if (nodes.size() != this->nodes())
    throw std::invalid_argument("trajectory csv: node set size mismatch");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << (nodes.dim() == 1 ? "x" : "x,y") << ",label";
  for (std::size_t n = 0; n < levels(); ++n)
    os << ",t" << format_double(time(n));
  os << '\n';
  for (std::size_t i = 0; i < this->nodes(); ++i) {
    os << format_double(nodes.coord(i, 0));
    if (nodes.dim() == 2) os << ',' << format_double(nodes.coord(i, 1));
    os << ',' << to_string(nodes.label(i));
    for (std::size_t n = 0; n < levels(); ++n)
      os << ',' << format_double((*this)(i, n));
    os << '\n';
  }
}

void SpaceTimeField::write_binary(const std::string& path) const {
  // Row-major: one row per node, one column per time level.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm =
      values_;
  write_binary_matrix(path, nodes(), levels(), rm.data());
}

namespace {

struct Workspace {
  Eigen::Index ni = 0, ne = 0;
  Eigen::MatrixXd coupling;  // A_IE
  Eigen::LLT<Eigen::MatrixXd> llt;
};

Workspace prepare(const NodeSet& nodes, const OperatorMatrix& op,
                  const CoefficientField& q, double diag_shift,
                  const Eigen::MatrixXd* exterior, std::size_t levels) {
  if (op.size() != nodes.size() || op.interior_count() != nodes.interior_count())
    throw std::invalid_argument("solver: operator does not match the node set");
  q.validate(nodes.interior_count());

  Workspace ws;
  ws.ni = static_cast<Eigen::Index>(nodes.interior_count());
  ws.ne = static_cast<Eigen::Index>(nodes.exterior_count());
  if (exterior &&
      (exterior->rows() != ws.ne ||
       exterior->cols() != static_cast<Eigen::Index>(levels)))
    throw std::invalid_argument("solver: exterior data has the wrong shape");

  Eigen::MatrixXd system = op.interior_block();
  system.diagonal() += q.q;
  system.diagonal().array() += diag_shift;
  ws.llt.compute(system);
  if (ws.llt.info() != Eigen::Success)
    throw std::runtime_error("solver: system factorization failed");
  ws.coupling = op.coupling_block();
  return ws;
}

}  // namespace

SpaceTimeField solve_forward(const NodeSet& nodes, const OperatorMatrix& op,
                         const CoefficientField& q, const Eigen::VectorXd& phi,
                         const std::vector<double>& v, const TimeGrid& grid,
                         const Eigen::MatrixXd* exterior) {
  grid.validate();
  if (phi.size() != static_cast<Eigen::Index>(nodes.interior_count()))
    throw std::invalid_argument("solver: source profile size mismatch");
  if (v.size() != grid.steps + 1)
    throw std::invalid_argument("solver: need one v sample per time level");

  const double inv_dt = 1.0 / grid.dt;
  Workspace ws = prepare(nodes, op, q, inv_dt, exterior, grid.steps + 1);

  SpaceTimeField out(nodes.size(), grid);
  auto& U = out.values();
  if (exterior) U.bottomRows(ws.ne).col(0) = exterior->col(0);

  Eigen::VectorXd prev = Eigen::VectorXd::Zero(ws.ni);
  for (std::size_t n = 1; n <= grid.steps; ++n) {
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd rhs = prev * inv_dt + phi * v[n];
    if (exterior) rhs.noalias() -= ws.coupling * exterior->col(nn);
    prev = ws.llt.solve(rhs);
    U.col(nn).head(ws.ni) = prev;
    if (exterior) U.col(nn).tail(ws.ne) = exterior->col(nn);
  }
  return out;
}

SpaceTimeField solve_fractional_forward(const NodeSet& nodes, const OperatorMatrix& op,
                             const FractionalSpec& frac,
                             const CoefficientField& q,
                             const Eigen::VectorXd& phi,
                             const std::vector<double>& v, const TimeGrid& grid,
                             const Eigen::MatrixXd* exterior) {
  grid.validate();
  if (phi.size() != static_cast<Eigen::Index>(nodes.interior_count()))
    throw std::invalid_argument("solver: source profile size mismatch");
  if (v.size() != grid.steps + 1)
    throw std::invalid_argument("solver: need one v sample per time level");

  const auto lag = multiterm_lag_coefficients(frac, grid.dt, grid.steps);
  Workspace ws = prepare(nodes, op, q, lag[0], exterior, grid.steps + 1);

  SpaceTimeField out(nodes.size(), grid);
  auto& U = out.values();
  if (exterior) U.bottomRows(ws.ne).col(0) = exterior->col(0);

  // History columns u^1 .. u^{n-1} enter with weights lag[n-j] - lag[n-j-1].
  for (std::size_t n = 1; n <= grid.steps; ++n) {
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd rhs = phi * v[n];
    for (std::size_t j = 1; j < n; ++j)
      rhs.noalias() -=
          (lag[n - j] - lag[n - j - 1]) *
          U.col(static_cast<Eigen::Index>(j)).head(ws.ni);
    if (exterior) rhs.noalias() -= ws.coupling * exterior->col(nn);
    U.col(nn).head(ws.ni) = ws.llt.solve(rhs);
    if (exterior) U.col(nn).tail(ws.ne) = exterior->col(nn);
  }
  return out;
}

namespace {

void require_adjoint_data(const Eigen::MatrixXd& h0, Eigen::Index ne,
                          std::size_t levels) {
  if (h0.rows() != ne || h0.cols() != static_cast<Eigen::Index>(levels))
    throw std::invalid_argument("adjoint: exterior data has the wrong shape");
  if (h0.col(h0.cols() - 1).cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument(
        "adjoint: exterior data must vanish at the final time level");
}

}  // namespace

SpaceTimeField solve_adjoint(const NodeSet& nodes, const OperatorMatrix& op,
                                 const CoefficientField& q,
                                 const Eigen::MatrixXd& h0, const TimeGrid& grid,
                                 AdjointMethod method) {
  grid.validate();
  const auto ne = static_cast<Eigen::Index>(nodes.exterior_count());
  require_adjoint_data(h0, ne, grid.steps + 1);
  const auto N = static_cast<Eigen::Index>(grid.steps);

  if (method == AdjointMethod::TimeReversal) {
    Eigen::MatrixXd reversed = h0.rowwise().reverse();
    const Eigen::VectorXd no_phi =
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nodes.interior_count()));
    const std::vector<double> no_v(grid.steps + 1, 0.0);
    SpaceTimeField fwd =
        solve_forward(nodes, op, q, no_phi, no_v, grid, &reversed);
    SpaceTimeField out(nodes.size(), grid);
    out.values() = fwd.values().rowwise().reverse();
    return out;
  }

  // Transposed recursion: w^N = 0, (1/dt + A + q) w^n = w^{n+1}/dt + G^n
  // with G^n the interior coupling of the exterior data at level n.
  const double inv_dt = 1.0 / grid.dt;
  Workspace ws = prepare(nodes, op, q, inv_dt, &h0, grid.steps + 1);
  SpaceTimeField out(nodes.size(), grid);
  auto& W = out.values();
  W.bottomRows(ws.ne) = h0;
  Eigen::VectorXd next = Eigen::VectorXd::Zero(ws.ni);
  for (Eigen::Index n = N - 1; n >= 0; --n) {
    Eigen::VectorXd rhs = next * inv_dt;
    rhs.noalias() -= ws.coupling * h0.col(n);
    next = ws.llt.solve(rhs);
    W.col(n).head(ws.ni) = next;
  }
  return out;
}

SpaceTimeField solve_fractional_adjoint(const NodeSet& nodes,
                                     const OperatorMatrix& op,
                                     const FractionalSpec& frac,
                                     const CoefficientField& q,
                                     const Eigen::MatrixXd& h0,
                                     const TimeGrid& grid) {
  grid.validate();
  const auto ne = static_cast<Eigen::Index>(nodes.exterior_count());
  require_adjoint_data(h0, ne, grid.steps + 1);

  const auto lag = multiterm_lag_coefficients(frac, grid.dt, grid.steps);
  Workspace ws = prepare(nodes, op, q, lag[0], &h0, grid.steps + 1);

  SpaceTimeField out(nodes.size(), grid);
  auto& W = out.values();
  W.bottomRows(ws.ne) = h0;

  // Upper-triangular transpose of the forward history map: level n couples
  // to levels j > n with weights lag[j-n] - lag[j-n-1].
  const auto N = grid.steps;
  for (std::size_t n = N; n-- > 0;) {
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd rhs = -(ws.coupling * h0.col(nn));
    for (std::size_t j = n + 1; j <= N; ++j)
      rhs.noalias() -=
          (lag[j - n] - lag[j - n - 1]) *
          W.col(static_cast<Eigen::Index>(j)).head(ws.ni);
    W.col(nn).head(ws.ni) = ws.llt.solve(rhs);
  }
  return out;
}

WeakMPReport verify_weak_mp(const SpaceTimeField& field, double tol_factor) {
  WeakMPReport out;
  out.min_value = field.values().minCoeff();
  out.max_abs = field.values().cwiseAbs().maxCoeff();
  out.tol = tol_factor * out.max_abs;
  out.pass = out.min_value >= -out.tol;
  return out;
}

StrongMPReport verify_strong_mp(const SpaceTimeField& field,
                                const OperatorMatrix& op,
                                const std::vector<std::size_t>& support) {
  const std::size_t n = op.size();
  if (field.nodes() != n)
    throw std::invalid_argument("strong mp: field does not match the operator");

  std::vector<char> reached(n, 0);
  std::deque<std::size_t> frontier;
  for (std::size_t s : support) {
    if (s >= n) throw std::invalid_argument("strong mp: support index out of range");
    if (!reached[s]) {
      reached[s] = 1;
      frontier.push_back(s);
    }
  }
  // One horizon hop per time step.
  const std::size_t hops = field.grid().steps;
  for (std::size_t hop = 0; hop < hops && !frontier.empty(); ++hop) {
    std::deque<std::size_t> next;
    for (std::size_t i : frontier)
      for (std::size_t j = 0; j < n; ++j)
        if (!reached[j] && i != j &&
            op.stencil()(static_cast<Eigen::Index>(i),
                         static_cast<Eigen::Index>(j)) != 0.0) {
          reached[j] = 1;
          next.push_back(j);
        }
    frontier.swap(next);
  }

  StrongMPReport out;
  out.min_in_cone = std::numeric_limits<double>::infinity();
  const std::size_t last = field.levels() - 1;
  bool any = false;
  for (std::size_t i = 0; i < op.interior_count(); ++i) {
    if (!reached[i]) continue;
    ++out.cone_nodes;
    any = true;
    out.min_in_cone = std::min(out.min_in_cone, field(i, last));
  }
  if (!any) {
    out.min_in_cone = 0.0;
    out.pass = field.values().cwiseAbs().maxCoeff() == 0.0;
    return out;
  }
  out.pass = out.min_in_cone > 0.0;
  return out;
}

}  // namespace nld
