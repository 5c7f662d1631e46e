#include "nld/inversion.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "nld/io.hpp"

namespace nld {

namespace {
constexpr double kGramConditionLimit = 1e12;
constexpr double kMaskDelta = 1e-10;
}  // namespace

const char* to_string(BasisSpec::Family f) {
  return f == BasisSpec::Family::Nodal ? "nodal" : "sine";
}

void BasisSpec::validate(const NodeSet& nodes) const {
  const std::size_t ni = nodes.interior_count();
  if (family == Family::Nodal) {
    if (modes != 0 && modes != ni)
      throw std::invalid_argument(
          "basis: nodal family uses one mode per interior node");
    return;
  }
  if (nodes.dim() != 1)
    throw std::invalid_argument("basis: sine family is one-dimensional");
  if (modes == 0) throw std::invalid_argument("basis: sine family needs modes >= 1");
  if (modes > ni)
    throw std::invalid_argument(
        "basis: more sine modes than interior nodes; refine the grid");
}

std::size_t BasisSpec::count(const NodeSet& nodes) const {
  validate(nodes);
  return family == Family::Nodal ? nodes.interior_count() : modes;
}

Eigen::MatrixXd BasisSpec::build(const NodeSet& nodes) const {
  validate(nodes);
  const auto ni = static_cast<Eigen::Index>(nodes.interior_count());
  if (family == Family::Nodal) return Eigen::MatrixXd::Identity(ni, ni);

  const double length = nodes.spec().hi[0] - nodes.spec().lo[0];
  const double lo = nodes.spec().lo[0];
  const double scale = std::sqrt(2.0 / length);
  Eigen::MatrixXd basis(ni, static_cast<Eigen::Index>(modes));
  for (Eigen::Index i = 0; i < ni; ++i) {
    const double x = nodes.coord(static_cast<std::size_t>(i), 0);
    for (Eigen::Index k = 0; k < basis.cols(); ++k)
      basis(i, k) = scale * std::sin(static_cast<double>(k + 1) * M_PI *
                                     (x - lo) / length);
  }
  return basis;
}

Eigen::MatrixXd gram_matrix(const NodeSet& nodes,
                            const Eigen::MatrixXd& basis) {
  if (basis.rows() != static_cast<Eigen::Index>(nodes.interior_count()))
    throw std::invalid_argument("gram: basis rows must match interior nodes");
  return nodes.weight() * (basis.transpose() * basis);
}

MomentFields recover_moments(const NodeSet& nodes, const BasisSpec& basis,
                             const MeasurementSet& data) {
  const std::size_t J = basis.count(nodes);
  if (data.data.rows() != static_cast<Eigen::Index>(J) || data.data.cols() != 2)
    throw std::invalid_argument(
        "recover_moments: dataset shape does not match the basis");

  const Eigen::MatrixXd B = basis.build(nodes);
  Eigen::MatrixXd G = gram_matrix(nodes, B);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G,
                                                     Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();

  MomentFields out;
  out.gram_condition = cond;
  if (cond > kGramConditionLimit) {
    if (!basis.ridge)
      throw std::runtime_error(
          "recover_moments: Gram condition estimate " + std::to_string(cond) +
          " exceeds 1e12; enable the ridge term or reduce the mode count");
    out.ridge = 1e-12 * G.trace() / static_cast<double>(J);
    G.diagonal().array() += out.ridge;
  }

  const Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("recover_moments: Gram matrix is not SPD");
  out.v1 = B * llt.solve(data.data.col(0));
  out.v2 = B * llt.solve(data.data.col(1));
  return out;
}

Eigen::VectorXd extend_moment_exterior(const NodeSet& nodes,
                                       const SensorSpec& sensor,
                                       const std::vector<double>& series,
                                       const TimeGrid& grid) {
  const Eigen::MatrixXd h0 = sensor.exterior_matrix(nodes);
  if (series.size() != grid.steps + 1 ||
      h0.cols() != static_cast<Eigen::Index>(series.size()))
    throw std::invalid_argument("extend_moment: series length mismatch");
  Eigen::VectorXd c(h0.cols());
  c[0] = 0.0;  // right-rule quadrature, matching the discrete moments
  for (Eigen::Index n = 1; n < c.size(); ++n)
    c[n] = grid.dt * series[static_cast<std::size_t>(n)];
  return h0 * c;
}

double identity_residual(const NodeSet& nodes, const OperatorMatrix& op,
                         const Eigen::VectorXd& v1_full,
                         const Eigen::VectorXd& v2,
                         const Eigen::VectorXd& q) {
  const auto ni = static_cast<Eigen::Index>(nodes.interior_count());
  if (v1_full.size() != static_cast<Eigen::Index>(nodes.size()) ||
      v2.size() != ni || q.size() != ni)
    throw std::invalid_argument("identity_residual: size mismatch");
  const Eigen::VectorXd neg_l = op.apply_neg_L(v1_full);
  const Eigen::VectorXd reaction = q.cwiseProduct(v1_full.head(ni));
  const double scale = v2.cwiseAbs().maxCoeff() +
                       neg_l.cwiseAbs().maxCoeff() +
                       reaction.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (v2 + neg_l + reaction).cwiseAbs().maxCoeff() / scale;
}

double ReconstructionResult::masked_fraction() const {
  if (masked.empty()) return 0.0;
  return static_cast<double>(masked_nodes.size()) /
         static_cast<double>(masked.size());
}

void ReconstructionResult::write_csv(const NodeSet& nodes,
                                     const std::string& path,
                                     const Eigen::VectorXd* q_true) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << (nodes.dim() == 1 ? "x" : "x,y") << ",q_true,q_hat,masked\n";
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const auto node = static_cast<std::size_t>(i);
    os << format_double(nodes.coord(node, 0));
    if (nodes.dim() == 2) os << ',' << format_double(nodes.coord(node, 1));
    os << ',';
    if (q_true) os << format_double((*q_true)[i]);
    os << ',' << format_double(q[i]) << ','
       << (masked[node] ? '1' : '0') << '\n';
  }
}

std::string ReconstructionResult::diagnostics_json() const {
  nlohmann::json j;
  j["model"] = to_string(model);
  j["modes"] = modes;
  j["min_v1"] = min_v1;
  j["gram_condition"] = gram_condition;
  j["ridge"] = ridge;
  j["mask_threshold"] = mask_threshold;
  j["masked_count"] = masked_nodes.size();
  j["masked_fraction"] = masked_fraction();
  j["masked_nodes"] = masked_nodes;
  j["identity_residual"] = residual;
  return j.dump(2);
}

namespace {

ReconstructionResult reconstruct_core(const NodeSet& nodes,
                                      const OperatorMatrix& op, Model model,
                                      const BasisSpec& basis,
                                      const MeasurementSet& data,
                                      const SensorSpec& sensor,
                                      const std::vector<double>& v,
                                      const TimeGrid& grid) {
  if (data.model != model)
    throw std::invalid_argument(
        std::string("reconstruct: dataset was synthesized for the ") +
        to_string(data.model) + " model");

  const MomentFields fields = recover_moments(nodes, basis, data);

  ReconstructionResult out;
  out.model = model;
  out.modes = basis.count(nodes);
  out.v1 = fields.v1;
  out.v2 = fields.v2;
  out.gram_condition = fields.gram_condition;
  out.ridge = fields.ridge;
  out.v1_exterior = extend_moment_exterior(nodes, sensor, v, grid);

  const auto ni = static_cast<Eigen::Index>(nodes.interior_count());
  Eigen::VectorXd v1_full(static_cast<Eigen::Index>(nodes.size()));
  v1_full.head(ni) = out.v1;
  v1_full.tail(out.v1_exterior.size()) = out.v1_exterior;
  const Eigen::VectorXd neg_l = op.apply_neg_L(v1_full);

  out.min_v1 = out.v1.minCoeff();
  out.mask_threshold = kMaskDelta * out.v1.cwiseAbs().maxCoeff();
  out.q.setConstant(ni, std::numeric_limits<double>::quiet_NaN());
  out.masked.assign(static_cast<std::size_t>(ni), 1);
  for (Eigen::Index i = 0; i < ni; ++i) {
    if (std::abs(out.v1[i]) < out.mask_threshold ||
        out.mask_threshold == 0.0) {
      out.masked_nodes.push_back(static_cast<std::size_t>(i));
      continue;
    }
    out.masked[static_cast<std::size_t>(i)] = 0;
    out.q[i] = -(out.v2[i] + neg_l[i]) / out.v1[i];
  }
  if (out.masked_nodes.size() == static_cast<std::size_t>(ni))
    throw std::runtime_error(
        "reconstruct: sensor does not illuminate domain (moment field "
        "vanishes on every interior node)");

  Eigen::VectorXd q_filled = out.q;
  for (std::size_t i : out.masked_nodes)
    q_filled[static_cast<Eigen::Index>(i)] = 0.0;
  out.residual = identity_residual(nodes, op, v1_full, out.v2, q_filled);
  return out;
}

}  // namespace

ReconstructionResult reconstruct_q(const NodeSet& nodes,
                                   const OperatorMatrix& op,
                                   const BasisSpec& basis,
                                   const MeasurementSet& data,
                                   const SensorSpec& sensor,
                                   const std::vector<double>& v,
                                   const TimeGrid& grid) {
  return reconstruct_core(nodes, op, Model::Classical, basis, data, sensor, v,
                          grid);
}

ReconstructionResult reconstruct_q_fractional(const NodeSet& nodes,
                                              const OperatorMatrix& op,
                                              const FractionalSpec& frac,
                                              const BasisSpec& basis,
                                              const MeasurementSet& data,
                                              const SensorSpec& sensor,
                                              const std::vector<double>& v,
                                              const TimeGrid& grid) {
  frac.validate();  // V2 comes from the data; the orders only shaped it
  return reconstruct_core(nodes, op, Model::Fractional, basis, data, sensor, v,
                          grid);
}

UniquenessReport uniqueness_probe(const NodeSet& nodes,
                                  const OperatorMatrix& op, Model model,
                                  const FractionalSpec& frac,
                                  const CoefficientField& q_a,
                                  const CoefficientField& q_b,
                                  const BasisSpec& basis,
                                  const SensorSpec& sensor,
                                  const std::vector<double>& v,
                                  const TimeGrid& grid, int threads) {
  const Eigen::MatrixXd B = basis.build(nodes);
  std::vector<Eigen::VectorXd> sources;
  sources.reserve(static_cast<std::size_t>(B.cols()));
  for (Eigen::Index k = 0; k < B.cols(); ++k) sources.push_back(B.col(k));

  const auto v2 = derived_series(model, frac, grid.dt, v);
  const MeasurementSet da = synthesize_dataset(nodes, op, model, frac, q_a,
                                               sources, v, v2, sensor, grid,
                                               0.0, 0, threads);
  const MeasurementSet db = synthesize_dataset(nodes, op, model, frac, q_b,
                                               sources, v, v2, sensor, grid,
                                               0.0, 0, threads);

  UniquenessReport rep;
  rep.coefficient_distance = (q_a.q - q_b.q).cwiseAbs().maxCoeff();
  rep.data_distance = (da.data - db.data).cwiseAbs().maxCoeff();
  rep.data_scale = std::max(da.data.cwiseAbs().maxCoeff(),
                            db.data.cwiseAbs().maxCoeff());
  return rep;
}

}  // namespace nld
