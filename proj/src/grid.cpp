#include "nld/grid.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "nld/io.hpp"

namespace nld {

const char* to_string(NodeLabel label) {
  switch (label) {
    case NodeLabel::Interior: return "INTERIOR";
    case NodeLabel::Interaction: return "INTERACTION";
    case NodeLabel::Accessible: return "ACCESSIBLE";
  }
  return "?";
}

namespace {

// Nearest integer if within a relative tolerance, else -1.
int exact_multiple(double value, double unit) {
  const double ratio = value / unit;
  const double rounded = std::round(ratio);
  if (rounded < 0.5 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio)))
    return -1;
  return static_cast<int>(rounded);
}

}  // namespace

std::array<int, 2> DomainSpec::cells() const {
  std::array<int, 2> m{1, 1};
  for (int a = 0; a < dim; ++a) {
    const int k = exact_multiple(hi[a] - lo[a], h);
    if (k < 2)
      throw std::invalid_argument(
          "domain: extent of axis " + std::to_string(a) +
          " must be an integer multiple of h with at least 2 cells");
    m[a] = k;
  }
  return m;
}

int DomainSpec::horizon_cells() const {
  const int m = exact_multiple(horizon, h);
  if (m < 1)
    throw std::invalid_argument("domain: horizon must be a positive integer multiple of h");
  return m;
}

double DomainSpec::diameter() const {
  if (dim == 1) return hi[0] - lo[0];
  return std::hypot(hi[0] - lo[0], hi[1] - lo[1]);
}

void DomainSpec::validate() const {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("domain: dim must be 1 or 2");
  if (!(h > 0.0))
    throw std::invalid_argument("domain: h must be positive");
  for (int a = 0; a < dim; ++a)
    if (!(hi[a] > lo[a]))
      throw std::invalid_argument("domain: hi must exceed lo on axis " + std::to_string(a));
  cells();
  horizon_cells();
  if (!(horizon < diameter()))
    throw std::invalid_argument("domain: horizon must be smaller than the domain diameter");
  if (accessible.kind == AccessibleSelector::Kind::Side) {
    if (accessible.axis < 0 || accessible.axis >= dim)
      throw std::invalid_argument("domain: accessible side axis out of range");
    if (accessible.sign != +1 && accessible.sign != -1)
      throw std::invalid_argument("domain: accessible side sign must be +1 or -1");
  }
}

double NodeSet::distance(std::size_t i, std::size_t j) const {
  double s = 0.0;
  for (int a = 0; a < dim(); ++a) {
    const double d = coords_[i][a] - coords_[j][a];
    s += d * d;
  }
  return std::sqrt(s);
}

void NodeSet::write_csv(std::ostream& os) const {
  os << (dim() == 1 ? "x" : "x,y") << ",label,weight\n";
  for (std::size_t i = 0; i < size(); ++i) {
    os << format_double(coords_[i][0]);
    if (dim() == 2) os << ',' << format_double(coords_[i][1]);
    os << ',' << to_string(labels_[i]) << ',' << format_double(weight_) << '\n';
  }
}

void NodeSet::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_csv(os);
}

NodeSet build_nodes(const DomainSpec& spec) {
  spec.validate();
  const auto cells = spec.cells();
  const int m = spec.horizon_cells();
  const int d = spec.dim;

  NodeSet set;
  set.spec_ = spec;
  set.weight_ = (d == 1) ? spec.h : spec.h * spec.h;

  // Excess of a lattice index past [0, M], in cells.
  const auto excess = [](int i, int M) { return i < 0 ? -i : (i > M ? i - M : 0); };

  std::vector<std::array<int, 2>> interior, collar;
  std::vector<bool> collar_accessible;

  const int jlo = (d == 2) ? -m : 0;
  const int jhi = (d == 2) ? cells[1] + m : 0;
  for (int i = -m; i <= cells[0] + m; ++i) {
    for (int j = jlo; j <= jhi; ++j) {
      const int ex = excess(i, cells[0]);
      const int ey = (d == 2) ? excess(j, cells[1]) : 0;
      const bool inside = i > 0 && i < cells[0] && (d == 1 || (j > 0 && j < cells[1]));
      if (inside) {
        interior.push_back({i, j});
        continue;
      }
      if (ex == 0 && ey == 0) continue;  // on the closed boundary of the box
      if (ex * ex + ey * ey > m * m) continue;

      bool acc = false;
      switch (spec.accessible.kind) {
        case AccessibleSelector::Kind::None:
          break;
        case AccessibleSelector::Kind::FullCollar:
          acc = true;
          break;
        case AccessibleSelector::Kind::Side: {
          const int idx = spec.accessible.axis == 0 ? i : j;
          const int M = cells[spec.accessible.axis];
          const int off = spec.accessible.axis == 0 ? ey : ex;
          acc = off == 0 && (spec.accessible.sign > 0 ? idx > M : idx < 0);
          break;
        }
      }
      collar.push_back({i, j});
      collar_accessible.push_back(acc);
    }
  }

  set.n_interior_ = interior.size();
  const std::size_t total = interior.size() + collar.size();
  set.coords_.reserve(total);
  set.lattice_.reserve(total);
  set.labels_.reserve(total);

  const auto push = [&](const std::array<int, 2>& lat, NodeLabel label) {
    set.lattice_.push_back(lat);
    set.coords_.push_back({spec.lo[0] + lat[0] * spec.h,
                           d == 2 ? spec.lo[1] + lat[1] * spec.h : 0.0});
    set.labels_.push_back(label);
  };

  for (const auto& lat : interior) push(lat, NodeLabel::Interior);
  for (std::size_t k = 0; k < collar.size(); ++k) {
    if (collar_accessible[k]) {
      set.accessible_.push_back(set.labels_.size());
      push(collar[k], NodeLabel::Accessible);
    } else {
      push(collar[k], NodeLabel::Interaction);
    }
  }
  return set;
}

}  // namespace nld
