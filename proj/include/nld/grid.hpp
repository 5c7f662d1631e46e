/// @file grid.hpp
/// Uniform lattice over a box domain plus its interaction collar.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nld {

enum class NodeLabel : std::uint8_t { Interior, Interaction, Accessible };

const char* to_string(NodeLabel label);

/// Selects the part of the collar where flux data may be collected.
struct AccessibleSelector {
  enum class Kind { None, FullCollar, Side };

  Kind kind = Kind::Side;
  int axis = 0;   ///< normal axis of the selected side
  int sign = +1;  ///< +1 high side, -1 low side

  static AccessibleSelector none() { return {Kind::None, 0, +1}; }
  static AccessibleSelector full_collar() { return {Kind::FullCollar, 0, +1}; }
  static AccessibleSelector side(int axis, int sign) {
    return {Kind::Side, axis, sign};
  }

  bool operator==(const AccessibleSelector&) const = default;
};

/// Axis-aligned box domain with grid step h and interaction horizon.
/// The horizon and the box extents must be integer multiples of h so that
/// node classification reduces to exact integer lattice arithmetic.
struct DomainSpec {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  double h = 1.0 / 64.0;
  double horizon = 1.0 / 8.0;
  AccessibleSelector accessible = AccessibleSelector::side(0, +1);

  /// Cells per axis; exact integer or std::invalid_argument.
  std::array<int, 2> cells() const;
  /// Horizon in units of h; exact integer >= 1 or std::invalid_argument.
  int horizon_cells() const;
  double diameter() const;

  void validate() const;

  bool operator==(const DomainSpec&) const = default;
};

/// Immutable node container.  Interior nodes occupy indices [0, interior_count()),
/// collar nodes the tail; both groups are in lexicographic lattice order.
class NodeSet {
 public:
  int dim() const { return spec_.dim; }
  std::size_t size() const { return labels_.size(); }
  std::size_t interior_count() const { return n_interior_; }
  std::size_t exterior_count() const { return size() - n_interior_; }
  std::size_t accessible_count() const { return accessible_.size(); }

  double h() const { return spec_.h; }
  double horizon() const { return spec_.horizon; }
  /// Nodal quadrature weight h^dim, identical for every node.
  double weight() const { return weight_; }

  NodeLabel label(std::size_t i) const { return labels_[i]; }
  bool is_exterior(std::size_t i) const { return i >= n_interior_; }
  double coord(std::size_t i, int axis) const { return coords_[i][axis]; }
  const std::array<double, 2>& coord(std::size_t i) const { return coords_[i]; }
  /// Lattice index of a node (coordinate = lo + index * h).
  const std::array<int, 2>& lattice(std::size_t i) const { return lattice_[i]; }

  /// Indices of accessible collar nodes, ascending.
  const std::vector<std::size_t>& accessible() const { return accessible_; }

  const DomainSpec& spec() const { return spec_; }

  double distance(std::size_t i, std::size_t j) const;

  void write_csv(std::ostream& os) const;
  void write_csv(const std::string& path) const;

 private:
  friend NodeSet build_nodes(const DomainSpec&);
  NodeSet() = default;

  DomainSpec spec_;
  double weight_ = 0.0;
  std::size_t n_interior_ = 0;
  std::vector<std::array<double, 2>> coords_;
  std::vector<std::array<int, 2>> lattice_;
  std::vector<NodeLabel> labels_;
  std::vector<std::size_t> accessible_;
};

/// Enumerates interior nodes (strictly inside the box) and collar nodes
/// (strictly outside the closed box, within distance horizon of the domain).
/// Nodes lying exactly on the boundary of the box are not part of the set.
NodeSet build_nodes(const DomainSpec& spec);

}  // namespace nld
