#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "vexlab/error.hpp"

namespace vexlab {

using Point = std::array<double, 2>;

/// Regular tensor grid on an interval (dim = 1) or a rectangle (dim = 2).
///
/// Functions live on nodes, exponents and quadrature on cells. Cells are
/// numbered x-fastest: cell (i, j) has index i + cells[0] * j. For dim = 1
/// the second axis is inert (one "cell", zero extent) and never read.
class Grid {
 public:
  Grid(int dim, std::array<double, 2> lo, std::array<double, 2> hi, std::array<int, 2> cells);

  static Grid interval(double lo, double hi, int cells);
  static Grid rectangle(Point lo, Point hi, int nx, int ny);

  int dim() const { return dim_; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  int cells(int axis) const { return cells_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double max_spacing() const;

  std::size_t cell_count() const;
  std::size_t interior_node_count() const;
  double cell_volume() const;
  double domain_volume() const;
  double diameter() const;

  /// Multi-index of a cell, {i, 0} in 1D.
  std::array<int, 2> cell_index(std::size_t cell) const;
  std::size_t cell_at(int i, int j = 0) const;
  Point cell_center(std::size_t cell) const;

  /// Interior node (i, j) with 1 <= i <= cells-1 maps to storage index.
  std::size_t node_storage(int i, int j = 0) const;
  std::array<int, 2> node_index(std::size_t storage) const;
  Point node_point(int i, int j = 0) const;
  bool is_interior_node(int i, int j = 0) const;

  double distance(const Point& a, const Point& b) const;
  double distance_to_boundary(const Point& x) const;
  bool contains(const Point& x) const;

  bool operator==(const Grid&) const = default;

 private:
  int dim_;
  std::array<double, 2> lo_;
  std::array<double, 2> hi_;
  std::array<int, 2> cells_;
  std::array<double, 2> spacing_;
};

void require_same_grid(const Grid& a, const Grid& b);

/// Real value per cell. Quadrature data (|u|, |grad u|, exponents) lives here.
class CellField {
 public:
  CellField(Grid grid, std::vector<double> values);
  explicit CellField(Grid grid, double fill = 0.0);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t c) const { return values_[c]; }
  double& operator[](std::size_t c) { return values_[c]; }
  std::size_t size() const { return values_.size(); }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Node-based function with zero boundary trace. Only interior nodes are
/// stored; boundary nodes read as 0.
class GridFunction {
 public:
  explicit GridFunction(Grid grid);
  GridFunction(Grid grid, std::vector<double> interior_values);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }

  /// Value at node (i, j) of the full node lattice; 0 on the boundary.
  double at(int i, int j = 0) const;

  bool is_zero() const;
  double max_abs() const;

  GridFunction& operator*=(double s);
  GridFunction& operator+=(const GridFunction& other);

 private:
  Grid grid_;
  std::vector<double> values_;
};

GridFunction operator*(double s, GridFunction u);
GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);

template <class F>
GridFunction interpolate(const Grid& grid, F&& f) {
  GridFunction u(grid);
  auto v = u.values();
  for (std::size_t n = 0; n < v.size(); ++n) {
    const auto [i, j] = grid.node_index(n);
    v[n] = f(grid.node_point(i, j));
  }
  return u;
}

/// Midpoint values: average of the cell's corner nodes.
CellField cell_values(const GridFunction& u);

struct CellGradient {
  Grid grid;
  std::vector<Point> components;  // (d/dx, d/dy) per cell; d/dy = 0 in 1D
};

/// Per-cell finite-difference gradient. In 2D each component is the average
/// of the two parallel edge differences of the cell.
CellGradient gradient(const GridFunction& u);

/// Per-cell gradient magnitude used by every energy and norm. Equals |gradient|
/// in 1D; in 2D it is the root mean square of the two edge differences per
/// axis, which agrees with |gradient| on linear data and does not vanish on
/// the checkerboard mode.
CellField gradient_magnitude(const GridFunction& u);

/// Nonnegative weights on cells.
class DiscreteMeasure {
 public:
  DiscreteMeasure(Grid grid, std::vector<double> masses);

  const Grid& grid() const { return grid_; }
  std::span<const double> masses() const { return masses_; }
  double total_mass() const;

 private:
  Grid grid_;
  std::vector<double> masses_;
};

class ExponentField;

/// cell_masses = |grad u|^p(cell) * cell_volume.
DiscreteMeasure energy_measure(const GridFunction& u, const ExponentField& p);

/// Mass of the cells whose centers lie within `radius` of `center`.
double mass_in_ball(const DiscreteMeasure& m, const Point& center, double radius);

/// Boolean cell mask. A node is active when it is interior and all of its
/// adjacent cells are masked; functions "on the mask" vanish elsewhere.
class CellMask {
 public:
  CellMask(Grid grid, std::vector<char> inside);
  static CellMask full(const Grid& grid);

  const Grid& grid() const { return grid_; }
  bool operator[](std::size_t c) const { return inside_[c] != 0; }
  std::size_t count() const;
  bool is_full() const;

  bool node_active(int i, int j = 0) const;
  /// Storage indices of active interior nodes, ascending.
  std::vector<std::size_t> active_nodes() const;

  bool operator==(const CellMask&) const = default;

 private:
  Grid grid_;
  std::vector<char> inside_;
};

/// Cells of B_radius(center) ∩ Ω by cell-center membership.
CellMask restrict_to_ball(const Grid& grid, const Point& center, double radius);

/// Zeroes every node that is not active in the mask.
GridFunction restrict_to_mask(GridFunction u, const CellMask& mask);

}  // namespace vexlab
