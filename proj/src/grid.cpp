#include "vexlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vexlab/exponent.hpp"

namespace vexlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameters: return "InvalidParameters";
    case ErrorKind::InvalidExponent: return "InvalidExponent";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::ZeroFunction: return "ZeroFunction";
    case ErrorKind::InfeasibleProblem: return "InfeasibleProblem";
    case ErrorKind::SupercriticalExponent: return "SupercriticalExponent";
    case ErrorKind::BallTooSmall: return "BallTooSmall";
    case ErrorKind::BubbleTouchesBoundary: return "BubbleTouchesBoundary";
    case ErrorKind::TargetMassInfeasible: return "TargetMassInfeasible";
    case ErrorKind::OverlappingSupports: return "OverlappingSupports";
    case ErrorKind::MassBudgetExceeded: return "MassBudgetExceeded";
    case ErrorKind::MissingLocalizedConstant: return "MissingLocalizedConstant";
    case ErrorKind::TooFewRecords: return "TooFewRecords";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Grid::Grid(int dim, std::array<double, 2> lo, std::array<double, 2> hi, std::array<int, 2> cells)
    : dim_(dim), lo_(lo), hi_(hi), cells_(cells), spacing_{1.0, 1.0} {
  if (dim != 1 && dim != 2) throw Error(ErrorKind::InvalidParameters, "grid dimension must be 1 or 2");
  if (dim == 1) {
    lo_[1] = 0.0;
    hi_[1] = 1.0;
    cells_[1] = 1;
  }
  for (int a = 0; a < dim; ++a) {
    if (cells_[a] < 2)
      throw Error(ErrorKind::InvalidParameters, "need at least 2 cells per axis");
    if (!(hi_[a] > lo_[a]) || !std::isfinite(lo_[a]) || !std::isfinite(hi_[a]))
      throw Error(ErrorKind::InvalidParameters, "grid extents must satisfy lo < hi");
    spacing_[a] = (hi_[a] - lo_[a]) / cells_[a];
  }
}

Grid Grid::interval(double lo, double hi, int cells) { return Grid(1, {lo, 0.0}, {hi, 1.0}, {cells, 1}); }

Grid Grid::rectangle(Point lo, Point hi, int nx, int ny) { return Grid(2, lo, hi, {nx, ny}); }

double Grid::max_spacing() const { return dim_ == 1 ? spacing_[0] : std::max(spacing_[0], spacing_[1]); }

std::size_t Grid::cell_count() const {
  return static_cast<std::size_t>(cells_[0]) * static_cast<std::size_t>(cells_[1]);
}

std::size_t Grid::interior_node_count() const {
  if (dim_ == 1) return static_cast<std::size_t>(cells_[0] - 1);
  return static_cast<std::size_t>(cells_[0] - 1) * static_cast<std::size_t>(cells_[1] - 1);
}

double Grid::cell_volume() const { return dim_ == 1 ? spacing_[0] : spacing_[0] * spacing_[1]; }

double Grid::domain_volume() const { return cell_volume() * static_cast<double>(cell_count()); }

double Grid::diameter() const {
  if (dim_ == 1) return hi_[0] - lo_[0];
  return std::hypot(hi_[0] - lo_[0], hi_[1] - lo_[1]);
}

std::array<int, 2> Grid::cell_index(std::size_t cell) const {
  return {static_cast<int>(cell % cells_[0]), static_cast<int>(cell / cells_[0])};
}

std::size_t Grid::cell_at(int i, int j) const {
  return static_cast<std::size_t>(i) + static_cast<std::size_t>(cells_[0]) * static_cast<std::size_t>(j);
}

Point Grid::cell_center(std::size_t cell) const {
  const auto [i, j] = cell_index(cell);
  if (dim_ == 1) return {lo_[0] + (i + 0.5) * spacing_[0], 0.0};
  return {lo_[0] + (i + 0.5) * spacing_[0], lo_[1] + (j + 0.5) * spacing_[1]};
}

std::size_t Grid::node_storage(int i, int j) const {
  if (dim_ == 1) return static_cast<std::size_t>(i - 1);
  return static_cast<std::size_t>(i - 1) +
         static_cast<std::size_t>(cells_[0] - 1) * static_cast<std::size_t>(j - 1);
}

std::array<int, 2> Grid::node_index(std::size_t storage) const {
  if (dim_ == 1) return {static_cast<int>(storage) + 1, 0};
  const auto stride = static_cast<std::size_t>(cells_[0] - 1);
  return {static_cast<int>(storage % stride) + 1, static_cast<int>(storage / stride) + 1};
}

Point Grid::node_point(int i, int j) const {
  if (dim_ == 1) return {lo_[0] + i * spacing_[0], 0.0};
  return {lo_[0] + i * spacing_[0], lo_[1] + j * spacing_[1]};
}

bool Grid::is_interior_node(int i, int j) const {
  if (i <= 0 || i >= cells_[0]) return false;
  if (dim_ == 1) return true;
  return j > 0 && j < cells_[1];
}

double Grid::distance(const Point& a, const Point& b) const {
  if (dim_ == 1) return std::abs(a[0] - b[0]);
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double Grid::distance_to_boundary(const Point& x) const {
  double d = std::min(x[0] - lo_[0], hi_[0] - x[0]);
  if (dim_ == 2) d = std::min({d, x[1] - lo_[1], hi_[1] - x[1]});
  return d;
}

bool Grid::contains(const Point& x) const { return distance_to_boundary(x) >= 0.0; }

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw Error(ErrorKind::GridMismatch, "operands live on different grids");
}

CellField::CellField(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.cell_count())
    throw Error(ErrorKind::GridMismatch, "cell field needs one value per cell");
}

CellField::CellField(Grid grid, double fill) : grid_(grid), values_(grid.cell_count(), fill) {}

GridFunction::GridFunction(Grid grid) : grid_(grid), values_(grid.interior_node_count(), 0.0) {}

GridFunction::GridFunction(Grid grid, std::vector<double> interior_values)
    : grid_(grid), values_(std::move(interior_values)) {
  if (values_.size() != grid_.interior_node_count())
    throw Error(ErrorKind::GridMismatch, "grid function needs one value per interior node");
}

double GridFunction::at(int i, int j) const {
  if (!grid_.is_interior_node(i, j)) return 0.0;
  return values_[grid_.node_storage(i, j)];
}

bool GridFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += other.values_[n];
  return *this;
}

GridFunction operator*(double s, GridFunction u) {
  u *= s;
  return u;
}

GridFunction operator+(GridFunction a, const GridFunction& b) {
  a += b;
  return a;
}

GridFunction operator-(GridFunction a, const GridFunction& b) {
  a += (-1.0) * b;
  return a;
}

CellField cell_values(const GridFunction& u) {
  const Grid& g = u.grid();
  CellField out(g);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto [i, j] = g.cell_index(c);
    if (g.dim() == 1)
      out[c] = 0.5 * (u.at(i) + u.at(i + 1));
    else
      out[c] = 0.25 * (u.at(i, j) + u.at(i + 1, j) + u.at(i, j + 1) + u.at(i + 1, j + 1));
  }
  return out;
}

CellGradient gradient(const GridFunction& u) {
  const Grid& g = u.grid();
  CellGradient out{g, std::vector<Point>(g.cell_count(), Point{0.0, 0.0})};
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto [i, j] = g.cell_index(c);
    if (g.dim() == 1) {
      out.components[c] = {(u.at(i + 1) - u.at(i)) / g.spacing(0), 0.0};
    } else {
      const double dx = 0.5 * ((u.at(i + 1, j) - u.at(i, j)) + (u.at(i + 1, j + 1) - u.at(i, j + 1)));
      const double dy = 0.5 * ((u.at(i, j + 1) - u.at(i, j)) + (u.at(i + 1, j + 1) - u.at(i + 1, j)));
      out.components[c] = {dx / g.spacing(0), dy / g.spacing(1)};
    }
  }
  return out;
}

CellField gradient_magnitude(const GridFunction& u) {
  const Grid& g = u.grid();
  CellField out(g);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto [i, j] = g.cell_index(c);
    if (g.dim() == 1) {
      out[c] = std::abs(u.at(i + 1) - u.at(i)) / g.spacing(0);
    } else {
      const double hx = g.spacing(0);
      const double hy = g.spacing(1);
      const double xb = (u.at(i + 1, j) - u.at(i, j)) / hx;
      const double xt = (u.at(i + 1, j + 1) - u.at(i, j + 1)) / hx;
      const double yl = (u.at(i, j + 1) - u.at(i, j)) / hy;
      const double yr = (u.at(i + 1, j + 1) - u.at(i + 1, j)) / hy;
      out[c] = std::sqrt(0.5 * (xb * xb + xt * xt + yl * yl + yr * yr));
    }
  }
  return out;
}

DiscreteMeasure::DiscreteMeasure(Grid grid, std::vector<double> masses)
    : grid_(grid), masses_(std::move(masses)) {
  if (masses_.size() != grid_.cell_count())
    throw Error(ErrorKind::GridMismatch, "measure needs one mass per cell");
  for (double m : masses_)
    if (!(m >= 0.0)) throw Error(ErrorKind::InvalidParameters, "measure masses must be nonnegative");
}

double DiscreteMeasure::total_mass() const { return std::accumulate(masses_.begin(), masses_.end(), 0.0); }

DiscreteMeasure energy_measure(const GridFunction& u, const ExponentField& p) {
  require_same_grid(u.grid(), p.grid());
  const Grid& g = u.grid();
  const CellField grad = gradient_magnitude(u);
  std::vector<double> masses(g.cell_count(), 0.0);
  const double vol = g.cell_volume();
  for (std::size_t c = 0; c < masses.size(); ++c)
    if (grad[c] > 0.0) masses[c] = std::pow(grad[c], p[c]) * vol;
  return DiscreteMeasure(g, std::move(masses));
}

double mass_in_ball(const DiscreteMeasure& m, const Point& center, double radius) {
  const Grid& g = m.grid();
  double total = 0.0;
  const auto masses = m.masses();
  for (std::size_t c = 0; c < masses.size(); ++c)
    if (g.distance(g.cell_center(c), center) <= radius) total += masses[c];
  return total;
}

CellMask::CellMask(Grid grid, std::vector<char> inside) : grid_(grid), inside_(std::move(inside)) {
  if (inside_.size() != grid_.cell_count())
    throw Error(ErrorKind::GridMismatch, "mask needs one flag per cell");
}

CellMask CellMask::full(const Grid& grid) { return CellMask(grid, std::vector<char>(grid.cell_count(), 1)); }

std::size_t CellMask::count() const {
  return static_cast<std::size_t>(std::count(inside_.begin(), inside_.end(), char{1}));
}

bool CellMask::is_full() const { return count() == inside_.size(); }

bool CellMask::node_active(int i, int j) const {
  if (!grid_.is_interior_node(i, j)) return false;
  if (grid_.dim() == 1) return inside_[grid_.cell_at(i - 1)] && inside_[grid_.cell_at(i)];
  return inside_[grid_.cell_at(i - 1, j - 1)] && inside_[grid_.cell_at(i, j - 1)] &&
         inside_[grid_.cell_at(i - 1, j)] && inside_[grid_.cell_at(i, j)];
}

std::vector<std::size_t> CellMask::active_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < grid_.interior_node_count(); ++n) {
    const auto [i, j] = grid_.node_index(n);
    if (node_active(i, j)) out.push_back(n);
  }
  return out;
}

CellMask restrict_to_ball(const Grid& grid, const Point& center, double radius) {
  if (!(radius >= 2.0 * grid.max_spacing()))
    throw Error(ErrorKind::BallTooSmall,
                "radius " + std::to_string(radius) + " is below two grid spacings");
  std::vector<char> inside(grid.cell_count(), 0);
  for (std::size_t c = 0; c < inside.size(); ++c)
    inside[c] = grid.distance(grid.cell_center(c), center) <= radius ? 1 : 0;
  return CellMask(grid, std::move(inside));
}

GridFunction restrict_to_mask(GridFunction u, const CellMask& mask) {
  require_same_grid(u.grid(), mask.grid());
  const Grid& g = u.grid();
  auto v = u.values();
  for (std::size_t n = 0; n < v.size(); ++n) {
    const auto [i, j] = g.node_index(n);
    if (!mask.node_active(i, j)) v[n] = 0.0;
  }
  return u;
}

}  // namespace vexlab
