#pragma once

#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vexlab/grid.hpp"

namespace vexlab {

/// Cellwise exponent p(x) with 1 < lo <= p <= hi < inf.
class ExponentField {
 public:
  /// Bounds are the tight min/max of the values.
  ExponentField(Grid grid, std::vector<double> values);
  /// Declared bounds must enclose every value.
  ExponentField(Grid grid, std::vector<double> values, double declared_lo, double declared_hi);

  static ExponentField constant(const Grid& grid, double value);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t c) const { return values_[c]; }
  std::size_t size() const { return values_.size(); }
  double declared_lo() const { return lo_; }
  double declared_hi() const { return hi_; }

  /// Pointwise shift p - eps, revalidated.
  ExponentField shifted(double delta) const;
  /// Conjugate exponent p' = p / (p - 1).
  ExponentField conjugate() const;

 private:
  Grid grid_;
  std::vector<double> values_;
  double lo_;
  double hi_;
};

/// (min over cells, max over cells).
std::pair<double, double> bounds(const ExponentField& f);

inline constexpr double kInfiniteExponent = std::numeric_limits<double>::infinity();

/// n p / (n - p) per cell, or kInfiniteExponent where p >= n.
CellField sobolev_conjugate(const ExponentField& f, int dim);

/// max |(p(x) - p(y)) log|x - y|| over distinct cell-center pairs with
/// |x - y| < 1/2.
double log_hoelder_modulus(const ExponentField& f);

struct CriticalSetReport {
  std::vector<std::size_t> cells;
  std::vector<double> gap;  // p*(x) - q(x), +inf where p* is infinite
  double tolerance = 0.0;

  bool contains(std::size_t cell) const;
  bool empty() const { return cells.empty(); }
};

/// Cells where p* - q <= tol. Throws SupercriticalExponentError if some cell
/// has q > p* + tol.
CriticalSetReport critical_set(const ExponentField& p, const ExponentField& q, int dim, double tol);
CriticalSetReport critical_set(const ExponentField& p, const ExponentField& q, double tol);

// Field constructors as they appear in experiment configs:
//   constant(c)             c
//   affine(a, b)            a + b x_1
//   radial(c, s, x0...)     c + s |x - x0|
//   piecewise(d; box = v; ...) v on the first matching box, else d.
//     A box is "lo1 hi1" in 1D or "lo1 hi1 lo2 hi2" in 2D; membership is
//     lo <= x < hi per axis on the cell center.
struct ConstantSpec {
  double value;
};
struct AffineSpec {
  double a;
  double b;
};
struct RadialSpec {
  double c;
  double s;
  Point center;
};
struct PiecewiseBox {
  Point lo;
  Point hi;
  double value;
};
struct PiecewiseSpec {
  double fallback;
  std::vector<PiecewiseBox> boxes;
};

class FieldSpec {
 public:
  using Variant = std::variant<ConstantSpec, AffineSpec, RadialSpec, PiecewiseSpec>;

  FieldSpec(Variant v) : spec_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

  /// Parses the constructor syntax above; throws ParseError.
  static FieldSpec parse(const std::string& text);

  double evaluate(const Point& x, int dim) const;
  std::string to_string() const;
  const Variant& variant() const { return spec_; }

 private:
  Variant spec_;
};

ExponentField sample_exponent(const FieldSpec& spec, const Grid& grid);
CellField sample_cells(const FieldSpec& spec, const Grid& grid);

}  // namespace vexlab
