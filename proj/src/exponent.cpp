#include "vexlab/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "vexlab/format.hpp"

namespace vexlab {

namespace {

void validate_values(std::span<const double> values, double lo, double hi) {
  if (!(lo > 1.0) || !std::isfinite(hi) || !(hi >= lo))
    throw Error(ErrorKind::InvalidExponent, "bounds must satisfy 1 < lo <= hi < inf");
  for (std::size_t c = 0; c < values.size(); ++c) {
    const double v = values[c];
    if (!std::isfinite(v) || v < lo || v > hi)
      throw Error(ErrorKind::InvalidExponent, "exponent value " + format_number(v) + " at cell " +
                                                  std::to_string(c) + " outside [" + format_number(lo) +
                                                  ", " + format_number(hi) + "]");
  }
}

std::pair<double, double> min_max(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorKind::InvalidExponent, "empty exponent field");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

}  // namespace

ExponentField::ExponentField(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)), lo_(0.0), hi_(0.0) {
  if (values_.size() != grid_.cell_count())
    throw Error(ErrorKind::GridMismatch, "exponent field needs one value per cell");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidExponent, "exponent values must be finite");
  std::tie(lo_, hi_) = min_max(values_);
  validate_values(values_, lo_, hi_);
}

ExponentField::ExponentField(Grid grid, std::vector<double> values, double declared_lo, double declared_hi)
    : grid_(grid), values_(std::move(values)), lo_(declared_lo), hi_(declared_hi) {
  if (values_.size() != grid_.cell_count())
    throw Error(ErrorKind::GridMismatch, "exponent field needs one value per cell");
  validate_values(values_, lo_, hi_);
}

ExponentField ExponentField::constant(const Grid& grid, double value) {
  return ExponentField(grid, std::vector<double>(grid.cell_count(), value));
}

ExponentField ExponentField::shifted(double delta) const {
  std::vector<double> v(values_);
  for (double& x : v) x += delta;
  return ExponentField(grid_, std::move(v));
}

ExponentField ExponentField::conjugate() const {
  std::vector<double> v(values_);
  for (double& x : v) x = x / (x - 1.0);
  return ExponentField(grid_, std::move(v));
}

std::pair<double, double> bounds(const ExponentField& f) { return min_max(f.values()); }

CellField sobolev_conjugate(const ExponentField& f, int dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidParameters, "dimension must be >= 1");
  CellField out(f.grid());
  const double n = dim;
  for (std::size_t c = 0; c < f.size(); ++c) {
    const double p = f[c];
    out[c] = p < n ? n * p / (n - p) : kInfiniteExponent;
  }
  return out;
}

double log_hoelder_modulus(const ExponentField& f) {
  const Grid& g = f.grid();
  const std::size_t n = f.size();
  if (n < 2) throw Error(ErrorKind::InvalidParameters, "log-Hoelder modulus needs at least two cells");
  std::vector<Point> centers(n);
  for (std::size_t c = 0; c < n; ++c) centers[c] = g.cell_center(c);
  double best = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double d = g.distance(centers[a], centers[b]);
      if (d >= 0.5 || d <= 0.0) continue;
      best = std::max(best, std::abs((f[a] - f[b]) * std::log(d)));
    }
  }
  return best;
}

bool CriticalSetReport::contains(std::size_t cell) const {
  return std::binary_search(cells.begin(), cells.end(), cell);
}

CriticalSetReport critical_set(const ExponentField& p, const ExponentField& q, int dim, double tol) {
  require_same_grid(p.grid(), q.grid());
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParameters, "critical-set tolerance must be positive");
  const CellField pstar = sobolev_conjugate(p, dim);
  CriticalSetReport report;
  report.tolerance = tol;
  report.gap.resize(p.size());
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double gap = pstar[c] - q[c];
    report.gap[c] = gap;
    if (gap < -tol) throw SupercriticalExponentError(c, gap);
    if (gap <= tol) report.cells.push_back(c);
  }
  return report;
}

CriticalSetReport critical_set(const ExponentField& p, const ExponentField& q, double tol) {
  return critical_set(p, q, p.grid().dim(), tol);
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& token, const std::string& context) {
  const std::string t = trim(token);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
    throw Error(ErrorKind::ParseError, "expected a number in " + context + ", got '" + t + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<double> parse_reals(const std::vector<std::string>& tokens, const std::string& context) {
  std::vector<double> out;
  for (const auto& t : tokens) out.push_back(parse_real(t, context));
  return out;
}

}  // namespace

FieldSpec FieldSpec::parse(const std::string& raw) {
  const std::string text = trim(raw);
  const auto open = text.find('(');
  if (open == std::string::npos || text.back() != ')')
    throw Error(ErrorKind::ParseError, "field constructor must look like name(args): '" + text + "'");
  const std::string name = trim(text.substr(0, open));
  const std::string body = text.substr(open + 1, text.size() - open - 2);

  if (name == "constant") {
    const auto args = parse_reals(split(body, ','), "constant(c)");
    if (args.size() != 1) throw Error(ErrorKind::ParseError, "constant(c) takes one argument");
    return FieldSpec(ConstantSpec{args[0]});
  }
  if (name == "affine") {
    const auto args = parse_reals(split(body, ','), "affine(a, b)");
    if (args.size() != 2) throw Error(ErrorKind::ParseError, "affine(a, b) takes two arguments");
    return FieldSpec(AffineSpec{args[0], args[1]});
  }
  if (name == "radial") {
    const auto args = parse_reals(split(body, ','), "radial(c, s, x0...)");
    if (args.size() != 3 && args.size() != 4)
      throw Error(ErrorKind::ParseError, "radial(c, s, x0[, y0]) takes three or four arguments");
    return FieldSpec(RadialSpec{args[0], args[1], {args[2], args.size() == 4 ? args[3] : 0.0}});
  }
  if (name == "piecewise") {
    const auto parts = split(body, ';');
    PiecewiseSpec spec{parse_real(parts[0], "piecewise default"), {}};
    for (std::size_t k = 1; k < parts.size(); ++k) {
      const auto eq = split(parts[k], '=');
      if (eq.size() != 2) throw Error(ErrorKind::ParseError, "piecewise box must read 'lo hi [lo hi] = v'");
      std::istringstream box(eq[0]);
      std::vector<std::string> coords;
      for (std::string tok; box >> tok;) coords.push_back(tok);
      const auto c = parse_reals(coords, "piecewise box");
      if (c.size() != 2 && c.size() != 4)
        throw Error(ErrorKind::ParseError, "piecewise box needs 2 (1D) or 4 (2D) coordinates");
      PiecewiseBox b{{c[0], c.size() == 4 ? c[2] : -kInfiniteExponent},
                     {c[1], c.size() == 4 ? c[3] : kInfiniteExponent},
                     parse_real(eq[1], "piecewise value")};
      spec.boxes.push_back(b);
    }
    return FieldSpec(std::move(spec));
  }
  throw Error(ErrorKind::ParseError, "unknown field constructor '" + name + "'");
}

double FieldSpec::evaluate(const Point& x, int dim) const {
  struct Eval {
    const Point& x;
    int dim;
    double operator()(const ConstantSpec& s) const { return s.value; }
    double operator()(const AffineSpec& s) const { return s.a + s.b * x[0]; }
    double operator()(const RadialSpec& s) const {
      const double dx = x[0] - s.center[0];
      const double dy = dim == 2 ? x[1] - s.center[1] : 0.0;
      return s.c + s.s * std::hypot(dx, dy);
    }
    double operator()(const PiecewiseSpec& s) const {
      for (const auto& b : s.boxes) {
        const bool in_x = x[0] >= b.lo[0] && x[0] < b.hi[0];
        const bool in_y = dim == 1 || (x[1] >= b.lo[1] && x[1] < b.hi[1]);
        if (in_x && in_y) return b.value;
      }
      return s.fallback;
    }
  };
  return std::visit(Eval{x, dim}, spec_);
}

std::string FieldSpec::to_string() const {
  struct Show {
    std::string operator()(const ConstantSpec& s) const { return "constant(" + format_number(s.value) + ")"; }
    std::string operator()(const AffineSpec& s) const {
      return "affine(" + format_number(s.a) + ", " + format_number(s.b) + ")";
    }
    std::string operator()(const RadialSpec& s) const {
      return "radial(" + format_number(s.c) + ", " + format_number(s.s) + ", " + format_number(s.center[0]) +
             ", " + format_number(s.center[1]) + ")";
    }
    std::string operator()(const PiecewiseSpec& s) const {
      std::string out = "piecewise(" + format_number(s.fallback);
      for (const auto& b : s.boxes) {
        out += "; " + format_number(b.lo[0]) + " " + format_number(b.hi[0]);
        if (std::isfinite(b.lo[1]) || std::isfinite(b.hi[1]))
          out += " " + format_number(b.lo[1]) + " " + format_number(b.hi[1]);
        out += " = " + format_number(b.value);
      }
      return out + ")";
    }
  };
  return std::visit(Show{}, spec_);
}

CellField sample_cells(const FieldSpec& spec, const Grid& grid) {
  CellField out(grid);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) out[c] = spec.evaluate(grid.cell_center(c), grid.dim());
  return out;
}

ExponentField sample_exponent(const FieldSpec& spec, const Grid& grid) {
  const CellField values = sample_cells(spec, grid);
  return ExponentField(grid, std::vector<double>(values.values().begin(), values.values().end()));
}

}  // namespace vexlab
