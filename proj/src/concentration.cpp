#include "vexlab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "vexlab/modular.hpp"
#include "vexlab/numerics.hpp"

namespace vexlab {

std::size_t cell_containing(const Grid& grid, const Point& x) {
  int idx[2] = {0, 0};
  for (int a = 0; a < grid.dim(); ++a) {
    const double t = std::floor((x[a] - grid.lo(a)) / grid.spacing(a));
    idx[a] = static_cast<int>(std::clamp(t, 0.0, static_cast<double>(grid.cells(a) - 1)));
  }
  return grid.cell_at(idx[0], idx[1]);
}

// ---------------------------------------------------------------------------

Extrapolation extrapolate_limit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty())
    throw Error(ErrorKind::InvalidParameters, "extrapolation needs matching, non-empty sequences");
  Extrapolation out{y.back(), false, 0.0};
  if (x.size() < 3) return out;

  const std::size_t k = x.size() - 3;
  const double x1 = x[k], x2 = x[k + 1], x3 = x[k + 2];
  const double y1 = y[k], y2 = y[k + 1], y3 = y[k + 2];
  if (!(x1 > x2 && x2 > x3 && x3 >= 0.0)) return out;
  const double d1 = y1 - y2;
  const double d2 = y2 - y3;
  if (d1 == 0.0 && d2 == 0.0) return {y3, true, 0.0};
  if (d1 * d2 <= 0.0) return out;

  // d1/d2 = (x1^c - x2^c) / (x2^c - x3^c), increasing in c.
  const double ratio = d1 / d2;
  auto h = [&](double c) {
    return (std::pow(x1, c) - std::pow(x2, c)) / (std::pow(x2, c) - std::pow(x3, c));
  };
  constexpr double c_lo = 0.1;
  constexpr double c_hi = 20.0;
  if (!(h(c_lo) <= ratio && ratio <= h(c_hi))) return out;
  double lo = c_lo;
  double hi = c_hi;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < ratio ? lo : hi) = mid;
  }
  const double c = 0.5 * (lo + hi);
  const double b = d2 / (std::pow(x2, c) - std::pow(x3, c));
  const double a = y3 - b * std::pow(x3, c);
  if (!std::isfinite(a)) return out;
  return {a, true, c};
}

// ---------------------------------------------------------------------------

const char* to_string(Classification c) {
  switch (c) {
    case Classification::Compact: return "compact";
    case Classification::Concentrating: return "concentrating";
    case Classification::Undecided: return "undecided";
  }
  return "undecided";
}

std::size_t argmax_cell(const GridFunction& u) {
  const CellField v = cell_values(u);
  std::size_t best = 0;
  for (std::size_t c = 1; c < v.size(); ++c)
    if (std::abs(v[c]) > std::abs(v[best])) best = c;
  return best;
}

double concentration_ratio(const GridFunction& u, const ExponentField& p, double r) {
  const DiscreteMeasure m = energy_measure(u, p);
  const double total = m.total_mass();
  if (!(total > 0.0)) return 0.0;
  const double inside = mass_in_ball(m, u.grid().cell_center(argmax_cell(u)), r);
  return std::clamp(inside / total, 0.0, 1.0);
}

DichotomyResult classify_dichotomy(std::span<const ExtremalRecord> records, const ExponentField& p,
                                   const ExponentField& q, double r, const CriticalSetReport& crit,
                                   const DichotomyThresholds& thresholds) {
  if (records.size() < 3) throw Error(ErrorKind::TooFewRecords, "dichotomy needs at least three records");
  const Grid& g = p.grid();
  require_same_grid(g, q.grid());
  if (!(r >= 2.0 * g.max_spacing() * (1.0 - 1e-12)))
    throw Error(ErrorKind::InvalidParameters, "dichotomy radius must be at least two grid spacings");

  DichotomyResult out;
  out.radius = r;
  out.thresholds = thresholds;
  const ExtremalRecord& last = records.back();
  const ExtremalRecord& prev = records[records.size() - 2];
  require_same_grid(last.u.grid(), g);
  out.last_objective = last.objective;
  out.conc_ratio = concentration_ratio(last.u, p, r);
  out.difference_modular = std::min(modular(last.u - prev.u, q), modular(last.u + prev.u, q));
  for (std::size_t k = records.size() - 3; k < records.size(); ++k) out.argmax_cells.push_back(argmax_cell(records[k].u));

  bool clustered = true;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b)
      if (g.distance(g.cell_center(out.argmax_cells[a]), g.cell_center(out.argmax_cells[b])) > r) clustered = false;
  const std::size_t point = out.argmax_cells.back();

  if (out.conc_ratio > thresholds.concentration && clustered && crit.contains(point)) {
    out.classification = Classification::Concentrating;
    out.concentration_point = point;
  } else if (out.difference_modular < thresholds.compactness * out.last_objective && out.conc_ratio < 0.5) {
    out.classification = Classification::Compact;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void require_decreasing(std::span<const double> xs, const char* what, bool allow_zero) {
  if (xs.empty()) throw Error(ErrorKind::InvalidParameters, std::string(what) + " is empty");
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!std::isfinite(xs[k]) || xs[k] < 0.0 || (!allow_zero && xs[k] == 0.0))
      throw Error(ErrorKind::InvalidParameters, std::string(what) + " has an invalid entry");
    if (k > 0 && !(xs[k] < xs[k - 1]))
      throw Error(ErrorKind::InvalidParameters, std::string(what) + " is not strictly decreasing");
  }
}

}  // namespace

SweepReport run_sweep(const ExtremalProblem& family, std::span<const double> schedule, const SolverOptions& opts,
                      const SweepOptions& sweep) {
  require_decreasing(schedule, "eps schedule", true);
  const Grid& g = family.grid();
  SweepReport report;
  report.schedule.assign(schedule.begin(), schedule.end());
  report.critical = critical_set(family.p(), family.q(), g.dim(), family.critical_tol());
  const double r = sweep.radius > 0.0 ? sweep.radius : std::max(0.1 * g.diameter(), 2.0 * g.max_spacing());

  // Validate every eps before spending solver time.
  std::vector<ExtremalProblem> problems;
  for (double eps : schedule) problems.push_back(family.with_eps(eps));

  std::optional<GridFunction> warm;
  std::vector<ExtremalRecord> good;
  std::vector<double> good_eps;
  std::vector<double> good_obj;
  for (std::size_t k = 0; k < problems.size(); ++k) {
    SweepEntry entry;
    entry.eps = schedule[k];
    SolverOptions o = opts;
    if (warm) o.warm_starts.push_back(*warm);
    try {
      entry.record = solve(problems[k], o);
    } catch (const SolverFailure& f) {
      entry.failed = true;
      entry.error = f.what();
      entry.record = f.best();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonConvergence) throw;
      entry.failed = true;
      entry.error = e.what();
    }
    if (entry.record && !entry.record->u.is_zero()) {
      entry.conc_ratio = concentration_ratio(entry.record->u, family.p(), r);
      entry.argmax_cell = argmax_cell(entry.record->u);
      warm = entry.record->u;
      if (!entry.failed) {
        good.push_back(*entry.record);
        good_eps.push_back(entry.eps);
        good_obj.push_back(entry.record->objective);
      }
    }
    report.entries.push_back(std::move(entry));
  }

  if (!good_obj.empty()) report.limit = extrapolate_limit(good_eps, good_obj);
  if (good.size() >= 3) {
    report.dichotomy =
        classify_dichotomy(good, family.p(), family.q(), r, report.critical, sweep.thresholds);
  } else {
    report.dichotomy.radius = r;
    report.dichotomy.thresholds = sweep.thresholds;
    if (!good.empty()) {
      report.dichotomy.conc_ratio = concentration_ratio(good.back().u, family.p(), r);
      report.dichotomy.last_objective = good.back().objective;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

LocalizedResult localized_constant(const ExponentField& p, const ExponentField& q, const Point& center,
                                   std::span<const double> radii, double eps, const SolverOptions& opts) {
  require_decreasing(radii, "radii", false);
  const Grid& g = p.grid();
  if (!(center[0] >= g.lo(0) && center[0] <= g.hi(0)) ||
      (g.dim() == 2 && !(center[1] >= g.lo(1) && center[1] <= g.hi(1))))
    throw Error(ErrorKind::InvalidParameters, "center must lie in the closed domain");

  std::vector<CellMask> masks;
  for (double r : radii) masks.push_back(restrict_to_ball(g, center, r));  // BallTooSmall first

  LocalizedResult out;
  out.center = center;
  std::optional<GridFunction> inner;
  for (std::size_t k = radii.size(); k-- > 0;) {
    const ExtremalProblem prob(p, q, eps, masks[k]);
    SolverOptions o = opts;
    if (inner) o.warm_starts.push_back(*inner);
    ExtremalRecord rec = solve(prob, o);
    const double quotient = quotient_constant(rec, prob);
    inner = rec.u;
    out.entries.push_back(LocalizedEntry{radii[k], rec.objective, quotient, std::move(rec)});
  }
  std::reverse(out.entries.begin(), out.entries.end());
  std::vector<double> values;
  for (const auto& e : out.entries) values.push_back(e.value);
  out.extrapolation = extrapolate_limit(radii, values);
  return out;
}

SoblocCheck check_sobloc_identity(const ExponentField& p, const ExponentField& q, const Point& center,
                                  std::span<const double> radii, const SolverOptions& opts) {
  SoblocCheck out;
  out.localized = localized_constant(p, q, center, radii, 0.0, opts);
  const double q0 = q[cell_containing(q.grid(), center)];
  std::vector<double> lhs;
  std::vector<double> rhs;
  for (const auto& e : out.localized.entries) {
    lhs.push_back(e.value);
    rhs.push_back(std::pow(e.quotient, -q0));
  }
  auto gap = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
  out.lhs_finest = lhs.back();
  out.rhs_finest = rhs.back();
  out.rel_gap_finest = gap(out.lhs_finest, out.rhs_finest);
  out.lhs = out.localized.extrapolation.limit;
  out.rhs = extrapolate_limit(radii, rhs).limit;
  out.rel_gap = gap(out.lhs, out.rhs);
  return out;
}

// ---------------------------------------------------------------------------

double bubble_profile(BubbleProfile profile, double r) {
  if (!(r < 0.5)) return 0.0;
  if (profile == BubbleProfile::Tent) return 0.5 - r;
  return std::exp(1.0 / (r * r - 0.25));
}

GridFunction bubble_shape(const Grid& grid, const Point& center, double eps, double p_center,
                          BubbleProfile profile) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidParameters, "bubble scale must be positive");
  const double n = grid.dim();
  const double amp = std::pow(eps, -(n - p_center) / p_center);
  return interpolate(grid, [&](const Point& x) { return amp * bubble_profile(profile, grid.distance(x, center) / eps); });
}

GridFunction scale_to_energy(const GridFunction& u, const ExponentField& p, double target_mass) {
  require_same_grid(u.grid(), p.grid());
  if (!(target_mass > 0.0) || !std::isfinite(target_mass))
    throw Error(ErrorKind::TargetMassInfeasible, "target mass must be positive");
  const CellField gm = gradient_magnitude(u);
  const double vol = u.grid().cell_volume();
  auto energy = [&](double t) {
    double s = 0.0;
    for (std::size_t c = 0; c < gm.size(); ++c)
      if (gm[c] > 0.0) s += std::pow(t * gm[c], p[c]);
    return s * vol;
  };
  const double e1 = energy(1.0);
  if (!(e1 > 0.0)) throw Error(ErrorKind::TargetMassInfeasible, "profile carries no gradient energy on this grid");
  const double guess = std::pow(target_mass / e1, 1.0 / bounds(p).first);
  const BisectionResult t = solve_increasing(energy, target_mass, guess, 1e-15, 4000);
  return t.root * u;
}

namespace {

void check_bubble_site(const Grid& g, const Point& center, double eps, double target_mass) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorKind::InvalidParameters, "bubble scale must be positive");
  if (!(target_mass > 0.0 && target_mass <= 1.0))
    throw Error(ErrorKind::TargetMassInfeasible, "target mass must lie in (0, 1]");
  if (!g.contains(center) || g.distance_to_boundary(center) - 0.5 * eps < 2.0 * g.max_spacing())
    throw Error(ErrorKind::BubbleTouchesBoundary, "bubble support must stay two spacings inside the domain");
}

void check_atoms(const Grid& g, std::span<const Atom> atoms, double eps) {
  if (atoms.empty()) throw Error(ErrorKind::InvalidParameters, "need at least one atom");
  double total = 0.0;
  for (const auto& a : atoms) total += a.mass;
  if (!(total < 1.0)) throw Error(ErrorKind::MassBudgetExceeded, "atom masses must sum to less than 1");
  for (std::size_t a = 0; a < atoms.size(); ++a)
    for (std::size_t b = a + 1; b < atoms.size(); ++b)
      if (g.distance(atoms[a].center, atoms[b].center) < eps + 2.0 * g.max_spacing())
        throw Error(ErrorKind::OverlappingSupports, "bubble supports overlap");
}

GridFunction positive_orientation(GridFunction u) {
  const CellField v = cell_values(u);
  const std::size_t k = argmax_cell(u);
  if (v[k] < 0.0) u *= -1.0;
  return u;
}

}  // namespace

GridFunction make_bubble(const Point& center, double eps, const ExponentField& p, double target_mass,
                         BubbleProfile profile) {
  const Grid& g = p.grid();
  check_bubble_site(g, center, eps, target_mass);
  const GridFunction shape = bubble_shape(g, center, eps, p[cell_containing(g, center)], profile);
  if (shape.is_zero()) throw Error(ErrorKind::TargetMassInfeasible, "bubble is not resolved by the grid");
  return scale_to_energy(shape, p, target_mass);
}

GridFunction make_extremal_bubble(const Point& center, double eps, const ExponentField& p, const ExponentField& q,
                                  double target_mass, const SolverOptions& opts) {
  const Grid& g = p.grid();
  check_bubble_site(g, center, eps, target_mass);
  const ExtremalProblem prob(p, q, 0.0, restrict_to_ball(g, center, 0.5 * eps));
  SolverOptions o = opts;
  o.warm_starts.push_back(bubble_shape(g, center, eps, p[cell_containing(g, center)], BubbleProfile::SmoothCompact));
  const ExtremalRecord rec = solve(prob, o);
  return scale_to_energy(positive_orientation(rec.u), p, target_mass);
}

GridFunction make_multi_bubble(std::span<const Atom> atoms, double eps, const ExponentField& p,
                               BubbleProfile profile) {
  check_atoms(p.grid(), atoms, eps);
  GridFunction u(p.grid());
  for (const auto& a : atoms) u += make_bubble(a.center, eps, p, a.mass, profile);
  return u;
}

GridFunction make_multi_extremal_bubble(std::span<const Atom> atoms, double eps, const ExponentField& p,
                                        const ExponentField& q, const SolverOptions& opts) {
  check_atoms(p.grid(), atoms, eps);
  GridFunction u(p.grid());
  for (const auto& a : atoms) u += make_extremal_bubble(a.center, eps, p, q, a.mass, opts);
  return u;
}

// ---------------------------------------------------------------------------

AtomicDecomposition detect_atoms(const DiscreteMeasure& m, double atom_radius, double threshold_fraction) {
  if (!(atom_radius > 0.0)) throw Error(ErrorKind::InvalidParameters, "atom radius must be positive");
  if (!(threshold_fraction > 0.0 && threshold_fraction <= 1.0))
    throw Error(ErrorKind::InvalidParameters, "threshold fraction must lie in (0, 1]");
  const Grid& g = m.grid();
  const auto masses = m.masses();
  const double total = m.total_mass();

  AtomicDecomposition out;
  out.atom_radius = atom_radius;
  out.threshold = threshold_fraction * total;

  std::vector<std::size_t> order(masses.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return masses[a] > masses[b]; });

  double captured = 0.0;
  if (total > 0.0) {
    for (std::size_t c : order) {
      if (!(masses[c] > 0.0)) break;
      const Point x = g.cell_center(c);
      bool excluded = false;
      for (const auto& a : out.atoms)
        if (g.distance(x, g.cell_center(a.cell)) <= 2.0 * atom_radius) excluded = true;
      if (excluded) continue;
      const double mass = mass_in_ball(m, x, atom_radius);
      if (mass >= out.threshold) {
        out.atoms.push_back({c, mass});
        captured += mass;
      }
    }
  }
  out.diffuse_mass = std::max(0.0, total - captured);
  return out;
}

double eval_F_eps(const GridFunction& u, double eps, const ExponentField& q) {
  if (!(eps >= 0.0)) throw Error(ErrorKind::InvalidParameters, "eps must be nonnegative");
  return modular(u, eps == 0.0 ? q : q.shifted(-eps));
}

double eval_F_star(const GridFunction& u, const AtomicDecomposition& atoms, const ExponentField& p,
                   const ExponentField& q, const std::map<std::size_t, double>& localized) {
  require_same_grid(p.grid(), q.grid());
  const double n = p.grid().dim();
  double sum = modular(u, q);
  for (const auto& a : atoms.atoms) {
    const auto it = localized.find(a.cell);
    if (it == localized.end())
      throw Error(ErrorKind::MissingLocalizedConstant, "no localized constant for atom cell " + std::to_string(a.cell));
    const double pc = p[a.cell];
    if (!(pc < n)) throw Error(ErrorKind::InvalidParameters, "atom cell has p >= n, p* is infinite");
    const double pstar = n * pc / (n - pc);
    sum += std::pow(a.mass, pstar / pc) * std::pow(it->second, -pstar);
  }
  return sum;
}

double quotient_from_modular_constant(double modular_constant, double q_at_x) {
  if (!(modular_constant > 0.0) || !(q_at_x > 1.0))
    throw Error(ErrorKind::InvalidParameters, "need a positive constant and q > 1");
  return std::pow(modular_constant, -1.0 / q_at_x);
}

// ---------------------------------------------------------------------------

SufficientConditionReport check_sufficient_condition(const ExponentField& p, const ExponentField& q,
                                                     const CriticalSetReport& crit, double global_value,
                                                     const SufficientConditionOptions& options,
                                                     const SolverOptions& opts) {
  if (crit.empty()) throw Error(ErrorKind::InvalidParameters, "critical set is empty");
  if (options.samples < 1) throw Error(ErrorKind::InvalidParameters, "need at least one sample");
  if (!(global_value > 0.0)) throw Error(ErrorKind::InvalidParameters, "global constant must be positive");
  const Grid& g = p.grid();
  std::vector<double> radii = options.radii;
  if (radii.empty()) radii = {0.3 * g.diameter(), 0.2 * g.diameter(), 0.1 * g.diameter()};

  std::vector<std::size_t> cells;
  const std::size_t m = crit.cells.size();
  const std::size_t s = std::min<std::size_t>(m, static_cast<std::size_t>(options.samples));
  for (std::size_t k = 0; k < s; ++k) cells.push_back(crit.cells[s == 1 ? m / 2 : k * (m - 1) / (s - 1)]);

  std::vector<LocalizedResult> results(cells.size());
  const int workers = std::max(1, opts.threads);
  SolverOptions inner = opts;
  inner.threads = 1;
  for (std::size_t base = 0; base < cells.size(); base += static_cast<std::size_t>(workers)) {
    const std::size_t end = std::min(cells.size(), base + static_cast<std::size_t>(workers));
    std::vector<std::future<LocalizedResult>> jobs;
    for (std::size_t k = base; k < end; ++k)
      jobs.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, [&, k] {
        return localized_constant(p, q, g.cell_center(cells[k]), radii, 0.0, inner);
      }));
    for (std::size_t k = base; k < end; ++k) results[k] = jobs[k - base].get();
  }

  SufficientConditionReport out;
  out.global = global_value;
  out.inclusion = true;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double v = results[k].extrapolation.limit;
    out.samples.emplace_back(cells[k], v);
    out.sup_local = std::max(out.sup_local, v);
    for (const auto& e : results[k].entries)
      if (e.value > global_value * (1.0 + options.inclusion_slack)) out.inclusion = false;
    if (v > global_value * (1.0 + options.inclusion_slack)) out.inclusion = false;
  }
  out.strict = out.sup_local < global_value * (1.0 - options.margin);
  return out;
}

}  // namespace vexlab
