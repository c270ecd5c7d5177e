#include "vexlab/extremal.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <future>
#include <memory>
#include <numeric>

#include "vexlab/modular.hpp"
#include "vexlab/rng.hpp"

namespace vexlab {

ExtremalProblem::ExtremalProblem(ExponentField p, ExponentField q, double eps, CellMask mask, double critical_tol)
    : p_(std::move(p)), q_(std::move(q)), eps_(eps), mask_(std::move(mask)), critical_tol_(critical_tol),
      s_(q_) {
  require_same_grid(p_.grid(), q_.grid());
  require_same_grid(p_.grid(), mask_.grid());
  if (!(eps_ >= 0.0) || !std::isfinite(eps_))
    throw Error(ErrorKind::InvalidParameters, "eps must be finite and >= 0");
  for (std::size_t c = 0; c < q_.size(); ++c)
    if (q_[c] - eps_ < 1.0 + 1e-6)
      throw Error(ErrorKind::InfeasibleProblem, "q - eps must stay >= 1 + 1e-6 (cell " + std::to_string(c) + ")");
  s_ = q_.shifted(-eps_);
  if (mask_.active_nodes().empty())
    throw Error(ErrorKind::InvalidParameters, "mask has no active interior nodes");

  const CellField pstar = sobolev_conjugate(p_, grid().dim());
  bool any_critical = false;
  for (std::size_t c = 0; c < q_.size(); ++c) {
    if (!mask_[c]) continue;
    const double gap = pstar[c] - q_[c];
    if (gap < -critical_tol_) throw SupercriticalExponentError(c, gap);
    if (gap <= critical_tol_) any_critical = true;
  }
  critical_ = any_critical && eps_ == 0.0;
}

ExtremalProblem::ExtremalProblem(ExponentField p, ExponentField q, double eps)
    : ExtremalProblem(p, std::move(q), eps, CellMask::full(p.grid())) {}

ExtremalProblem ExtremalProblem::with_eps(double eps) const {
  return ExtremalProblem(p_, q_, eps, mask_, critical_tol_);
}

ExtremalProblem ExtremalProblem::with_mask(CellMask mask) const {
  return ExtremalProblem(p_, q_, eps_, std::move(mask), critical_tol_);
}

namespace {

double weighted_power_sum(const CellField& v, const ExponentField& s) {
  double sum = 0.0;
  for (std::size_t c = 0; c < v.size(); ++c) {
    const double a = std::abs(v[c]);
    if (a > 0.0) sum += std::pow(a, s[c]);
  }
  return sum * v.grid().cell_volume();
}

struct RestartOutcome {
  GridFunction u;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

// Ascent on R(u) = J(u / N(u)) with J the objective and N the gradient
// Luxemburg norm. Directions are Sobolev gradients: the Euclidean gradient of
// R preconditioned by the Dirichlet stiffness matrix of the active nodes.
constexpr double kWeightFloor = 1e-2;

class AscentEngine {
 public:
  AscentEngine(const ExtremalProblem& prob, const SolverOptions& opts)
      : prob_(prob), opts_(opts), grid_(prob.grid()), active_(prob.mask().active_nodes()),
        slot_(grid_.interior_node_count(), -1) {
    for (std::size_t k = 0; k < active_.size(); ++k) slot_[active_[k]] = static_cast<long>(k);
    const auto [lo, hi] = bounds(prob.p());
    weighted_ = !(lo == 2.0 && hi == 2.0);
    if (!weighted_) base_ = assemble_stiffness(nullptr);
  }

  RestartOutcome run(GridFunction u0) const {
    RestartOutcome out{restrict_to_mask(std::move(u0), prob_.mask()), 0.0, 0, false, {}};
    if (out.u.is_zero()) return out;
    out.u = project_to_unit_ball(out.u, prob_.p());
    double value = objective(out.u, prob_);
    out.trace.push_back(value);
    double eta = opts_.eta0;
    int quiet = 0;
    for (int it = 1; it <= opts_.max_iters; ++it) {
      out.iterations = it;
      const Eigen::VectorXd dir = direction(out.u, weighted_ ? *weighted_stiffness(out.u) : *base_);
      if (!dir.allFinite()) break;
      bool accepted = false;
      double next_value = value;
      GridFunction next(grid_);
      for (int halvings = 0; halvings < 60; ++halvings, eta *= 0.5) {
        GridFunction trial = out.u;
        auto tv = trial.values();
        for (std::size_t k = 0; k < active_.size(); ++k) tv[active_[k]] += eta * dir[static_cast<long>(k)];
        const double n = gradient_norm(trial, prob_.p());
        if (!(n > 0.0) || !std::isfinite(n)) continue;
        trial *= 1.0 / n;
        const double trial_value = objective(trial, prob_);
        if (trial_value >= value) {
          next = std::move(trial);
          next_value = trial_value;
          accepted = true;
          break;
        }
      }
      double change = 0.0;
      if (accepted) {
        change = std::abs(next_value - value) / std::max(std::abs(value), 1e-300);
        out.u = std::move(next);
        value = next_value;
        out.trace.push_back(value);
        eta = std::min(eta * 2.0, 1e12);
      } else {
        eta = opts_.eta0;
      }
      quiet = change < opts_.tol ? quiet + 1 : 0;
      if (quiet >= opts_.patience) {
        out.converged = true;
        break;
      }
    }
    out.objective = value;
    return out;
  }

  const std::vector<std::size_t>& active() const { return active_; }

 private:
  using Factor = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

  // Dirichlet stiffness on the active nodes, optionally with per-cell weights.
  std::unique_ptr<Factor> assemble_stiffness(const std::vector<double>* cell_weight) const {
    const long n = static_cast<long>(active_.size());
    std::vector<Eigen::Triplet<double>> trip;
    const double vol = grid_.cell_volume();
    auto add_edge = [&](int i0, int j0, int i1, int j1, double w) {
      const long a = slot_of(i0, j0);
      const long b = slot_of(i1, j1);
      if (a >= 0) trip.emplace_back(a, a, w);
      if (b >= 0) trip.emplace_back(b, b, w);
      if (a >= 0 && b >= 0) {
        trip.emplace_back(a, b, -w);
        trip.emplace_back(b, a, -w);
      }
    };
    for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
      const auto [i, j] = grid_.cell_index(c);
      const double cw = cell_weight ? (*cell_weight)[c] : 1.0;
      if (grid_.dim() == 1) {
        const double h = grid_.spacing(0);
        add_edge(i, 0, i + 1, 0, cw * vol / (h * h));
      } else {
        const double wx = cw * 0.5 * vol / (grid_.spacing(0) * grid_.spacing(0));
        const double wy = cw * 0.5 * vol / (grid_.spacing(1) * grid_.spacing(1));
        add_edge(i, j, i + 1, j, wx);
        add_edge(i, j + 1, i + 1, j + 1, wx);
        add_edge(i, j, i, j + 1, wy);
        add_edge(i + 1, j, i + 1, j + 1, wy);
      }
    }
    Eigen::SparseMatrix<double> k(n, n);
    k.setFromTriplets(trip.begin(), trip.end());
    auto factor = std::make_unique<Factor>();
    factor->compute(k);
    if (factor->info() != Eigen::Success)
      throw Error(ErrorKind::InvalidParameters, "stiffness factorization failed");
    return factor;
  }

  // Linearized p-Laplacian weights p G^(p-2), with G floored relative to its
  // largest value so the matrix stays definite.
  std::unique_ptr<Factor> weighted_stiffness(const GridFunction& u) const {
    const CellField grad = gradient_magnitude(u);
    const ExponentField& p = prob_.p();
    double gmax = 0.0;
    for (std::size_t c = 0; c < grad.size(); ++c) gmax = std::max(gmax, grad[c]);
    std::vector<double> w(grad.size(), 1.0);
    if (gmax > 0.0) {
      const double floor = kWeightFloor * gmax;
      for (std::size_t c = 0; c < grad.size(); ++c)
        w[c] = p[c] * std::pow(std::max(grad[c], floor) / gmax, p[c] - 2.0);
    }
    return assemble_stiffness(&w);
  }

  long slot_of(int i, int j) const {
    if (!grid_.is_interior_node(i, j)) return -1;
    return slot_[grid_.node_storage(i, j)];
  }

  void scatter(std::vector<double>& target, int i, int j, double v) const {
    const long s = slot_of(i, j);
    if (s >= 0) target[static_cast<std::size_t>(s)] += v;
  }

  // Sobolev gradient of R at u, assuming ||grad u||_p = 1.
  Eigen::VectorXd direction(const GridFunction& u, const Factor& precond) const {
    const std::size_t n = active_.size();
    const double vol = grid_.cell_volume();
    const ExponentField& s = prob_.objective_exponent();
    const ExponentField& p = prob_.p();
    const int dim = grid_.dim();
    const double corner_share = dim == 1 ? 0.5 : 0.25;

    // Gradient of J(u) = vol * sum |avg_c u|^s_c.
    std::vector<double> g(n, 0.0);
    const CellField avg = cell_values(u);
    for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
      const double a = avg[c];
      if (a == 0.0) continue;
      const double coef = vol * s[c] * std::pow(std::abs(a), s[c] - 2.0) * a * corner_share;
      const auto [i, j] = grid_.cell_index(c);
      scatter(g, i, j, coef);
      scatter(g, i + 1, j, coef);
      if (dim == 2) {
        scatter(g, i, j + 1, coef);
        scatter(g, i + 1, j + 1, coef);
      }
    }

    // Gradient of N at N = 1: (sum vol p G^(p-2) dQ/2) / (sum vol p G^p).
    std::vector<double> gn(n, 0.0);
    double denom = 0.0;
    for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
      const auto [i, j] = grid_.cell_index(c);
      if (dim == 1) {
        const double h = grid_.spacing(0);
        const double d = (u.at(i + 1) - u.at(i)) / h;
        const double gmag = std::abs(d);
        if (gmag == 0.0) continue;
        const double w = vol * p[c] * std::pow(gmag, p[c] - 2.0);
        denom += w * gmag * gmag;
        scatter(gn, i + 1, 0, w * d / h);
        scatter(gn, i, 0, -w * d / h);
      } else {
        const double hx = grid_.spacing(0);
        const double hy = grid_.spacing(1);
        const double xb = (u.at(i + 1, j) - u.at(i, j)) / hx;
        const double xt = (u.at(i + 1, j + 1) - u.at(i, j + 1)) / hx;
        const double yl = (u.at(i, j + 1) - u.at(i, j)) / hy;
        const double yr = (u.at(i + 1, j + 1) - u.at(i + 1, j)) / hy;
        const double q2 = 0.5 * (xb * xb + xt * xt + yl * yl + yr * yr);
        if (q2 == 0.0) continue;
        const double w = 0.5 * vol * p[c] * std::pow(q2, 0.5 * p[c] - 1.0);
        denom += 2.0 * w * q2;
        scatter(gn, i + 1, j, w * (xb / hx - yr / hy));
        scatter(gn, i, j, w * (-xb / hx - yl / hy));
        scatter(gn, i, j + 1, w * (-xt / hx + yl / hy));
        scatter(gn, i + 1, j + 1, w * (xt / hx + yr / hy));
      }
    }

    double gu = 0.0;
    const auto uv = u.values();
    for (std::size_t k = 0; k < n; ++k) gu += g[k] * uv[active_[k]];

    Eigen::VectorXd rhs(static_cast<long>(n));
    for (std::size_t k = 0; k < n; ++k)
      rhs[static_cast<long>(k)] = g[k] - (denom > 0.0 ? gu * gn[k] / denom : 0.0);
    return precond.solve(rhs);
  }

  const ExtremalProblem& prob_;
  const SolverOptions& opts_;
  Grid grid_;
  std::vector<std::size_t> active_;
  std::vector<long> slot_;
  bool weighted_ = false;
  std::unique_ptr<Factor> base_;
};

GridFunction bump_start(const Grid& g, const std::vector<std::size_t>& active) {
  Point lo{1e300, 1e300};
  Point hi{-1e300, -1e300};
  Point centroid{0.0, 0.0};
  for (std::size_t n : active) {
    const auto [i, j] = g.node_index(n);
    const Point x = g.node_point(i, j);
    for (int a = 0; a < g.dim(); ++a) {
      lo[a] = std::min(lo[a], x[a]);
      hi[a] = std::max(hi[a], x[a]);
      centroid[a] += x[a];
    }
  }
  double r = 1e300;
  for (int a = 0; a < g.dim(); ++a) {
    centroid[a] /= static_cast<double>(active.size());
    r = std::min(r, 0.5 * (hi[a] - lo[a]) + g.spacing(a));
  }
  GridFunction u(g);
  auto v = u.values();
  for (std::size_t n : active) {
    const auto [i, j] = g.node_index(n);
    const double d2 = std::pow(g.distance(g.node_point(i, j), centroid), 2);
    if (d2 < r * r) v[n] = std::exp(1.0 / (d2 - r * r) + 1.0 / (r * r));
  }
  return u;
}

GridFunction noise_start(const Grid& g, const CellMask& mask, std::uint64_t seed) {
  Rng rng(seed);
  GridFunction u(g);
  auto v = u.values();
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = rng.uniform();
  u = restrict_to_mask(std::move(u), mask);
  for (int sweep = 0; sweep < 5; ++sweep) {
    GridFunction next(g);
    auto nv = next.values();
    for (std::size_t n = 0; n < nv.size(); ++n) {
      const auto [i, j] = g.node_index(n);
      if (g.dim() == 1)
        nv[n] = 0.5 * (u.at(i - 1) + u.at(i + 1));
      else
        nv[n] = 0.25 * (u.at(i - 1, j) + u.at(i + 1, j) + u.at(i, j - 1) + u.at(i, j + 1));
    }
    u = restrict_to_mask(std::move(next), mask);
  }
  return u;
}

GridFunction constant_start(const Grid& g, const std::vector<std::size_t>& active) {
  GridFunction u(g);
  for (std::size_t n : active) u.values()[n] = 1.0;
  return u;
}

}  // namespace

double objective(const GridFunction& u, const ExtremalProblem& prob) {
  require_same_grid(u.grid(), prob.grid());
  return weighted_power_sum(cell_values(u), prob.objective_exponent());
}

GridFunction project_to_unit_ball(const GridFunction& u, const ExponentField& p) {
  require_same_grid(u.grid(), p.grid());
  if (u.is_zero()) throw Error(ErrorKind::ZeroFunction, "cannot normalize the zero function");
  const double n = gradient_norm(u, p);
  return (1.0 / n) * u;
}

ExtremalRecord solve(const ExtremalProblem& prob, const SolverOptions& opts) {
  if (opts.restarts < 1 && opts.warm_starts.empty())
    throw Error(ErrorKind::InvalidParameters, "need at least one restart");
  if (opts.patience < 1 || opts.max_iters < 1 || !(opts.tol > 0.0) || !(opts.eta0 > 0.0))
    throw Error(ErrorKind::InvalidParameters, "solver options out of range");

  const AscentEngine engine(prob, opts);
  const Grid& g = prob.grid();

  std::vector<GridFunction> starts;
  for (int k = 0; k < opts.restarts; ++k) {
    switch (k) {
      case 0: starts.push_back(bump_start(g, engine.active())); break;
      case 1: starts.push_back(noise_start(g, prob.mask(), opts.seed * 1000003ULL + 1)); break;
      case 2: starts.push_back(constant_start(g, engine.active())); break;
      default:
        starts.push_back(noise_start(g, prob.mask(), opts.seed * 1000003ULL + static_cast<std::uint64_t>(k)));
    }
  }
  for (const auto& w : opts.warm_starts) {
    require_same_grid(w.grid(), g);
    starts.push_back(w);
  }

  std::vector<RestartOutcome> outcomes(starts.size(), RestartOutcome{GridFunction(g), 0.0, 0, false, {}});
  const std::size_t workers = static_cast<std::size_t>(std::max(1, opts.threads));
  for (std::size_t base = 0; base < starts.size(); base += workers) {
    const std::size_t end = std::min(starts.size(), base + workers);
    if (workers == 1) {
      outcomes[base] = engine.run(starts[base]);
      continue;
    }
    std::vector<std::future<RestartOutcome>> jobs;
    for (std::size_t k = base; k < end; ++k)
      jobs.push_back(std::async(std::launch::async, [&engine, &starts, k] { return engine.run(starts[k]); }));
    for (std::size_t k = base; k < end; ++k) outcomes[k] = jobs[k - base].get();
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < outcomes.size(); ++k)
    if (outcomes[k].objective > outcomes[best].objective) best = k;

  ExtremalRecord rec{outcomes[best].u, 0.0, 0.0, 0, 0, 0, false, false, {}, {}};
  rec.eps = prob.eps();
  rec.objective = outcomes[best].objective;
  rec.grad_norm = rec.u.is_zero() ? 0.0 : gradient_norm(rec.u, prob.p());
  rec.iterations = outcomes[best].iterations;
  rec.restarts_used = static_cast<int>(outcomes.size());
  rec.best_restart = static_cast<int>(best);
  rec.converged = outcomes[best].converged;
  rec.critical = prob.critical();
  rec.trace = outcomes[best].trace;
  for (const auto& o : outcomes) rec.restart_objectives.push_back(o.objective);

  const bool any_converged =
      std::any_of(outcomes.begin(), outcomes.end(), [](const RestartOutcome& o) { return o.converged; });
  if (!any_converged) throw SolverFailure(std::move(rec));
  return rec;
}

double quotient_constant(const ExtremalRecord& record, const ExtremalProblem& prob) {
  const double num = gradient_norm(record.u, prob.p());
  const double den = luxemburg_norm(record.u, prob.objective_exponent()).value;
  if (!(den > 0.0)) throw Error(ErrorKind::ZeroFunction, "extremal vanishes");
  return num / den;
}

double quotient_constant(const ExtremalProblem& prob, const SolverOptions& opts) {
  return quotient_constant(solve(prob, opts), prob);
}

}  // namespace vexlab
