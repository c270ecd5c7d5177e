#include "vexlab/modular.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vexlab/rng.hpp"

namespace vexlab {

double modular(const CellField& u, const ExponentField& p) {
  require_same_grid(u.grid(), p.grid());
  const double vol = u.grid().cell_volume();
  double sum = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    const double a = std::abs(u[c]);
    if (a > 0.0) sum += std::pow(a, p[c]);
  }
  return sum * vol;
}

double modular(const GridFunction& u, const ExponentField& p) { return modular(cell_values(u), p); }

LuxemburgNorm luxemburg_norm(const CellField& u, const ExponentField& p) {
  require_same_grid(u.grid(), p.grid());
  const Grid& g = u.grid();

  // Work in log space: modular(u / lambda) = vol * sum exp(p_c (log|u_c| - log lambda)).
  std::vector<double> log_abs;
  std::vector<double> expo;
  double max_abs = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    const double a = std::abs(u[c]);
    if (a > 0.0) {
      log_abs.push_back(std::log(a));
      expo.push_back(p[c]);
      max_abs = std::max(max_abs, a);
    }
  }
  if (log_abs.empty()) return {};

  const double vol = g.cell_volume();
  auto scaled_modular = [&](double lambda) {
    const double log_lambda = std::log(lambda);
    double sum = 0.0;
    for (std::size_t k = 0; k < log_abs.size(); ++k) sum += std::exp(expo[k] * (log_abs[k] - log_lambda));
    return sum * vol;
  };

  const double p_lo = *std::min_element(expo.begin(), expo.end());
  // modular(u / hi) < 1 by construction: max|u|/hi < min(1, |Omega|^(-1/p_-)).
  double hi = max_abs * (std::pow(g.domain_volume(), 1.0 / p_lo) + 1.0);
  int iters = 0;
  while (scaled_modular(hi) > 1.0) {
    hi *= 2.0;
    if (++iters > kNormMaxIters) throw Error(ErrorKind::NonConvergence, "Luxemburg bracket (upper)");
  }
  double lo = hi;
  while (scaled_modular(lo) <= 1.0) {
    hi = lo;
    lo *= 0.5;
    if (++iters > kNormMaxIters) throw Error(ErrorKind::NonConvergence, "Luxemburg bracket (lower)");
  }
  while (hi - lo > kNormRelTol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (scaled_modular(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
    if (++iters > kNormMaxIters) throw Error(ErrorKind::NonConvergence, "Luxemburg bisection cap");
  }
  // hi always satisfies modular(u / hi) <= 1, so the value never undershoots.
  return {hi, std::abs(scaled_modular(hi) - 1.0), iters};
}

LuxemburgNorm luxemburg_norm(const GridFunction& u, const ExponentField& p) {
  return luxemburg_norm(cell_values(u), p);
}

double gradient_norm(const GridFunction& u, const ExponentField& p) {
  return luxemburg_norm(gradient_magnitude(u), p).value;
}

std::pair<double, double> norm_modular_bounds(const CellField& u, const ExponentField& p) {
  const double rho = modular(u, p);
  const auto [p_lo, p_hi] = bounds(p);
  const double a = std::pow(rho, 1.0 / p_lo);
  const double b = std::pow(rho, 1.0 / p_hi);
  return {std::min(a, b), std::max(a, b)};
}

InequalityCheck hoelder_check(const CellField& f, const CellField& g, const ExponentField& p) {
  require_same_grid(f.grid(), g.grid());
  require_same_grid(f.grid(), p.grid());
  double lhs = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) lhs += f[c] * g[c];
  lhs *= f.grid().cell_volume();

  const auto [p_lo, p_hi] = bounds(p);
  const double conj_lo = p_hi / (p_hi - 1.0);  // (p')_- is attained where p = p_+
  const double constant = 1.0 / p_lo + 1.0 / conj_lo;
  const double rho = modular(f, p);
  const double f_factor = std::max(std::pow(rho, 1.0 / p_lo), std::pow(rho, 1.0 / p_hi));
  const double g_norm = luxemburg_norm(g, p.conjugate()).value;
  const double rhs = constant * f_factor * g_norm;
  return {lhs, rhs, lhs <= rhs + 1e-12};
}

HoelderFuzzReport hoelder_fuzz(const Grid& grid, int trials, std::uint64_t seed) {
  HoelderFuzzReport report;
  const std::size_t n = grid.cell_count();
  for (int k = 0; k < trials; ++k) {
    Rng rng(seed + static_cast<std::uint64_t>(k));
    // Piecewise exponent: up to 4 random breakpoints in cell order.
    const int pieces = 1 + static_cast<int>(rng.next() % 4);
    std::vector<double> pv(n);
    std::vector<std::size_t> cuts{0, n};
    for (int b = 1; b < pieces; ++b) cuts.push_back(rng.next() % n);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t b = 0; b + 1 < cuts.size(); ++b) {
      const double value = rng.uniform(1.05, 8.0);
      for (std::size_t c = cuts[b]; c < cuts[b + 1]; ++c) pv[c] = value;
    }
    const ExponentField p(grid, std::move(pv));

    const double fs = std::pow(10.0, rng.uniform(-2.0, 2.0));
    const double gs = std::pow(10.0, rng.uniform(-2.0, 2.0));
    const bool aligned = rng.uniform() < 0.25;  // push toward equality
    CellField f(grid);
    CellField g(grid);
    for (std::size_t c = 0; c < n; ++c) {
      f[c] = fs * rng.normal();
      g[c] = aligned ? gs * std::pow(std::abs(f[c]) / fs, p[c] - 1.0) * (f[c] < 0 ? -1.0 : 1.0)
                     : gs * rng.normal();
    }
    const InequalityCheck check = hoelder_check(f, g, p);
    ++report.trials;
    if (!check.holds) ++report.violations;
    if (check.rhs > 0.0) report.worst_ratio = std::max(report.worst_ratio, check.lhs / check.rhs);
  }
  return report;
}

double elementary_ratio(std::span<const double> a, std::span<const double> b, double p, double theta) {
  double na2 = 0.0;
  double nb2 = 0.0;
  double ns2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    na2 += a[k] * a[k];
    nb2 += b[k] * b[k];
    ns2 += (a[k] + b[k]) * (a[k] + b[k]);
  }
  if (na2 == 0.0 || nb2 == 0.0) return 0.0;
  const double na = std::sqrt(na2);
  const double nb = std::sqrt(nb2);
  const double num = std::abs(std::pow(ns2, 0.5 * p) - std::pow(na, p) - std::pow(nb, p));
  const double den = std::pow(na, p - theta) * std::pow(nb, theta) + std::pow(na, theta) * std::pow(nb, p - theta);
  return num / den;
}

double elementary_inequality_constant(double p_lo, double p_hi, double theta, long samples,
                                      std::uint64_t seed) {
  if (!(p_lo > 1.0) || !(p_hi >= p_lo) || !std::isfinite(p_hi) || !(theta > 0.0) || !(theta <= 1.0) ||
      samples < 1)
    throw Error(ErrorKind::InvalidParameters,
                "need 1 < p_lo <= p_hi < inf, 0 < theta <= 1 and samples >= 1");
  Rng rng(seed);
  double best = 0.0;
  double a[3];
  double b[3];
  for (long s = 0; s < samples; ++s) {
    const int dim = (s % 2 == 0) ? 2 : 3;
    const double p = rng.uniform(p_lo, p_hi);
    // Homogeneity lets |b| = 1; |a| spans six decades around it.
    const double scale = std::pow(10.0, rng.uniform(-3.0, 3.0));
    double na = 0.0;
    double nb = 0.0;
    for (int k = 0; k < dim; ++k) {
      a[k] = rng.normal();
      b[k] = rng.normal();
      na += a[k] * a[k];
      nb += b[k] * b[k];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na == 0.0 || nb == 0.0) continue;
    for (int k = 0; k < dim; ++k) {
      a[k] *= scale / na;
      b[k] /= nb;
    }
    best = std::max(best, elementary_ratio(std::span<const double>(a, dim), std::span<const double>(b, dim), p, theta));
  }
  return best;
}

InequalityCheck sobolev_inequality_check(const GridFunction& u, const ExponentField& p, const ExponentField& q,
                                         double s_tilde_inv) {
  require_same_grid(u.grid(), p.grid());
  require_same_grid(u.grid(), q.grid());
  if (!(s_tilde_inv > 0.0)) throw Error(ErrorKind::InvalidParameters, "S~^-1 must be positive");
  const double lhs = modular(u, q);
  const double grad = gradient_norm(u, p);
  const auto [q_lo, q_hi] = bounds(q);
  const double rhs = s_tilde_inv * std::max(std::pow(grad, q_hi), std::pow(grad, q_lo));
  return {lhs, rhs, lhs <= rhs * (1.0 + 1e-9)};
}

}  // namespace vexlab
