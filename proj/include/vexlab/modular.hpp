#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "vexlab/exponent.hpp"
#include "vexlab/grid.hpp"

namespace vexlab {

/// Midpoint quadrature of |u|^p(x): sum over cells of |u_c|^p_c * |cell|.
double modular(const CellField& u, const ExponentField& p);
/// Same, with u sampled at cell midpoints.
double modular(const GridFunction& u, const ExponentField& p);

struct LuxemburgNorm {
  double value = 0.0;
  double residual = 0.0;  // |modular(u / value) - 1|, 0 for u = 0
  int iterations = 0;
};

inline constexpr double kNormRelTol = 1e-12;
inline constexpr int kNormMaxIters = 200;

/// inf{lambda > 0 : modular(u / lambda) <= 1} by bracketing and bisection.
LuxemburgNorm luxemburg_norm(const CellField& u, const ExponentField& p);
LuxemburgNorm luxemburg_norm(const GridFunction& u, const ExponentField& p);

/// ||grad u||_p(x), the constraint functional of the extremal problems.
double gradient_norm(const GridFunction& u, const ExponentField& p);

/// (min, max) of {rho^(1/p_-), rho^(1/p_+)} with rho = modular(u, p). The
/// Luxemburg norm always lies in this interval.
std::pair<double, double> norm_modular_bounds(const CellField& u, const ExponentField& p);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// int f g  <=  (1/p_- + 1/p'_-) max{rho_p(f)^(1/p_-), rho_p(f)^(1/p_+)} ||g||_p'(x)
InequalityCheck hoelder_check(const CellField& f, const CellField& g, const ExponentField& p);

struct HoelderFuzzReport {
  int trials = 0;
  int violations = 0;
  double worst_ratio = 0.0;  // max lhs / rhs over trials with rhs > 0
};

/// Random (f, g, piecewise p) triples on `grid`; trial k is seeded from
/// seed + k so any partition of trials across workers reproduces the run.
HoelderFuzzReport hoelder_fuzz(const Grid& grid, int trials, std::uint64_t seed);

/// ||a+b|^p - |a|^p - |b|^p| / (|a|^(p-theta)|b|^theta + |a|^theta|b|^(p-theta)),
/// defined as 0 when a = 0 or b = 0.
double elementary_ratio(std::span<const double> a, std::span<const double> b, double p, double theta);

/// Empirical supremum of elementary_ratio over random (a, b, p) with
/// a, b in R^2 and R^3 (alternating) and p uniform in [p_lo, p_hi].
double elementary_inequality_constant(double p_lo, double p_hi, double theta, long samples,
                                      std::uint64_t seed);

/// int |u|^q  <=  S~^-1 max{||grad u||^q+, ||grad u||^q-}, with 1e-9 relative slack.
InequalityCheck sobolev_inequality_check(const GridFunction& u, const ExponentField& p,
                                         const ExponentField& q, double s_tilde_inv);

}  // namespace vexlab
