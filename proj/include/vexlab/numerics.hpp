#pragma once

#include <cmath>
#include <functional>

#include "vexlab/error.hpp"

namespace vexlab {

struct BisectionResult {
  double root = 0.0;
  double value = 0.0;  // f(root) - target
  int iterations = 0;
};

// Solves f(x) = target for a continuous, strictly increasing f on (0, inf).
// The bracket is grown geometrically from `guess` and then bisected until the
// relative bracket width drops below rel_tol. Throws NonConvergence when the
// iteration budget runs out.
inline BisectionResult solve_increasing(const std::function<double(double)>& f, double target,
                                        double guess, double rel_tol, int max_iters) {
  if (!(guess > 0.0) || !std::isfinite(guess)) guess = 1.0;
  double lo = guess;
  double hi = guess;
  double f_lo = f(lo);
  double f_hi = f_lo;
  int iters = 0;
  while (f_hi < target) {
    hi *= 2.0;
    f_hi = f(hi);
    if (++iters > max_iters || !std::isfinite(hi))
      throw Error(ErrorKind::NonConvergence, "could not bracket root from above");
  }
  while (f_lo > target) {
    lo *= 0.5;
    f_lo = f(lo);
    if (++iters > max_iters || lo == 0.0)
      throw Error(ErrorKind::NonConvergence, "could not bracket root from below");
  }
  if (lo == hi) return {lo, f_lo - target, iters};
  if (f_hi == target) return {hi, 0.0, iters};
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid < target)
      lo = mid;
    else
      hi = mid;
    if (++iters > max_iters)
      throw Error(ErrorKind::NonConvergence, "bisection iteration cap reached");
  }
  const double root = 0.5 * (lo + hi);
  return {root, f(root) - target, iters};
}

}  // namespace vexlab
