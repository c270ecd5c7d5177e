#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vexlab/exponent.hpp"
#include "vexlab/grid.hpp"

namespace vexlab {

/// sup { int |u|^(q - eps) : ||grad u||_p(x) <= 1, u = 0 off the mask }.
class ExtremalProblem {
 public:
  ExtremalProblem(ExponentField p, ExponentField q, double eps, CellMask mask, double critical_tol = 1e-6);
  ExtremalProblem(ExponentField p, ExponentField q, double eps);

  const Grid& grid() const { return p_.grid(); }
  const ExponentField& p() const { return p_; }
  const ExponentField& q() const { return q_; }
  double eps() const { return eps_; }
  const CellMask& mask() const { return mask_; }
  double critical_tol() const { return critical_tol_; }
  /// q - eps, the exponent of the objective.
  const ExponentField& objective_exponent() const { return s_; }
  /// eps = 0 and some masked cell is critical.
  bool critical() const { return critical_; }

  ExtremalProblem with_eps(double eps) const;
  ExtremalProblem with_mask(CellMask mask) const;

 private:
  ExponentField p_;
  ExponentField q_;
  double eps_;
  CellMask mask_;
  double critical_tol_;
  ExponentField s_;
  bool critical_ = false;
};

struct SolverOptions {
  double tol = 1e-9;
  int patience = 5;
  int max_iters = 5000;
  int restarts = 4;
  std::uint64_t seed = 0;
  double eta0 = 1.0;
  int threads = 1;
  /// Extra initial guesses, run after the standard restarts.
  std::vector<GridFunction> warm_starts;
};

struct ExtremalRecord {
  GridFunction u;
  double eps = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int restarts_used = 0;
  int best_restart = 0;
  bool converged = false;
  bool critical = false;
  std::vector<double> restart_objectives;
  /// Objective after every accepted step of the winning restart.
  std::vector<double> trace;
};

/// Thrown by solve() when no restart met the patience criterion; carries the
/// best iterate so callers can still persist it.
class SolverFailure : public Error {
 public:
  explicit SolverFailure(ExtremalRecord best)
      : Error(ErrorKind::NonConvergence, "iteration cap reached on every restart"), best_(std::move(best)) {}
  const ExtremalRecord& best() const { return best_; }

 private:
  ExtremalRecord best_;
};

/// int |u|^(q - eps) by midpoint quadrature.
double objective(const GridFunction& u, const ExtremalProblem& prob);

/// u / ||grad u||_p(x).
GridFunction project_to_unit_ball(const GridFunction& u, const ExponentField& p);

/// Preconditioned projected ascent with multi-start. See README for the method.
ExtremalRecord solve(const ExtremalProblem& prob, const SolverOptions& opts = {});

/// ||grad u||_p / ||u||_(q-eps) for a computed extremal.
double quotient_constant(const ExtremalRecord& record, const ExtremalProblem& prob);
double quotient_constant(const ExtremalProblem& prob, const SolverOptions& opts = {});

}  // namespace vexlab
