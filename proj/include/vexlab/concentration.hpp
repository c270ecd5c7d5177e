#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vexlab/exponent.hpp"
#include "vexlab/extremal.hpp"
#include "vexlab/grid.hpp"

namespace vexlab {

/// Cell whose center is nearest to x (x clamped into the domain).
std::size_t cell_containing(const Grid& grid, const Point& x);

// ---------------------------------------------------------------------------
// Limits of sequences

struct Extrapolation {
  double limit = 0.0;
  bool fitted = false;  // false: fell back to the last value
  double rate = 0.0;    // exponent c of the model a + b x^c
};

/// Fits y = a + b x^c through the last three points (x strictly decreasing,
/// x >= 0) and returns a. Falls back to the last y when fewer than three
/// points are given or the successive differences admit no rate in
/// [0.1, 20].
Extrapolation extrapolate_limit(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Compactness / concentration dichotomy

enum class Classification { Compact, Concentrating, Undecided };
const char* to_string(Classification c);

struct DichotomyThresholds {
  double concentration = 0.9;
  double compactness = 0.05;
};

/// Cell of max |u| at cell midpoints (lowest index on ties).
std::size_t argmax_cell(const GridFunction& u);

/// Fraction of the gradient energy within r of the argmax cell.
double concentration_ratio(const GridFunction& u, const ExponentField& p, double r);

struct DichotomyResult {
  Classification classification = Classification::Undecided;
  double conc_ratio = 0.0;
  double difference_modular = 0.0;  // rho_q(u_last - u_prev), signs aligned
  double last_objective = 0.0;
  double radius = 0.0;
  std::vector<std::size_t> argmax_cells;  // last three records, oldest first
  std::optional<std::size_t> concentration_point;
  DichotomyThresholds thresholds;
};

DichotomyResult classify_dichotomy(std::span<const ExtremalRecord> records, const ExponentField& p,
                                   const ExponentField& q, double r, const CriticalSetReport& crit,
                                   const DichotomyThresholds& thresholds = {});

// ---------------------------------------------------------------------------
// Epsilon sweeps

struct SweepOptions {
  double radius = 0.0;  // dichotomy radius; 0 picks max(0.1 diam, 2 h)
  DichotomyThresholds thresholds;
};

struct SweepEntry {
  double eps = 0.0;
  std::optional<ExtremalRecord> record;
  bool failed = false;
  std::string error;
  double conc_ratio = 0.0;
  std::size_t argmax_cell = 0;
};

struct SweepReport {
  std::vector<double> schedule;
  std::vector<SweepEntry> entries;
  Extrapolation limit;
  DichotomyResult dichotomy;
  CriticalSetReport critical;
};

/// Solves the family at every eps of a strictly decreasing schedule, warm
/// starting each solve from the previous extremal. A failed eps is recorded
/// and the sweep continues.
SweepReport run_sweep(const ExtremalProblem& family, std::span<const double> schedule, const SolverOptions& opts,
                      const SweepOptions& sweep = {});

// ---------------------------------------------------------------------------
// Localized constants

struct LocalizedEntry {
  double radius = 0.0;
  double value = 0.0;     // sup over the ball's unit ball of int |u|^(q - eps)
  double quotient = 0.0;  // ||grad u|| / ||u||_(q - eps) of the same extremal
  ExtremalRecord record;
};

struct LocalizedResult {
  Point center{0.0, 0.0};
  std::vector<LocalizedEntry> entries;  // in the order of the given radii
  Extrapolation extrapolation;
};

/// Solves the extremal problem on B_r(center) ∩ Ω for each radius of a
/// strictly decreasing list. Balls are solved from small to large and each
/// smaller-ball extremal seeds the next larger ball.
LocalizedResult localized_constant(const ExponentField& p, const ExponentField& q, const Point& center,
                                   std::span<const double> radii, double eps, const SolverOptions& opts);

struct SoblocCheck {
  double lhs = 0.0;  // extrapolated modular-form constant
  double rhs = 0.0;  // extrapolated quotient-form constant raised to -q(center)
  double rel_gap = 0.0;
  double lhs_finest = 0.0;
  double rhs_finest = 0.0;
  double rel_gap_finest = 0.0;
  LocalizedResult localized;
};

/// Compares the two localized constants linked by S~_x^-1 = S̄_x^(-q(x)).
SoblocCheck check_sobloc_identity(const ExponentField& p, const ExponentField& q, const Point& center,
                                  std::span<const double> radii, const SolverOptions& opts);

// ---------------------------------------------------------------------------
// Bubbles

enum class BubbleProfile { SmoothCompact, Tent };

/// phi(|y|): exp(1/(|y|^2 - 1/4)) or (1/2 - |y|) on |y| < 1/2, else 0.
double bubble_profile(BubbleProfile profile, double r);

/// eps^(-(n - p0)/p0) phi((x - center)/eps) at the interior nodes.
GridFunction bubble_shape(const Grid& grid, const Point& center, double eps, double p_center,
                          BubbleProfile profile);

/// t * bubble_shape with t chosen so that the gradient energy equals target_mass.
GridFunction make_bubble(const Point& center, double eps, const ExponentField& p, double target_mass,
                         BubbleProfile profile = BubbleProfile::SmoothCompact);

/// Near-extremal of the ball problem on B_(eps/2)(center), rescaled to
/// carry gradient energy target_mass.
GridFunction make_extremal_bubble(const Point& center, double eps, const ExponentField& p, const ExponentField& q,
                                  double target_mass, const SolverOptions& opts);

struct Atom {
  Point center{0.0, 0.0};
  double mass = 0.0;
};

/// Sum of make_bubble(x_i, eps, p, mu_i); the supports must be disjoint and
/// the masses must sum to less than 1.
GridFunction make_multi_bubble(std::span<const Atom> atoms, double eps, const ExponentField& p,
                               BubbleProfile profile = BubbleProfile::SmoothCompact);
GridFunction make_multi_extremal_bubble(std::span<const Atom> atoms, double eps, const ExponentField& p,
                                        const ExponentField& q, const SolverOptions& opts);

/// Rescales u so that its gradient energy equals target_mass.
GridFunction scale_to_energy(const GridFunction& u, const ExponentField& p, double target_mass);

// ---------------------------------------------------------------------------
// Atoms and the limit functional

struct AtomicDecomposition {
  struct Entry {
    std::size_t cell = 0;
    double mass = 0.0;
  };
  std::vector<Entry> atoms;
  double diffuse_mass = 0.0;
  double atom_radius = 0.0;
  double threshold = 0.0;  // absolute mass threshold
};

/// Greedy atom extraction: cells by descending mass seed a ball of
/// atom_radius; balls holding >= threshold_fraction of the total become
/// atoms and exclude seeds within 2 atom_radius.
AtomicDecomposition detect_atoms(const DiscreteMeasure& m, double atom_radius, double threshold_fraction = 0.25);

/// F_eps(u) = int |u|^(q - eps).
double eval_F_eps(const GridFunction& u, double eps, const ExponentField& q);

/// F*(u, mu) = int |u|^q + sum mu_i^(p*_i/p_i) S̄_i^(-p*_i); `localized`
/// maps atom cells to S̄.
double eval_F_star(const GridFunction& u, const AtomicDecomposition& atoms, const ExponentField& p,
                   const ExponentField& q, const std::map<std::size_t, double>& localized);

/// S̄_x from S~_x^-1 via S̄ = (S~_x^-1)^(-1/q(x)).
double quotient_from_modular_constant(double modular_constant, double q_at_x);

// ---------------------------------------------------------------------------
// Existence criterion

struct SufficientConditionOptions {
  int samples = 4;               // critical cells probed
  std::vector<double> radii;     // strictly decreasing, per sample
  double margin = 0.02;
  double inclusion_slack = 5e-3;
};

struct SufficientConditionReport {
  double sup_local = 0.0;
  double global = 0.0;
  bool strict = false;     // sup_local < global (1 - margin)
  bool inclusion = false;  // every local value <= global (1 + slack)
  std::vector<std::pair<std::size_t, double>> samples;  // (cell, extrapolated local constant)
};

SufficientConditionReport check_sufficient_condition(const ExponentField& p, const ExponentField& q,
                                                     const CriticalSetReport& crit, double global_value,
                                                     const SufficientConditionOptions& options,
                                                     const SolverOptions& opts);

}  // namespace vexlab
