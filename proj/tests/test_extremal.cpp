#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "vexlab/concentration.hpp"
#include "vexlab/extremal.hpp"
#include "vexlab/modular.hpp"
#include "vexlab/rng.hpp"

using namespace vexlab;

namespace {

constexpr double kPi = std::numbers::pi;

ExtremalProblem eigen_problem(int n, double eps = 0.0) {
  const Grid g = Grid::interval(0.0, 1.0, n);
  return {ExponentField::constant(g, 2.0), ExponentField::constant(g, 2.0), eps};
}

ExtremalProblem critical_2d(int n, double eps) {
  const Grid g = Grid::rectangle({0, 0}, {1, 1}, n, n);
  return {ExponentField::constant(g, 1.5), ExponentField::constant(g, 6.0), eps};
}

GridFunction random_function(const Grid& g, std::uint64_t seed, double scale) {
  Rng rng(seed);
  GridFunction u(g);
  for (double& v : u.values()) v = scale * rng.uniform(-1.0, 1.0);
  return u;
}

}  // namespace

TEST_CASE("objective") {
  const ExtremalProblem prob = eigen_problem(32);
  CHECK(objective(GridFunction(prob.grid()), prob) == 0.0);

  const Grid g = Grid::rectangle({0, 0}, {1, 1}, 8, 8);
  const auto p = sample_exponent(FieldSpec::parse("affine(1.6, 0.2)"), g);
  const auto q = sample_exponent(FieldSpec::parse("radial(3, 1, 0.5, 0.5)"), g);
  const GridFunction u = random_function(g, 4, 1.0);
  CHECK(objective(u, ExtremalProblem(p, q, 0.0)) == doctest::Approx(modular(u, q)).epsilon(1e-14));

  // |u| <= 1: nondecreasing in eps.
  double last = 0.0;
  for (double eps : {0.0, 0.1, 0.3, 0.6, 1.0}) {
    const double v = objective(u, ExtremalProblem(p, q, eps));
    CHECK(v >= last);
    last = v;
  }
  CHECK(objective(-1.0 * u, ExtremalProblem(p, q, 0.2)) == objective(u, ExtremalProblem(p, q, 0.2)));
}

TEST_CASE("problem validation") {
  const Grid g = Grid::interval(0.0, 1.0, 16);
  const auto p = ExponentField::constant(g, 2.0);
  try {
    ExtremalProblem(p, ExponentField::constant(g, 1.5), 0.6);
    FAIL("accepted q - eps < 1");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InfeasibleProblem);
  }
  CHECK_THROWS_AS(ExtremalProblem(p, p, -0.1), Error);

  // Critical flag: only at eps = 0 and only when the critical set is hit.
  CHECK(critical_2d(8, 0.0).critical());
  CHECK_FALSE(critical_2d(8, 0.1).critical());
  CHECK_FALSE(ExtremalProblem(p, p, 0.0).critical());
  CHECK(critical_2d(8, 0.1).with_eps(0.0).critical());
}

TEST_CASE("project_to_unit_ball") {
  const Grid g = Grid::interval(0.0, 1.0, 64);
  const auto p = ExponentField::constant(g, 2.0);
  const GridFunction hat = interpolate(g, [](const Point& x) { return 3.0 * (1.0 - std::abs(2.0 * x[0] - 1.0)); });
  const GridFunction unit = project_to_unit_ball(hat, p);
  // ||u'||_2 = 2 a, so the projected height is a / (2 a) = 1/2.
  CHECK(unit.max_abs() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gradient_norm(unit, p) == doctest::Approx(1.0).epsilon(1e-10));

  const GridFunction again = project_to_unit_ball(unit, p);
  const GridFunction scaled = project_to_unit_ball(7.5 * hat, p);
  for (std::size_t n = 0; n < unit.size(); ++n) {
    CHECK(again.values()[n] == doctest::Approx(unit.values()[n]).epsilon(1e-10));
    CHECK(scaled.values()[n] == doctest::Approx(unit.values()[n]).epsilon(1e-10));
  }

  const Grid g2 = Grid::rectangle({0, 0}, {1, 1}, 10, 10);
  const auto pv = sample_exponent(FieldSpec::parse("affine(1.4, 1)"), g2);
  CHECK(gradient_norm(project_to_unit_ball(random_function(g2, 9, 30.0), pv), pv) ==
        doctest::Approx(1.0).epsilon(1e-10));

  try {
    project_to_unit_ball(GridFunction(g), p);
    FAIL("normalized zero");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroFunction);
  }
}

TEST_CASE("eigenvalue oracle") {
  const ExtremalProblem prob = eigen_problem(512);
  const ExtremalRecord rec = solve(prob);
  CHECK(rec.converged);
  CHECK_FALSE(rec.critical);
  CHECK(rec.objective == doctest::Approx(1.0 / (kPi * kPi)).epsilon(0.01));
  CHECK(rec.objective == doctest::Approx(0.10132054786).epsilon(1e-8));
  CHECK(std::abs(rec.grad_norm - 1.0) <= 1e-8);
  CHECK(rec.restarts_used == 4);
  CHECK(rec.restart_objectives.size() == 4);

  for (std::size_t k = 1; k < rec.trace.size(); ++k) CHECK(rec.trace[k] >= rec.trace[k - 1]);

  // L2 distance to sin(pi x) sqrt(2)/pi, the unit-gradient eigenfunction.
  const Grid& g = prob.grid();
  const GridFunction s = interpolate(g, [](const Point& x) { return std::sqrt(2.0) / kPi * std::sin(kPi * x[0]); });
  double dot = 0.0;
  for (std::size_t n = 0; n < s.size(); ++n) dot += s.values()[n] * rec.u.values()[n];
  const GridFunction aligned = (dot < 0 ? -1.0 : 1.0) * rec.u;
  const auto p2 = ExponentField::constant(g, 2.0);
  const double dist = luxemburg_norm(aligned - s, p2).value / luxemburg_norm(s, p2).value;
  CHECK(dist < 0.02);

  const double quotient = quotient_constant(rec, prob);
  CHECK(quotient == doctest::Approx(kPi).epsilon(0.01));
  CHECK(std::pow(quotient, -2.0) == doctest::Approx(rec.objective).epsilon(1e-9));

  const ExtremalRecord fine = solve(eigen_problem(1024));
  CHECK(std::abs(fine.objective - rec.objective) < 0.005 * rec.objective);
  CHECK(std::abs(quotient_constant(fine, eigen_problem(1024)) - quotient) < 0.005 * quotient);
}

TEST_CASE("quotient identity at constant exponents") {
  const Grid g = Grid::rectangle({0, 0}, {1, 1}, 12, 12);
  const ExtremalProblem prob(ExponentField::constant(g, 1.8), ExponentField::constant(g, 3.0), 0.4);
  const ExtremalRecord rec = solve(prob);
  CHECK(std::pow(quotient_constant(rec, prob), -2.6) == doctest::Approx(rec.objective).epsilon(1e-9));
  CHECK(quotient_constant(prob) == doctest::Approx(quotient_constant(rec, prob)).epsilon(1e-12));
}

TEST_CASE("warm start is a fixed point") {
  const Grid g = Grid::rectangle({0, 0}, {1, 1}, 16, 16);
  const auto p = sample_exponent(FieldSpec::parse("affine(1.7, 0.3)"), g);
  const auto q = sample_exponent(FieldSpec::parse("affine(3, 0.5)"), g);
  const ExtremalProblem prob(p, q, 0.1);
  const ExtremalRecord first = solve(prob);

  SolverOptions opts;
  opts.restarts = 0;
  opts.warm_starts = {first.u};
  const ExtremalRecord again = solve(prob, opts);
  CHECK(again.converged);
  CHECK(again.iterations <= opts.patience);
  CHECK(again.objective == doctest::Approx(first.objective).epsilon(1e-8));

  opts.warm_starts = {-1.0 * first.u};
  CHECK(solve(prob, opts).objective == doctest::Approx(first.objective).epsilon(1e-8));
}

TEST_CASE("solver determinism and threads") {
  const ExtremalProblem prob = critical_2d(12, 0.5);
  SolverOptions one;
  SolverOptions four;
  four.threads = 4;
  const ExtremalRecord a = solve(prob, one);
  const ExtremalRecord b = solve(prob, four);
  CHECK(a.objective == b.objective);
  CHECK(a.best_restart == b.best_restart);
  for (std::size_t n = 0; n < a.u.size(); ++n) CHECK(a.u.values()[n] == b.u.values()[n]);
}

TEST_CASE("solver failure and bad options") {
  const ExtremalProblem prob = eigen_problem(64);
  SolverOptions opts;
  opts.max_iters = 1;
  try {
    solve(prob, opts);
    FAIL("converged in one iteration");
  } catch (const SolverFailure& e) {
    CHECK(e.kind() == ErrorKind::NonConvergence);
    CHECK(e.best().objective > 0.0);
    CHECK_FALSE(e.best().converged);
  }
  SolverOptions none;
  none.restarts = 0;
  CHECK_THROWS_AS(solve(prob, none), Error);
  SolverOptions bad;
  bad.patience = 0;
  CHECK_THROWS_AS(solve(prob, bad), Error);
}

TEST_CASE("masked solve stays on the ball") {
  const Grid g = Grid::rectangle({0, 0}, {1, 1}, 24, 24);
  const auto p = ExponentField::constant(g, 2.0);
  const CellMask ball = restrict_to_ball(g, {0.5, 0.5}, 0.3);
  const ExtremalProblem prob(p, ExponentField::constant(g, 3.0), 0.0, ball);
  const ExtremalRecord rec = solve(prob);
  const CellField mag = gradient_magnitude(rec.u);
  for (std::size_t c = 0; c < g.cell_count(); ++c)
    if (!ball[c]) CHECK(mag[c] == 0.0);
  CHECK(rec.objective < solve(ExtremalProblem(p, ExponentField::constant(g, 3.0), 0.0)).objective);
}

TEST_CASE("critical 2D sweep golden values" * doctest::timeout(300)) {
  // p = 1.5, q = 6 on the unit square at 32 x 32, warm-started sweep.
  const std::vector<double> schedule{0.5, 0.25, 0.125};
  SolverOptions opts;
  opts.threads = 4;
  const SweepReport rep = run_sweep(critical_2d(32, 0.0), schedule, opts);
  REQUIRE(rep.entries.size() == 3);
  const double golden[] = {0.003100407966, 0.0027979322, 0.002668555223};
  for (int k = 0; k < 3; ++k) {
    REQUIRE(rep.entries[k].record.has_value());
    CHECK(rep.entries[k].record->converged);
    CHECK(rep.entries[k].record->objective == doctest::Approx(golden[k]).epsilon(1e-6));
  }
  // Cauchy differences decrease.
  const double d1 = rep.entries[0].record->objective - rep.entries[1].record->objective;
  const double d2 = rep.entries[1].record->objective - rep.entries[2].record->objective;
  CHECK(std::abs(d2) < std::abs(d1));
}
