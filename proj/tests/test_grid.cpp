#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vexlab/exponent.hpp"
#include "vexlab/grid.hpp"
#include "vexlab/modular.hpp"
#include "vexlab/rng.hpp"

using namespace vexlab;

namespace {

GridFunction random_function(const Grid& g, std::uint64_t seed) {
  Rng rng(seed);
  GridFunction u(g);
  for (double& v : u.values()) v = rng.uniform(-1.0, 1.0);
  return u;
}

}  // namespace

TEST_CASE("grid construction") {
  const Grid g = Grid::rectangle({0, 0}, {2, 1}, 4, 2);
  CHECK(g.cell_count() == 8);
  CHECK(g.interior_node_count() == 3);
  CHECK(g.spacing(0) == doctest::Approx(0.5));
  CHECK(g.cell_volume() == doctest::Approx(0.25));
  CHECK(g.cell_at(1, 1) == 5);  // x-fastest
  CHECK_THROWS_AS(Grid::interval(0, 1, 1), Error);
  CHECK_THROWS_AS(Grid::interval(1, 0, 4), Error);
}

TEST_CASE("gradient of the linear interpolant") {
  const Grid g = Grid::interval(0.0, 1.0, 16);
  const GridFunction u = interpolate(g, [](const Point& x) { return x[0]; });
  const CellGradient d = gradient(u);
  // The last cell sees the boundary clamp u(1) = 0.
  for (std::size_t c = 0; c + 1 < g.cell_count(); ++c) CHECK(d.components[c][0] == doctest::Approx(1.0));
  CHECK(d.components.back()[0] < 0.0);
}

TEST_CASE("2D gradient matches the analytic derivative away from the boundary") {
  for (int n : {8, 16, 32}) {
    const Grid g = Grid::rectangle({0, 0}, {1, 1}, n, n);
    const GridFunction u = interpolate(g, [](const Point& x) { return x[0] * x[1]; });
    const CellGradient d = gradient(u);
    const CellField mag = gradient_magnitude(u);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      const auto [i, j] = g.cell_index(c);
      if (i == 0 || j == 0 || i == n - 1 || j == n - 1) continue;
      const Point x = g.cell_center(c);
      CHECK(d.components[c][0] == doctest::Approx(x[1]).epsilon(1e-12));
      CHECK(d.components[c][1] == doctest::Approx(x[0]).epsilon(1e-12));
      // RMS of edge differences: exact up to O(h) on bilinear data.
      CHECK(std::abs(mag[c] - std::hypot(x[0], x[1])) <= g.spacing(0));
    }
  }
}

TEST_CASE("gradient of zero, linearity") {
  const Grid g = Grid::rectangle({0, 0}, {1, 1}, 6, 5);
  const GridFunction zero(g);
  for (const auto& v : gradient(zero).components) CHECK((v[0] == 0.0 && v[1] == 0.0));
  const GridFunction u = random_function(g, 1);
  const GridFunction v = random_function(g, 2);
  const GridFunction w = 2.5 * u + (-0.75) * v;
  const auto du = gradient(u).components;
  const auto dv = gradient(v).components;
  const auto dw = gradient(w).components;
  for (std::size_t c = 0; c < dw.size(); ++c)
    for (int a = 0; a < 2; ++a) CHECK(dw[c][a] == doctest::Approx(2.5 * du[c][a] - 0.75 * dv[c][a]).epsilon(1e-13));
}

TEST_CASE("checkerboard mode carries gradient energy") {
  const Grid g = Grid::rectangle({0, 0}, {1, 1}, 8, 8);
  const GridFunction u = interpolate(g, [&](const Point& x) {
    const int i = static_cast<int>(std::lround(x[0] * 8));
    const int j = static_cast<int>(std::lround(x[1] * 8));
    return (i + j) % 2 == 0 ? 1.0 : -1.0;
  });
  // Axis averages cancel away from the boundary clamp.
  const CellGradient d = gradient(u);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto [i, j] = g.cell_index(c);
    if (i == 0 || j == 0 || i == 7 || j == 7) continue;
    CHECK(std::hypot(d.components[c][0], d.components[c][1]) < 1e-12);
  }
  const CellField mag = gradient_magnitude(u);
  for (std::size_t c = 0; c < mag.size(); ++c) CHECK(mag[c] > 0.0);
}

TEST_CASE("energy measure") {
  const Grid g = Grid::interval(0.0, 1.0, 8);
  const auto p = ExponentField::constant(g, 2.0);
  CHECK(energy_measure(GridFunction(g), p).total_mass() == 0.0);

  // Hat of height h at node 3: only cells 2 and 3 carry mass.
  GridFunction hat(g);
  hat.values()[g.node_storage(3)] = g.spacing(0);
  const DiscreteMeasure m = energy_measure(hat, p);
  for (std::size_t c = 0; c < m.masses().size(); ++c) {
    if (c == 2 || c == 3)
      CHECK(m.masses()[c] == doctest::Approx(g.cell_volume()));
    else
      CHECK(m.masses()[c] == 0.0);
  }

  const Grid g2 = Grid::rectangle({0, 0}, {1, 1}, 7, 9);
  const ExponentField p2 = sample_exponent(FieldSpec::parse("radial(1.4, 1.2, 0.3, 0.6)"), g2);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const GridFunction u = random_function(g2, s);
    CHECK(energy_measure(u, p2).total_mass() == doctest::Approx(modular(gradient_magnitude(u), p2)).epsilon(1e-14));
  }
}

TEST_CASE("energy converges at first order under refinement") {
  // u = sin(pi x), p = 2: int |u'|^2 = pi^2 / 2.
  const double exact = std::numbers::pi * std::numbers::pi / 2.0;
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const Grid g = Grid::interval(0.0, 1.0, n);
    const GridFunction u = interpolate(g, [](const Point& x) { return std::sin(std::numbers::pi * x[0]); });
    const double err = std::abs(energy_measure(u, ExponentField::constant(g, 2.0)).total_mass() - exact);
    if (prev > 0.0) CHECK(err < 0.6 * prev);
    prev = err;
  }
}

TEST_CASE("mass_in_ball") {
  const Grid g = Grid::rectangle({0, 0}, {1, 1}, 10, 10);
  const GridFunction u = random_function(g, 3);
  const DiscreteMeasure m = energy_measure(u, ExponentField::constant(g, 1.7));
  CHECK(mass_in_ball(m, {0.5, 0.5}, 2.0) == doctest::Approx(m.total_mass()));
  CHECK(mass_in_ball(m, g.cell_center(37), 0.4 * g.spacing(0)) == doctest::Approx(m.masses()[37]));
  double last = 0.0;
  for (double r : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double v = mass_in_ball(m, {0.3, 0.6}, r);
    CHECK(v >= last);
    last = v;
  }

  std::vector<double> dirac(g.cell_count(), 0.0);
  dirac[42] = 3.0;
  const DiscreteMeasure d(g, dirac);
  CHECK(mass_in_ball(d, g.cell_center(42), 0.15) == doctest::Approx(3.0));
  CHECK(mass_in_ball(d, {0.9, 0.1}, 0.15) == 0.0);
  CHECK_THROWS_AS(DiscreteMeasure(g, std::vector<double>(g.cell_count(), -1.0)), Error);
}

TEST_CASE("restrict_to_ball") {
  const Grid g = Grid::interval(0.0, 1.0, 8);
  const CellMask m = restrict_to_ball(g, {0.5, 0.0}, 0.25);
  // Centers 0.3125 .. 0.6875: cells 2..5 counted from zero.
  for (std::size_t c = 0; c < 8; ++c) CHECK(m[c] == (c >= 2 && c <= 5));
  CHECK(restrict_to_ball(g, {0.5, 0.0}, 1.0).is_full());
  CHECK_THROWS_AS(restrict_to_ball(g, {0.5, 0.0}, 0.2), Error);

  const Grid g2 = Grid::rectangle({0, 0}, {1, 1}, 16, 16);
  const CellMask outside = restrict_to_ball(g2, {1.1, 0.5}, 0.3);
  CHECK(outside.count() > 0);
  CHECK(outside.count() < restrict_to_ball(g2, {0.5, 0.5}, 0.3).count());

  // Nodes on the ball's rim are pinned to zero.
  const GridFunction one = interpolate(g2, [](const Point&) { return 1.0; });
  const CellMask ball = restrict_to_ball(g2, {0.5, 0.5}, 0.25);
  const GridFunction r = restrict_to_mask(one, ball);
  const auto active = ball.active_nodes();
  std::size_t nonzero = 0;
  for (double v : r.values()) nonzero += v != 0.0;
  CHECK(nonzero == active.size());
  CHECK(gradient_magnitude(r).values().size() == g2.cell_count());
  for (std::size_t c = 0; c < g2.cell_count(); ++c)
    if (!ball[c]) CHECK(gradient_magnitude(r)[c] == 0.0);
}

TEST_CASE("grid mismatch") {
  const Grid a = Grid::interval(0.0, 1.0, 8);
  const Grid b = Grid::interval(0.0, 1.0, 16);
  CHECK_THROWS_AS(modular(GridFunction(a), ExponentField::constant(b, 2.0)), Error);
  try {
    require_same_grid(a, b);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridMismatch);
  }
}
