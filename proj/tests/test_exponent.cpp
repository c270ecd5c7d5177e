#include <cmath>

#include "doctest.h"
#include "vexlab/exponent.hpp"

using namespace vexlab;

TEST_CASE("bounds") {
  const Grid g = Grid::interval(0.0, 1.0, 4);
  CHECK(bounds(ExponentField::constant(g, 2.0)) == std::pair{2.0, 2.0});
  const auto p = sample_exponent(FieldSpec::parse("affine(1.5, 0.2)"), g);
  CHECK(bounds(p).first == doctest::Approx(1.525));
  CHECK(bounds(p).second == doctest::Approx(1.675));
  CHECK(p.declared_lo() == bounds(p).first);
  CHECK(p.declared_hi() == bounds(p).second);

  try {
    ExponentField(g, {2.0, 1.0, 2.0, 2.0});
    FAIL("accepted an exponent equal to 1");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidExponent);
  }
  CHECK_THROWS_AS(ExponentField(g, {2.0, 0.5, 2.0, 2.0}), Error);
  CHECK_THROWS_AS(ExponentField(g, {2.0, 2.0, 2.0}), Error);
  CHECK_THROWS_AS(ExponentField(g, {2.0, 3.0, 2.0, 2.0}, 1.5, 2.5), Error);
  CHECK_NOTHROW(ExponentField(g, {2.0, 2.2, 2.0, 2.0}, 1.5, 2.5));
}

TEST_CASE("sobolev conjugate") {
  const Grid g2 = Grid::rectangle({0, 0}, {1, 1}, 3, 3);
  const auto s2 = sobolev_conjugate(ExponentField::constant(g2, 1.5), 2);
  for (double v : s2.values()) CHECK(v == doctest::Approx(6.0));
  const auto s3 = sobolev_conjugate(ExponentField::constant(g2, 2.0), 3);
  for (double v : s3.values()) CHECK(v == doctest::Approx(6.0));
  const Grid g1 = Grid::interval(0.0, 1.0, 5);
  const auto s1 = sobolev_conjugate(ExponentField::constant(g1, 2.0), 1);
  for (double v : s1.values()) CHECK(v == kInfiniteExponent);

  // Monotone in p.
  double prev = 0.0;
  for (double p = 1.05; p < 2.0; p += 0.1) {
    const double v = sobolev_conjugate(ExponentField::constant(g2, p), 2)[0];
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("log-Hoelder modulus") {
  const Grid g = Grid::interval(0.0, 1.0, 10);
  CHECK(log_hoelder_modulus(ExponentField::constant(g, 3.0)) == 0.0);

  const Grid two = Grid::interval(0.0, 0.5, 2);  // centers 0.125 and 0.375
  CHECK(log_hoelder_modulus(ExponentField(two, {2.0, 3.0})) == doctest::Approx(std::abs(std::log(0.25))));

  // p = 2 + x: brute force over all pairs at distance < 1/2.
  const Grid fine = Grid::interval(0.0, 1.0, 100);
  const auto p = sample_exponent(FieldSpec::parse("affine(2, 1)"), fine);
  double best = 0.0;
  for (std::size_t a = 0; a < 100; ++a)
    for (std::size_t b = 0; b < 100; ++b) {
      const double d = std::abs(fine.cell_center(a)[0] - fine.cell_center(b)[0]);
      if (d > 0 && d < 0.5) best = std::max(best, std::abs((p[a] - p[b]) * std::log(d)));
    }
  CHECK(log_hoelder_modulus(p) == doctest::Approx(best));
  CHECK(0.01 * std::abs(std::log(0.01)) == doctest::Approx(0.0461).epsilon(1e-3));
  CHECK(log_hoelder_modulus(p) >= 0.0461);
}

TEST_CASE("critical set") {
  const Grid g = Grid::rectangle({0, 0}, {1, 1}, 8, 8);
  const auto p = ExponentField::constant(g, 1.5);
  const auto all = critical_set(p, ExponentField::constant(g, 6.0), 2, 1e-6);
  CHECK(all.cells.size() == g.cell_count());
  CHECK(critical_set(p, ExponentField::constant(g, 5.0), 2, 1e-6).empty());

  // q = 6 - |x - x0| with x0 a cell center; tol = h picks cells within h of x0.
  const Point x0 = g.cell_center(g.cell_at(3, 4));
  const auto q = sample_exponent(FieldSpec::parse("radial(6, -1, " + std::to_string(x0[0]) + ", " +
                                                  std::to_string(x0[1]) + ")"),
                                 g);
  const double h = g.spacing(0);
  const auto crit = critical_set(p, q, 2, h);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    CHECK(crit.gap[c] >= -h);
    CHECK(crit.contains(c) == (g.distance(g.cell_center(c), x0) <= h + 1e-12));
  }
  CHECK(crit.cells.size() == 5);

  try {
    critical_set(p, ExponentField::constant(g, 6.5), 2, 1e-6);
    FAIL("supercritical q accepted");
  } catch (const SupercriticalExponentError& e) {
    CHECK(e.kind() == ErrorKind::SupercriticalExponent);
    CHECK(e.cell() == 0);
  }
  CHECK_THROWS_AS(critical_set(p, p, 2, 0.0), Error);
}

TEST_CASE("critical set is invariant under relabeling") {
  // Mirror the exponents left-right; the critical set mirrors with them.
  const Grid g = Grid::interval(0.0, 1.0, 20);
  std::vector<double> pv(20), qv(20);
  for (int i = 0; i < 20; ++i) {
    pv[i] = 1.2 + 0.01 * i;
    qv[i] = i % 3 == 0 ? 50.0 : 10.0;  // p* is infinite in 1D: never critical
  }
  const auto a = critical_set(ExponentField(g, pv), ExponentField(g, qv), 1, 1e-6);
  CHECK(a.empty());
  const Grid g2 = Grid::rectangle({0, 0}, {1, 1}, 4, 4);
  std::vector<double> p2(16), q2(16), p2r(16), q2r(16);
  for (int c = 0; c < 16; ++c) {
    p2[c] = 1.5;
    q2[c] = c % 5 == 0 ? 6.0 : 5.0;
  }
  for (int c = 0; c < 16; ++c) {
    p2r[15 - c] = p2[c];
    q2r[15 - c] = q2[c];
  }
  const auto b = critical_set(ExponentField(g2, p2), ExponentField(g2, q2), 2, 1e-6);
  const auto br = critical_set(ExponentField(g2, p2r), ExponentField(g2, q2r), 2, 1e-6);
  REQUIRE(b.cells.size() == br.cells.size());
  for (std::size_t c : b.cells) CHECK(br.contains(15 - c));
}

TEST_CASE("field constructors") {
  const Grid g = Grid::rectangle({0, 0}, {1, 1}, 4, 4);
  for (const char* text : {"constant(2.5)", "affine(1.5, 0.25)", "radial(2, 0.5, 0.25, 0.75)",
                           "piecewise(2; 0 0.5 0 0.5 = 3; 0.5 1 0.5 1 = 4)"}) {
    const FieldSpec f = FieldSpec::parse(text);
    const FieldSpec back = FieldSpec::parse(f.to_string());
    for (std::size_t c = 0; c < g.cell_count(); ++c)
      CHECK(f.evaluate(g.cell_center(c), 2) == back.evaluate(g.cell_center(c), 2));
  }
  const FieldSpec pw = FieldSpec::parse("piecewise(4; 0 0.5 = 2)");
  CHECK(pw.evaluate({0.25, 0}, 1) == 2.0);
  CHECK(pw.evaluate({0.75, 0}, 1) == 4.0);
  CHECK(FieldSpec::parse("radial(1, 2, 0)").evaluate({0.5, 0}, 1) == doctest::Approx(2.0));
  for (const char* bad : {"constant()", "constant(a)", "affine(1)", "cubic(1)", "piecewise(2; 0 = 1)", "constant 2"}) {
    try {
      FieldSpec::parse(bad);
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ParseError);
    }
  }
}

TEST_CASE("shift and conjugate") {
  const Grid g = Grid::interval(0.0, 1.0, 4);
  const auto p = ExponentField::constant(g, 3.0);
  CHECK(p.shifted(-0.5)[2] == 2.5);
  CHECK(p.conjugate()[1] == doctest::Approx(1.5));
  CHECK_THROWS_AS(p.shifted(-2.5), Error);
}
