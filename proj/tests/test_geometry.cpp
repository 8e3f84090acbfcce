#include <doctest.h>

#include <cmath>
#include <random>

#include "arcbeam/geometry.hpp"

using namespace arcbeam;

namespace {

constexpr double kPi = 3.14159265358979323846;

// finite-difference arc-length constraint residual at a smooth point
double constraint_residual(const InitialShape& s, double x, double step) {
  const double up = (s.u_s0(x + step) - s.u_s0(x - step)) / (2.0 * step);
  const double wp = (s.w_s0(x + step) - s.w_s0(x - step)) / (2.0 * step);
  return std::abs((1.0 + up) * (1.0 + up) + wp * wp - 1.0);
}

double curvature_gap(const InitialShape& s, double x, double step) {
  const double phip = (s.phi0(x + step) - s.phi0(x - step)) / (2.0 * step);
  return std::abs(phip - s.kappa0(x));
}

// lhs of the parabola arc-length relation, used as an independent oracle
double parabola_lhs(double a, double s) {
  const double t = a * s;
  return t * std::sqrt(1.0 + t * t) + std::asinh(t);
}

double bisect_parabola_u(double a, double x) {
  double lo = 0.0, hi = x;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (parabola_lhs(a, mid) - 2.0 * a * x < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi) - x;
}

InitialShape spring_shape() {
  const double seg = 0.15713484026367722;  // chord length 1 for the 10-segment spring
  std::vector<std::pair<double, double>> segs;
  segs.emplace_back(seg / 2.0, 0.0);
  for (int i = 0; i < 4; ++i) {
    segs.emplace_back(seg, -kPi / 2.0);
    segs.emplace_back(seg, 0.0);
  }
  segs.emplace_back(seg / 2.0, -kPi / 2.0);
  return InitialShape::zigzag(segs);
}

}  // namespace

TEST_CASE("circle closed forms") {
  const auto s = InitialShape::circle(1.0, 2.0 * kPi);
  CHECK(s.phi0(kPi / 2.0) == doctest::Approx(kPi / 2.0).epsilon(1e-15));
  CHECK(s.u_s0(kPi / 2.0) == doctest::Approx(1.0 - kPi / 2.0).epsilon(1e-15));
  CHECK(s.w_s0(kPi / 2.0) == doctest::Approx(-1.0).epsilon(1e-15));
  // full loop closes
  CHECK(s.phi0(2.0 * kPi) == doctest::Approx(2.0 * kPi));
  CHECK(s.u_s0(2.0 * kPi) == doctest::Approx(-2.0 * kPi));
  CHECK(std::abs(s.w_s0(2.0 * kPi)) < 1e-14);
}

TEST_CASE("circle constraint residual at machine level") {
  const double R = 2.935;
  const auto s = InitialShape::circle(1.0 / R, R * 2.748893571891069);
  CHECK(constraint_residual(s, s.length() / 2.0, 1e-6 * s.length()) < 1e-10);
}

TEST_CASE("arc-length constraint and curvature consistency for all shape kinds") {
  std::vector<InitialShape> shapes;
  shapes.push_back(InitialShape::straight(3.0));
  shapes.push_back(InitialShape::circle(-0.25, 10.0));
  shapes.push_back(InitialShape::parabola(0.04, 5.0331361363));
  shapes.push_back(InitialShape::logspiral(1.0, 0.15, 4.0 * kPi));
  shapes.push_back(spring_shape());
  for (const auto& s : shapes) {
    const double L = s.length();
    const double step = 1e-6 * L;
    double worst_c = 0.0, worst_k = 0.0;
    int checked = 0;
    for (int i = 1; i < 1000; ++i) {
      const double x = L * i / 1000.0;
      if (s.kind() == InitialShape::Kind::PiecewiseStraight) {
        // stay clear of kinks
        const auto& z = s.zigzag();
        bool near = false;
        for (double xs : z.x_start)
          if (std::abs(x - xs) < 2.0 * step || std::abs(x - L) < 2.0 * step) near = true;
        if (near) continue;
      }
      worst_c = std::max(worst_c, constraint_residual(s, x, step));
      worst_k = std::max(worst_k, curvature_gap(s, x, step));
      ++checked;
    }
    CAPTURE(static_cast<int>(s.kind()));
    CHECK(checked > 900);
    CHECK(worst_c < 1e-8);
    CHECK(worst_k < 1e-6);
  }
}

TEST_CASE("shape functions are deterministic") {
  const auto s = InitialShape::parabola(0.02, 5.0083208787);
  const double a = s.u_s0(1.2345);
  const double b = s.u_s0(1.2345);
  CHECK(a == b);
  const auto sp = InitialShape::logspiral(1.0, 0.15, 4.0 * kPi);
  CHECK(sp.w_s0(10.0) == sp.w_s0(10.0));
}

TEST_CASE("parabola apex and implicit solve against bisection oracle") {
  const double a = 0.04;
  const auto s = InitialShape::parabola(a, 5.0);
  CHECK(s.u_s0(0.0) == 0.0);
  CHECK(s.w_s0(0.0) == 0.0);
  CHECK(s.phi0(0.0) == 0.0);
  const double u_solver = solve_parabola_u(a, 1.0);
  const double u_oracle = bisect_parabola_u(a, 1.0);
  CHECK(std::abs(u_solver - u_oracle) < 1e-12);
  // projected abscissa strictly increasing
  double prev = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const double x = 5.0 * i / 50.0;
    const double xu = x + s.u_s0(x);
    CHECK(xu > prev);
    prev = xu;
  }
}

TEST_CASE("log spiral reduces to the circle as b goes to zero") {
  const double R = 2.0;
  const double b = 2e-6;
  const auto sp = InitialShape::logspiral(R, b, 0.5);
  const auto ci = InitialShape::circle(1.0 / R, sp.length());
  const double L = sp.length();
  // the deviation is O(b x^2 / R^2) in phi0 and O(b x^2 / R) in u, w
  const double bound = 4.0 * b * (L * L / R + L);
  for (int i = 0; i <= 20; ++i) {
    const double x = L * i / 20.0;
    CHECK(std::abs(sp.phi0(x) - ci.phi0(x)) < bound / R);
    CHECK(std::abs(sp.u_s0(x) - ci.u_s0(x)) < bound);
    CHECK(std::abs(sp.w_s0(x) - ci.w_s0(x)) < bound);
  }
  CHECK(sp.u_s0(0.0) == 0.0);
  CHECK(sp.w_s0(0.0) == 0.0);
  CHECK(sp.phi0(0.0) == 0.0);
}

TEST_CASE("log spiral rejects the ill-conditioned pitch range") {
  CHECK_THROWS_AS(InitialShape::logspiral(1.0, 1e-7, 1.0), ModelError);
}

TEST_CASE("zigzag degenerates to straight for a single zero-angle segment") {
  const auto z = InitialShape::zigzag({{2.0, 0.0}});
  const auto s = InitialShape::straight(2.0);
  for (double x : {0.3, 1.1, 1.9}) {
    CHECK(z.phi0(x) == s.phi0(x));
    CHECK(z.u_s0(x) == s.u_s0(x));
    CHECK(z.w_s0(x) == s.w_s0(x));
    CHECK(z.kappa0(x) == 0.0);
  }
}

TEST_CASE("zigzag two-segment endpoint") {
  const auto z = InitialShape::zigzag({{1.0, 0.0}, {1.0, -kPi / 2.0}});
  CHECK(2.0 + z.u_s0(2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(z.w_s0(2.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("ten-segment spring chord against direct summation") {
  const auto z = spring_shape();
  const double L = z.length();
  double X = 0.0, Z = 0.0;
  for (const auto& seg : z.zigzag().segments) {
    X += std::cos(seg.angle) * seg.length;
    Z += -std::sin(seg.angle) * seg.length;
  }
  CHECK(L + z.u_s0(L) == doctest::Approx(X).epsilon(1e-14));
  CHECK(z.w_s0(L) == doctest::Approx(Z).epsilon(1e-14));
  const double chord = std::hypot(L + z.u_s0(L), z.w_s0(L));
  CHECK(chord == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform grid nodes") {
  const auto s = InitialShape::circle(0.5, 8.0);
  const auto g = build_grid(s, 4);
  REQUIRE(g.x_nodes.size() == 5);
  for (int i = 0; i <= 4; ++i) CHECK(g.x_nodes[i] == doctest::Approx(2.0 * i).epsilon(1e-15));
  for (int i = 0; i < 4; ++i) CHECK(g.h[i] == doctest::Approx(2.0));
}

TEST_CASE("projection grid chord lengths approach the arc length") {
  const auto s = InitialShape::parabola(0.02, 5.0083208787);
  const auto g = build_grid(s, 512, GridSpec::Spacing::UniformProjection);
  double sum = 0.0;
  for (double h : g.h) sum += h;
  CHECK(std::abs(sum - s.length()) / s.length() < 1e-3);
  CHECK_THROWS_AS(build_grid(InitialShape::circle(1.0, 1.0), 4, GridSpec::Spacing::UniformProjection),
                  ModelError);
}

TEST_CASE("zigzag grid places kinks on nodes") {
  const auto z = spring_shape();
  const auto g = build_grid(z, 90);
  const auto& zz = z.zigzag();
  int matches = 0;
  for (std::size_t j = 1; j < zz.x_start.size(); ++j) {
    for (double xn : g.x_nodes)
      if (std::abs(xn - zz.x_start[j]) < 1e-12 * z.length()) {
        ++matches;
        break;
      }
  }
  CHECK(matches == 9);
  for (double xm : g.x_mid)
    for (std::size_t j = 1; j < zz.x_start.size(); ++j)
      CHECK(std::abs(xm - zz.x_start[j]) > 1e-6 * z.length());
  CHECK_THROWS_AS(build_grid(z, 91), ModelError);
  CHECK_THROWS_AS(build_grid(z, 5), ModelError);
}
