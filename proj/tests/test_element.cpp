#include <doctest.h>

#include <cmath>
#include <random>

#include "arcbeam/element.hpp"

using namespace arcbeam;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Setup {
  InitialShape shape;
  SectionModel section;
  GridSpec grid;
};

Setup table4_setup(std::size_t nis, SectionLaw law = SectionLaw::Consistent) {
  auto shape = InitialShape::circle(1.0, 2.0 * kPi);
  SectionModel sec(1.0, 1.0, 0.4, law, InertiaModel::Quadratic);
  auto grid = build_grid(shape, nis);
  return {shape, sec, grid};
}

Mat3 fd_jacobian(const Setup& s, const LeftEndForces& f, double scale) {
  Mat3 J;
  const Vec3 f0 = f.vec();
  for (int j = 0; j < 3; ++j) {
    const double step = 1e-6 * std::max(scale, std::abs(f0[j]));
    Vec3 fp = f0, fm = f0;
    fp[j] += step;
    fm[j] -= step;
    const Vec3 gp = march(s.shape, s.grid, s.section, LeftEndForces::from(fp)).vec();
    const Vec3 gm = march(s.shape, s.grid, s.section, LeftEndForces::from(fm)).vec();
    J.col(j) = (gp - gm) / (2.0 * step);
  }
  return J;
}

}  // namespace

TEST_CASE("stress-free march anchors exactly") {
  std::vector<Setup> setups;
  setups.push_back(table4_setup(8));
  setups.push_back({InitialShape::straight(2.0), SectionModel(1e6, 0.1, 0.1, SectionLaw::Simplified),
                    build_grid(InitialShape::straight(2.0), 8)});
  setups.push_back({InitialShape::parabola(0.02, 5.008320877760412),
                    SectionModel(1e4, 0.2, 0.2, SectionLaw::Consistent),
                    build_grid(InitialShape::parabola(0.02, 5.008320877760412), 16)});
  for (const auto& s : setups) {
    const auto g = march(s.shape, s.grid, s.section, LeftEndForces{});
    const double L = s.shape.length();
    CHECK(std::abs(g.u) <= 1e-15 * L);
    CHECK(std::abs(g.w) <= 1e-15 * L);
    CHECK(std::abs(g.phi) <= 1e-15 * L);
  }
}

TEST_CASE("constant moment on a straight beam integrates exactly") {
  const double L = 2.0, E = 1e6, b = 0.1, h = 0.1;
  const auto shape = InitialShape::straight(L);
  SectionModel sec(E, b, h, SectionLaw::Simplified);
  const auto grid = build_grid(shape, 7);
  const double M = 3.5;
  const auto g = march(shape, grid, sec, {0.0, 0.0, -M});
  CHECK(g.phi == doctest::Approx(M * L / sec.EI()).epsilon(1e-14));
}

TEST_CASE("unfolding circular cantilever reproduces the reference midpoint displacement") {
  // h kappa0 = 0.4, R0 = 1, consistent law; pure bending via the left-end
  // reaction moment M1 that exactly straightens the beam
  auto s = table4_setup(16);
  const double M1 = -straightening_moment(s.section, 1.0);
  MarchTrace trace;
  march(s.shape, s.grid, s.section, {0.0, 0.0, M1}, &trace);
  CHECK(-trace.dw[8] == doctest::Approx(-2.012914).epsilon(1e-5 / 2.0));
  auto s128 = table4_setup(128);
  MarchTrace t2;
  march(s128.shape, s128.grid, s128.section, {0.0, 0.0, M1}, &t2);
  CHECK(-t2.dw[64] == doctest::Approx(-2.000201).epsilon(1e-5 / 2.0));
}

TEST_CASE("pure-bending straightening leaves a uniform state") {
  auto s = table4_setup(256);
  const double M1 = -straightening_moment(s.section, 1.0);
  MarchTrace trace;
  march(s.shape, s.grid, s.section, {0.0, 0.0, M1}, &trace);
  const auto c = s.section.characteristics(1.0);
  const double eps1 = s.section.strain_from_forces(c, {0.0, -M1}).eps_s;
  for (std::size_t i = 0; i <= s.grid.n; ++i)
    CHECK(std::abs(1.0 + trace.dkappa[i]) <= 1e-8);
  for (std::size_t i = 0; i < s.grid.n; ++i)
    CHECK(trace.eps_mid[i] == doctest::Approx(eps1).epsilon(1e-10));
}

TEST_CASE("march jacobian matches finite differences") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Setup> setups;
  setups.push_back(table4_setup(32));
  setups.push_back({InitialShape::straight(2.0), SectionModel(1e6, 0.1, 0.1, SectionLaw::Simplified),
                    build_grid(InitialShape::straight(2.0), 16)});
  setups.push_back({InitialShape::parabola(0.04, 5.033136136161910),
                    SectionModel(1e4, 0.2, 0.2, SectionLaw::Consistent),
                    build_grid(InitialShape::parabola(0.04, 5.033136136161910), 16)});
  setups.push_back({InitialShape::logspiral(1.0, 0.15, 2.0 * kPi),
                    SectionModel(1.0, 1.0, 1.0 / 30.0, SectionLaw::Consistent),
                    build_grid(InitialShape::logspiral(1.0, 0.15, 2.0 * kPi), 32)});
  for (const auto& s : setups) {
    const double fscale = s.section.EI() / (s.shape.length() * s.shape.length());
    for (int trial = 0; trial < 5; ++trial) {
      LeftEndForces f{fscale * dist(rng), fscale * dist(rng), fscale * s.shape.length() * dist(rng)};
      const Mat3 G = march_jacobian(s.shape, s.grid, s.section, f);
      const Mat3 J = fd_jacobian(s, f, fscale);
      CHECK((G - J).norm() / J.norm() < 1e-6);
    }
  }
}

TEST_CASE("straight cantilever zero-state jacobian equals the linear flexibility") {
  const double L = 2.0, E = 1e6, b = 0.1, h = 0.1;
  Setup s{InitialShape::straight(L), SectionModel(E, b, h, SectionLaw::Simplified),
          build_grid(InitialShape::straight(L), 64)};
  const Mat3 G = march_jacobian(s.shape, s.grid, s.section, {});
  const Mat3 J = fd_jacobian(s, {}, s.section.EI() / (L * L));
  CHECK((G - J).norm() / J.norm() < 1e-6);
  CHECK(G(0, 0) == doctest::Approx(-L / s.section.EA()).epsilon(1e-12));
  CHECK(G(2, 2) == doctest::Approx(-L / s.section.EI()).epsilon(1e-12));
}

TEST_CASE("perturbation linearity of the march") {
  auto s = table4_setup(32);
  const double M1 = -straightening_moment(s.section, 1.0);
  const LeftEndForces f{0.01 * M1, -0.02 * M1, 0.5 * M1};
  const Vec3 g0 = march(s.shape, s.grid, s.section, f).vec();
  const Mat3 G = march_jacobian(s.shape, s.grid, s.section, f);
  const Vec3 dir = Vec3(0.3, -0.8, 0.5).normalized() * std::abs(M1);
  double prev_ratio = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const double eps = std::pow(0.5, k) * 1e-2;
    const Vec3 g1 = march(s.shape, s.grid, s.section, LeftEndForces::from(f.vec() + eps * dir)).vec();
    const double rem = (g1 - g0 - eps * (G * dir)).norm();
    if (k > 1) CHECK(rem < prev_ratio * 0.3);  // roughly quartered per halving
    prev_ratio = rem;
  }
}

TEST_CASE("shoot anchors at zero and recovers from perturbed guesses") {
  auto s = table4_setup(16);
  const auto r0 = shoot(s.shape, s.grid, s.section, RightEndDisplacements{});
  CHECK(r0.f_ab.X == 0.0);
  CHECK(r0.f_ab.Z == 0.0);
  CHECK(r0.f_ab.M == 0.0);
  CHECK(r0.iterations <= 1);

  const double M1 = -straightening_moment(s.section, 1.0);
  const LeftEndForces f{0.1 * M1, 0.05 * M1, 0.8 * M1};
  const auto target = march(s.shape, s.grid, s.section, f);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-0.01, 0.01);
  for (int trial = 0; trial < 10; ++trial) {
    LeftEndForces guess{f.X * (1.0 + dist(rng)), f.Z * (1.0 + dist(rng)), f.M * (1.0 + dist(rng))};
    const auto r = shoot(s.shape, s.grid, s.section, target, guess);
    CHECK(std::abs(r.f_ab.X - f.X) <= 1e-8 * std::abs(M1));
    CHECK(std::abs(r.f_ab.Z - f.Z) <= 1e-8 * std::abs(M1));
    CHECK(std::abs(r.f_ab.M - f.M) <= 1e-8 * std::abs(M1));
  }
}

TEST_CASE("laws agree bit-for-bit when the initial curvature vanishes") {
  for (bool zig : {false, true}) {
    InitialShape shape = zig ? InitialShape::zigzag({{1.0, 0.0}, {1.0, -kPi / 2.0}, {1.0, 0.0}})
                             : InitialShape::straight(3.0);
    const auto grid = build_grid(shape, 12);
    SectionModel cons(2e5, 0.3, 0.2, SectionLaw::Consistent);
    SectionModel simp(2e5, 0.3, 0.2, SectionLaw::Simplified);
    const LeftEndForces f{11.0, -4.0, 7.0};
    const auto gc = march(shape, grid, cons, f);
    const auto gs = march(shape, grid, simp, f);
    CHECK(gc.u == gs.u);
    CHECK(gc.w == gs.w);
    CHECK(gc.phi == gs.phi);
  }
}

TEST_CASE("right end moment closes the free body") {
  auto s = table4_setup(64);
  CHECK(end_moment_right(s.shape, {}, {}) == 0.0);

  // straight beam under pure moment
  const auto st = InitialShape::straight(2.0);
  SectionModel sec(1e6, 0.1, 0.1, SectionLaw::Simplified);
  const auto gst = build_grid(st, 8);
  const double M = 1.7;
  const auto gs = march(st, gst, sec, {0.0, 0.0, -M});
  CHECK(end_moment_right(st, {0.0, 0.0, -M}, gs) == doctest::Approx(M).epsilon(1e-12));

  // random state: algebraic closure equals the marched end moment
  const double M1 = -straightening_moment(s.section, 1.0);
  const LeftEndForces f{0.2 * M1, -0.1 * M1, 0.6 * M1};
  MarchTrace trace;
  const auto g = march(s.shape, s.grid, s.section, f, &trace);
  const double mba = end_moment_right(s.shape, f, g);
  CHECK(std::abs(-trace.moment.back() - mba) <= 1e-10 * std::abs(M1) * s.shape.length());
}

TEST_CASE("deformed shape reproduces the initial geometry when unloaded") {
  auto s = table4_setup(16);
  MarchTrace trace;
  march(s.shape, s.grid, s.section, {}, &trace);
  const auto pts = deformed_shape(trace, s.shape, s.grid);
  for (std::size_t i = 0; i <= s.grid.n; ++i) {
    const double x = s.grid.x_nodes[i];
    CHECK(pts[i].first == doctest::Approx(x + s.shape.u_s0(x)).epsilon(1e-14));
    CHECK(pts[i].second == doctest::Approx(s.shape.w_s0(x)).epsilon(1e-14));
  }
  // the full unloaded loop closes
  CHECK(pts.front().first == doctest::Approx(pts.back().first).epsilon(1e-12));
  CHECK(pts.front().second == doctest::Approx(pts.back().second).epsilon(1e-12));
}

TEST_CASE("best-fit radius of the doubly folded circle") {
  auto s = table4_setup(2048);
  const double M1 = -straightening_moment(s.section, 1.0);
  MarchTrace trace;
  march(s.shape, s.grid, s.section, {0.0, 0.0, 2.0 * M1}, &trace);
  const auto pts = deformed_shape(trace, s.shape, s.grid);
  // algebraic circle fit
  double sxx = 0, sxz = 0, szz = 0, sx = 0, sz = 0, sxr = 0, szr = 0, sr = 0;
  const double n = static_cast<double>(pts.size());
  for (const auto& [x, z] : pts) {
    const double r2 = x * x + z * z;
    sxx += 4 * x * x;
    sxz += 4 * x * z;
    szz += 4 * z * z;
    sx += 2 * x;
    sz += 2 * z;
    sxr += 2 * x * r2;
    szr += 2 * z * r2;
    sr += r2;
  }
  Eigen::Matrix3d A;
  A << sxx, sxz, sx, sxz, szz, sz, sx, sz, n;
  Eigen::Vector3d rhs(sxr, szr, sr);
  const Eigen::Vector3d sol = A.fullPivLu().solve(rhs);
  const double radius = std::sqrt(sol[2] + sol[0] * sol[0] + sol[1] * sol[1]);
  CHECK(radius == doctest::Approx(0.973).epsilon(0.002 / 0.973));
}

TEST_CASE("quadratic convergence of the element discretization") {
  const double M1 = -straightening_moment(table4_setup(4).section, 1.0);
  auto w_mid = [&](std::size_t nis) {
    auto s = table4_setup(nis);
    MarchTrace t;
    march(s.shape, s.grid, s.section, {0.0, 0.0, M1}, &t);
    return t.dw[nis / 2];
  };
  const double exact = 2.0;
  double prev_err = 0.0;
  for (std::size_t nis : {32, 64, 128, 256}) {
    const double err = std::abs(w_mid(nis) - exact);
    if (prev_err > 0.0) {
      const double ratio = prev_err / err;
      CHECK(ratio > 3.5);
      CHECK(ratio < 4.5);
    }
    prev_err = err;
  }
}

TEST_CASE("absurd forces raise a diverged-march error") {
  auto s = table4_setup(8);
  MarchTrace trace;
  CHECK_THROWS_AS(march(s.shape, s.grid, s.section, {1e300, 1e300, 1e300}, &trace), DivergedMarch);
}
