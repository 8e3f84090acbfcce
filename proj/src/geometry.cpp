#include "arcbeam/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace arcbeam {

namespace {

double parabola_lhs(double a, double xu) {
  // a(x+u) sqrt(1 + a^2 (x+u)^2) + asinh(a(x+u))
  const double t = a * xu;
  return t * std::sqrt(1.0 + t * t) + std::asinh(t);
}

}  // namespace

double solve_parabola_u(double a, double x) {
  if (x == 0.0) return 0.0;
  const double rhs = 2.0 * a * x;
  // root of f(s) = parabola_lhs(a, s) - rhs in s = x + u, bracketed by
  // [0, x] since the projected abscissa never exceeds the arc length
  double lo = 0.0, hi = x;
  double s = x / (1.0 + 0.5 * a * a * x * x);  // crude first guess
  if (s <= lo || s >= hi) s = 0.5 * (lo + hi);
  const double tol = 1e-13 * (1.0 + std::abs(rhs));
  for (int it = 0; it < 100; ++it) {
    const double t = a * s;
    const double f = parabola_lhs(a, s) - rhs;
    if (std::abs(f) <= tol) return s - x;
    if (f > 0.0)
      hi = s;
    else
      lo = s;
    const double df = 2.0 * a * std::sqrt(1.0 + t * t);  // d lhs / ds
    double snew = s - f / df;
    if (!(snew > lo && snew < hi)) snew = 0.5 * (lo + hi);
    s = snew;
  }
  throw ModelError("parabola arc-length equation did not converge");
}

InitialShape InitialShape::straight(double L) {
  if (L <= 0.0) throw ModelError("straight shape requires L > 0");
  InitialShape s;
  s.kind_ = Kind::Straight;
  s.data_ = StraightShape{L};
  return s;
}

InitialShape InitialShape::circle(double kappa0_signed, double L) {
  if (kappa0_signed == 0.0) throw ModelError("circle shape requires nonzero curvature; use straight");
  if (L <= 0.0) throw ModelError("circle shape requires L > 0");
  InitialShape s;
  s.kind_ = Kind::Circle;
  s.data_ = CircleShape{kappa0_signed, L};
  return s;
}

InitialShape InitialShape::parabola(double a, double L) {
  if (a <= 0.0) throw ModelError("parabola shape requires a > 0");
  if (L <= 0.0) throw ModelError("parabola shape requires L > 0");
  InitialShape s;
  s.kind_ = Kind::Parabola;
  s.data_ = ParabolaShape{a, L};
  return s;
}

InitialShape InitialShape::logspiral(double a, double b, double theta_max) {
  if (a <= 0.0 || theta_max <= 0.0) throw ModelError("logspiral shape requires a > 0 and theta_max > 0");
  if (b <= 1e-6) throw ModelError("logspiral shape requires b > 1e-6; use circle for the b -> 0 limit");
  LogSpiralShape d;
  d.a = a;
  d.b = b;
  d.theta_max = theta_max;
  d.c = b / (a * std::sqrt(1.0 + b * b));
  d.phi_star = std::atan(b);
  d.length = (std::expm1(b * theta_max)) / d.c;
  InitialShape s;
  s.kind_ = Kind::LogSpiral;
  s.data_ = d;
  return s;
}

InitialShape InitialShape::zigzag(const std::vector<std::pair<double, double>>& segments) {
  if (segments.empty()) throw ModelError("zigzag shape requires at least one segment");
  ZigzagShape d;
  double x = 0.0, u = 0.0, w = 0.0;
  for (const auto& [len, ang] : segments) {
    if (len <= 0.0) throw ModelError("zigzag segment lengths must be positive");
    d.segments.push_back({len, ang});
    d.x_start.push_back(x);
    d.u_start.push_back(u);
    d.w_start.push_back(w);
    // integrate u' = cos(phi0) - 1, w' = -sin(phi0) across the segment
    u += (std::cos(ang) - 1.0) * len;
    w += -std::sin(ang) * len;
    x += len;
  }
  d.length = x;
  InitialShape s;
  s.kind_ = Kind::PiecewiseStraight;
  s.data_ = d;
  return s;
}

double InitialShape::length() const {
  switch (kind_) {
    case Kind::Straight: return std::get<StraightShape>(data_).length;
    case Kind::Circle: return std::get<CircleShape>(data_).length;
    case Kind::Parabola: return std::get<ParabolaShape>(data_).length;
    case Kind::LogSpiral: return std::get<LogSpiralShape>(data_).length;
    case Kind::PiecewiseStraight: return std::get<ZigzagShape>(data_).length;
  }
  return 0.0;
}

bool InitialShape::constant_curvature() const {
  return kind_ == Kind::Straight || kind_ == Kind::Circle || kind_ == Kind::PiecewiseStraight;
}

const ZigzagShape& InitialShape::zigzag() const {
  if (kind_ != Kind::PiecewiseStraight) throw ModelError("shape is not piecewise straight");
  return std::get<ZigzagShape>(data_);
}

const ParabolaShape& InitialShape::parabola() const {
  if (kind_ != Kind::Parabola) throw ModelError("shape is not a parabola");
  return std::get<ParabolaShape>(data_);
}

const LogSpiralShape& InitialShape::logspiral() const {
  if (kind_ != Kind::LogSpiral) throw ModelError("shape is not a logarithmic spiral");
  return std::get<LogSpiralShape>(data_);
}

namespace {

// segment index for a zigzag evaluation point; interior points only, a point
// exactly on a kink belongs to the segment to its right except at x = L
std::size_t zigzag_segment(const ZigzagShape& z, double x) {
  auto it = std::upper_bound(z.x_start.begin(), z.x_start.end(), x);
  std::size_t i = static_cast<std::size_t>(it - z.x_start.begin());
  if (i > 0) --i;
  if (i >= z.segments.size()) i = z.segments.size() - 1;
  return i;
}

}  // namespace

double InitialShape::phi0(double x) const {
  switch (kind_) {
    case Kind::Straight: return 0.0;
    case Kind::Circle: return std::get<CircleShape>(data_).kappa0 * x;
    case Kind::Parabola: {
      const auto& p = std::get<ParabolaShape>(data_);
      return -std::atan(p.a * (x + solve_parabola_u(p.a, x)));
    }
    case Kind::LogSpiral: {
      const auto& s = std::get<LogSpiralShape>(data_);
      return std::log1p(s.c * x) / s.b;
    }
    case Kind::PiecewiseStraight: {
      const auto& z = std::get<ZigzagShape>(data_);
      return z.segments[zigzag_segment(z, x)].angle;
    }
  }
  return 0.0;
}

double InitialShape::u_s0(double x) const {
  switch (kind_) {
    case Kind::Straight: return 0.0;
    case Kind::Circle: {
      const auto& c = std::get<CircleShape>(data_);
      return std::sin(c.kappa0 * x) / c.kappa0 - x;
    }
    case Kind::Parabola: return solve_parabola_u(std::get<ParabolaShape>(data_).a, x);
    case Kind::LogSpiral: {
      const auto& s = std::get<LogSpiralShape>(data_);
      const double p0 = std::log1p(s.c * x) / s.b;
      return s.a * ((1.0 + s.c * x) * std::sin(p0 + s.phi_star) - std::sin(s.phi_star)) - x;
    }
    case Kind::PiecewiseStraight: {
      const auto& z = std::get<ZigzagShape>(data_);
      const std::size_t i = zigzag_segment(z, x);
      return z.u_start[i] + (std::cos(z.segments[i].angle) - 1.0) * (x - z.x_start[i]);
    }
  }
  return 0.0;
}

double InitialShape::w_s0(double x) const {
  switch (kind_) {
    case Kind::Straight: return 0.0;
    case Kind::Circle: {
      const auto& c = std::get<CircleShape>(data_);
      return (std::cos(c.kappa0 * x) - 1.0) / c.kappa0;
    }
    case Kind::Parabola: {
      const auto& p = std::get<ParabolaShape>(data_);
      const double xu = x + solve_parabola_u(p.a, x);
      return 0.5 * p.a * xu * xu;
    }
    case Kind::LogSpiral: {
      const auto& s = std::get<LogSpiralShape>(data_);
      const double p0 = std::log1p(s.c * x) / s.b;
      return s.a * ((1.0 + s.c * x) * std::cos(p0 + s.phi_star) - std::cos(s.phi_star));
    }
    case Kind::PiecewiseStraight: {
      const auto& z = std::get<ZigzagShape>(data_);
      const std::size_t i = zigzag_segment(z, x);
      return z.w_start[i] - std::sin(z.segments[i].angle) * (x - z.x_start[i]);
    }
  }
  return 0.0;
}

double InitialShape::kappa0(double x) const {
  switch (kind_) {
    case Kind::Straight: return 0.0;
    case Kind::Circle: return std::get<CircleShape>(data_).kappa0;
    case Kind::Parabola: {
      // phi0 = -arctan(a(x+u)); with 1+u' = 1/sqrt(1+a^2(x+u)^2) the chain
      // rule gives kappa0 = -a / (1+a^2(x+u)^2)^(3/2)
      const auto& p = std::get<ParabolaShape>(data_);
      const double t = p.a * (x + solve_parabola_u(p.a, x));
      return -p.a / std::pow(1.0 + t * t, 1.5);
    }
    case Kind::LogSpiral: {
      const auto& s = std::get<LogSpiralShape>(data_);
      return s.c / (s.b * (1.0 + s.c * x));
    }
    case Kind::PiecewiseStraight: return 0.0;
  }
  return 0.0;
}

GridSpec build_grid(const InitialShape& shape, std::size_t n, GridSpec::Spacing spacing) {
  if (n < 1) throw ModelError("grid requires at least one segment");
  GridSpec g;
  g.n = n;
  g.spacing = spacing;
  const double L = shape.length();

  if (spacing == GridSpec::Spacing::UniformProjection) {
    if (shape.kind() != InitialShape::Kind::Parabola)
      throw ModelError("uniform projection spacing is only supported for parabolic shapes");
    const auto& p = shape.parabola();
    const double Lp = L + solve_parabola_u(p.a, L);  // projected element length
    const double hp = Lp / static_cast<double>(n);
    auto arc_of_projection = [&](double xp) {
      // the arc coordinate of the point with projected abscissa x+u = xp
      return parabola_lhs(p.a, xp) / (2.0 * p.a);
    };
    g.x_nodes.resize(n + 1);
    g.x_mid.resize(n);
    g.h.resize(n);
    for (std::size_t i = 0; i <= n; ++i) g.x_nodes[i] = arc_of_projection(hp * static_cast<double>(i));
    g.x_nodes[0] = 0.0;
    g.x_nodes[n] = L;
    for (std::size_t i = 0; i < n; ++i) {
      g.x_mid[i] = arc_of_projection(hp * (static_cast<double>(i) + 0.5));
      const double w0 = shape.w_s0(g.x_nodes[i]);
      const double w1 = shape.w_s0(g.x_nodes[i + 1]);
      g.h[i] = std::hypot(hp, w1 - w0);
    }
    return g;
  }

  if (shape.kind() == InitialShape::Kind::PiecewiseStraight) {
    // distribute segments so that every kink coincides with a grid node
    const auto& z = shape.zigzag();
    const std::size_t ns = z.segments.size();
    if (n < ns) throw ModelError("zigzag grid needs at least one integration segment per physical segment");
    std::vector<std::size_t> per(ns);
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < ns; ++j) {
      const double exact = static_cast<double>(n) * z.segments[j].length / L;
      per[j] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(exact)));
      assigned += per[j];
    }
    if (assigned != n)
      throw ModelError("requested NIS cannot place all zigzag kinks on grid nodes; "
                       "use a multiple of the segment-length pattern");
    for (std::size_t j = 0; j < ns; ++j) {
      const double exact = static_cast<double>(n) * z.segments[j].length / L;
      if (std::abs(exact - static_cast<double>(per[j])) > 1e-9)
        throw ModelError("requested NIS is not proportional to zigzag segment lengths");
    }
    g.x_nodes.push_back(0.0);
    for (std::size_t j = 0; j < ns; ++j) {
      const double hj = z.segments[j].length / static_cast<double>(per[j]);
      for (std::size_t k = 1; k <= per[j]; ++k) g.x_nodes.push_back(z.x_start[j] + hj * static_cast<double>(k));
    }
    g.x_nodes.back() = L;
    g.x_mid.resize(n);
    g.h.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      g.x_mid[i] = 0.5 * (g.x_nodes[i] + g.x_nodes[i + 1]);
      g.h[i] = g.x_nodes[i + 1] - g.x_nodes[i];
    }
    return g;
  }

  const double h = L / static_cast<double>(n);
  g.x_nodes.resize(n + 1);
  g.x_mid.resize(n);
  g.h.assign(n, h);
  for (std::size_t i = 0; i <= n; ++i) g.x_nodes[i] = h * static_cast<double>(i);
  g.x_nodes[n] = L;
  for (std::size_t i = 0; i < n; ++i) g.x_mid[i] = h * (static_cast<double>(i) + 0.5);
  return g;
}

}  // namespace arcbeam
