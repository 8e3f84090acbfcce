#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace arcbeam {

// Initial (stress-free) centerline description in the local frame of the
// left end section.  All functions are parametrized by the arc-length
// coordinate x measured along the undeformed centerline, x in [0, L].
//
// phi0(x) is the rotation of the section at x relative to the left end
// section (counterclockwise positive), u_s0/w_s0 are the displacements that
// map the fictitious straight reference onto the curved stress-free shape,
// and kappa0(x) = phi0'(x) is the initial curvature.

struct StraightShape {
  double length = 0.0;
};

struct CircleShape {
  double kappa0 = 0.0;  // signed curvature, +-1/R0
  double length = 0.0;
};

struct ParabolaShape {
  double a = 0.0;  // geometric parameter, w_s0 = a/2 (x+u_s0)^2, apex at x=0
  double length = 0.0;
};

struct LogSpiralShape {
  double a = 0.0;          // radial scale, r = a exp(b theta)
  double b = 0.0;          // pitch parameter
  double theta_max = 0.0;  // polar angle range [0, theta_max]
  // derived
  double c = 0.0;         // b / (a sqrt(1+b^2))
  double phi_star = 0.0;  // arctan b
  double length = 0.0;
};

struct ZigzagShape {
  struct Segment {
    double length;
    double angle;  // constant phi0 inside the segment
  };
  std::vector<Segment> segments;
  // prefix data per segment start: arc coordinate, u_s0, w_s0
  std::vector<double> x_start, u_start, w_start;
  double length = 0.0;
};

class InitialShape {
 public:
  enum class Kind { Straight, Circle, Parabola, LogSpiral, PiecewiseStraight };

  Kind kind() const { return kind_; }
  double length() const;

  double phi0(double x) const;
  double u_s0(double x) const;
  double w_s0(double x) const;
  double kappa0(double x) const;

  // true when kappa0 is the same at every smooth point
  bool constant_curvature() const;

  const ZigzagShape& zigzag() const;
  const ParabolaShape& parabola() const;
  const LogSpiralShape& logspiral() const;

  static InitialShape straight(double L);
  static InitialShape circle(double kappa0_signed, double L);
  static InitialShape parabola(double a, double L);
  static InitialShape logspiral(double a, double b, double theta_max);
  static InitialShape zigzag(const std::vector<std::pair<double, double>>& segments);

 private:
  Kind kind_ = Kind::Straight;
  std::variant<StraightShape, CircleShape, ParabolaShape, LogSpiralShape, ZigzagShape> data_;
};

// Solves eq. a(x+u)sqrt(1+a^2(x+u)^2) + asinh(a(x+u)) = 2ax for u_s0 at
// given x by safeguarded Newton iteration.  Exposed for testing against an
// independent bisection oracle.
double solve_parabola_u(double a, double x);

// Integration grid over one element.  x_nodes has N+1 entries from 0 to L,
// x_mid and h have N entries.  For uniform arc-length spacing h_i = L/N;
// for uniform projection spacing (parabola only) h_i is the chord length of
// segment i between consecutive projected points.
struct GridSpec {
  enum class Spacing { UniformArcLength, UniformProjection };
  std::size_t n = 0;
  Spacing spacing = Spacing::UniformArcLength;
  std::vector<double> x_nodes;
  std::vector<double> x_mid;
  std::vector<double> h;
};

GridSpec build_grid(const InitialShape& shape, std::size_t n,
                    GridSpec::Spacing spacing = GridSpec::Spacing::UniformArcLength);

struct ModelError : std::runtime_error {
  explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace arcbeam
