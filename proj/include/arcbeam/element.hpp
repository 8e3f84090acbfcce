#pragma once

#include <Eigen/Dense>
#include <vector>

#include "arcbeam/geometry.hpp"
#include "arcbeam/section.hpp"

namespace arcbeam {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Generalized forces at the left end, components in the moving local frame:
// (X_ab, Z_ab, M_ab).
struct LeftEndForces {
  double X = 0.0, Z = 0.0, M = 0.0;
  Vec3 vec() const { return {X, Z, M}; }
  static LeftEndForces from(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

// Generalized displacements of the right end relative to the stress-free
// shape, local frame: (u_b, w_b, phi_b).
struct RightEndDisplacements {
  double u = 0.0, w = 0.0, phi = 0.0;
  Vec3 vec() const { return {u, w, phi}; }
  static RightEndDisplacements from(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

struct MarchTrace {
  std::vector<double> du, dw, dphi;   // per node, size N+1
  std::vector<double> moment, dkappa; // per node, size N+1
  std::vector<double> normal_mid, eps_mid, phi_mid;  // per midpoint, size N
};

struct DivergedMarch : std::runtime_error {
  DivergedMarch() : std::runtime_error("element march diverged (non-finite state)") {}
};

struct ShootFailure : std::runtime_error {
  explicit ShootFailure(const std::string& what) : std::runtime_error(what) {}
};

struct SingularJacobian : ShootFailure {
  SingularJacobian() : ShootFailure("element Jacobian is singular (limit point at element level)") {}
};

RightEndDisplacements march(const InitialShape& shape, const GridSpec& grid, const SectionModel& section,
                            const LeftEndForces& f_ab, MarchTrace* trace = nullptr);

// Jacobi matrix G = d g / d f_ab of the march, propagated by the linearized
// scheme for the three unit perturbations simultaneously.
Mat3 march_jacobian(const InitialShape& shape, const GridSpec& grid, const SectionModel& section,
                    const LeftEndForces& f_ab);

struct ShootTolerances {
  double abs_scale = 1e-12;  // times max(L, chord)
  double rel = 1e-10;
  int max_iterations = 60;
  int max_halvings = 10;
};

struct ShootResult {
  LeftEndForces f_ab;
  Mat3 G = Mat3::Zero();
  MarchTrace trace;
  int iterations = 0;
  double residual_norm = 0.0;
};

ShootResult shoot(const InitialShape& shape, const GridSpec& grid, const SectionModel& section,
                  const RightEndDisplacements& u_b_target, const LeftEndForces& f_ab_guess = {},
                  const ShootTolerances& tol = {});

// Right-end moment from whole-beam equilibrium, local frame.
double end_moment_right(const InitialShape& shape, const LeftEndForces& f_ab,
                        const RightEndDisplacements& u_b);

// Deformed centerline points (x_i + u_s0 + du_i, w_s0 + dw_i), local frame.
std::vector<std::pair<double, double>> deformed_shape(const MarchTrace& trace, const InitialShape& shape,
                                                      const GridSpec& grid);

}  // namespace arcbeam
