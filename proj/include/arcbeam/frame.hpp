#pragma once

#include <Eigen/Dense>

#include "arcbeam/element.hpp"

namespace arcbeam {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Placement of a two-noded curved element in the global frame.  Angles are
// never formed explicitly; only the sines/cosines of gamma0 (chord vs global
// x), beta0 (chord vs local x) and alpha0 = gamma0 - beta0 are stored.
struct ElementPlacement {
  int node_a = -1, node_b = -1;
  double xa = 0.0, za = 0.0, xb = 0.0, zb = 0.0;
  double L_ab = 0.0;
  double cos_gamma0 = 1.0, sin_gamma0 = 0.0;
  double cos_beta0 = 1.0, sin_beta0 = 0.0;
  double cos_alpha0 = 1.0, sin_alpha0 = 0.0;
};

ElementPlacement make_placement(const InitialShape& shape, int node_a, int node_b, double xa, double za,
                                double xb, double zb);

// T(phi_a): rotation mapping global displacement differences to the local
// frame attached to the rotated left end section.
Mat3 placement_T(const ElementPlacement& p, double phi_a);
Mat3 placement_dT(const ElementPlacement& p, double phi_a);
Vec3 placement_l(const ElementPlacement& p, double phi_a);
Vec3 placement_dl(const ElementPlacement& p, double phi_a);

RightEndDisplacements local_target_from_global(const ElementPlacement& p, const Vec3& u_a_g,
                                               const Vec3& u_b_g);

// Global components of the left-end forces; the moment passes through.
Vec3 global_forces_from_local(const ElementPlacement& p, double phi_a, const LeftEndForces& f_ab);

// Right-end global forces (X_ba, Z_ba, M_ba) from whole-beam equilibrium.
Vec3 global_right_end_forces(const ElementPlacement& p, const Vec3& u_a_g, const Vec3& u_b_g,
                             const Vec3& f_ab_g);

// 6x6 element tangent stiffness in global coordinates at a converged shoot.
Mat6 element_tangent(const ElementPlacement& p, const Vec3& u_a_g, const Vec3& u_b_g,
                     const LeftEndForces& f_ab, const Mat3& G);

}  // namespace arcbeam
