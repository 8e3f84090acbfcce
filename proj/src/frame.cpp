#include "arcbeam/frame.hpp"

#include <cmath>
#include <string>

namespace arcbeam {

ElementPlacement make_placement(const InitialShape& shape, int node_a, int node_b, double xa, double za,
                                double xb, double zb) {
  ElementPlacement p;
  p.node_a = node_a;
  p.node_b = node_b;
  p.xa = xa;
  p.za = za;
  p.xb = xb;
  p.zb = zb;
  p.L_ab = std::hypot(xb - xa, zb - za);
  if (p.L_ab <= 0.0)
    throw ModelError("element " + std::to_string(node_a) + "-" + std::to_string(node_b) +
                     ": coincident end nodes (zero chord); drive such elements through the element API");
  p.cos_gamma0 = (xb - xa) / p.L_ab;
  p.sin_gamma0 = (zb - za) / p.L_ab;
  const double L = shape.length();
  const double cx = L + shape.u_s0(L);
  const double cz = shape.w_s0(L);
  p.cos_beta0 = cx / p.L_ab;
  p.sin_beta0 = cz / p.L_ab;
  const double gap = std::abs(cx * cx + cz * cz - p.L_ab * p.L_ab) / (p.L_ab * p.L_ab);
  if (gap > 1e-9)
    throw ModelError("element " + std::to_string(node_a) + "-" + std::to_string(node_b) +
                     ": chord length inconsistent with the initial shape (relative gap " +
                     std::to_string(gap) + ")");
  p.cos_alpha0 = p.cos_gamma0 * p.cos_beta0 + p.sin_gamma0 * p.sin_beta0;
  p.sin_alpha0 = p.sin_gamma0 * p.cos_beta0 - p.cos_gamma0 * p.sin_beta0;
  return p;
}

Mat3 placement_T(const ElementPlacement& p, double phi_a) {
  const double c = std::cos(phi_a), s = std::sin(phi_a);
  const double ca = p.cos_alpha0 * c + p.sin_alpha0 * s;  // cos(alpha0 - phi_a)
  const double sa = p.sin_alpha0 * c - p.cos_alpha0 * s;  // sin(alpha0 - phi_a)
  Mat3 T;
  T << ca, sa, 0.0, -sa, ca, 0.0, 0.0, 0.0, 1.0;
  return T;
}

Mat3 placement_dT(const ElementPlacement& p, double phi_a) {
  const double c = std::cos(phi_a), s = std::sin(phi_a);
  const double ca = p.cos_alpha0 * c + p.sin_alpha0 * s;
  const double sa = p.sin_alpha0 * c - p.cos_alpha0 * s;
  Mat3 dT;
  dT << sa, -ca, 0.0, ca, sa, 0.0, 0.0, 0.0, 0.0;
  return dT;
}

Vec3 placement_l(const ElementPlacement& p, double phi_a) {
  const double c = std::cos(phi_a), s = std::sin(phi_a);
  const double cb = p.cos_beta0 * c - p.sin_beta0 * s;  // cos(beta0 + phi_a)
  const double sb = p.sin_beta0 * c + p.cos_beta0 * s;  // sin(beta0 + phi_a)
  return p.L_ab * Vec3(cb - p.cos_beta0, sb - p.sin_beta0, 0.0);
}

Vec3 placement_dl(const ElementPlacement& p, double phi_a) {
  const double c = std::cos(phi_a), s = std::sin(phi_a);
  const double cb = p.cos_beta0 * c - p.sin_beta0 * s;
  const double sb = p.sin_beta0 * c + p.cos_beta0 * s;
  return p.L_ab * Vec3(-sb, cb, 0.0);
}

RightEndDisplacements local_target_from_global(const ElementPlacement& p, const Vec3& u_a_g,
                                               const Vec3& u_b_g) {
  const Vec3 ub = placement_T(p, u_a_g[2]) * (u_b_g - u_a_g) + placement_l(p, u_a_g[2]);
  return RightEndDisplacements::from(ub);
}

Vec3 global_forces_from_local(const ElementPlacement& p, double phi_a, const LeftEndForces& f_ab) {
  return placement_T(p, phi_a).transpose() * f_ab.vec();
}

Vec3 global_right_end_forces(const ElementPlacement& p, const Vec3& u_a_g, const Vec3& u_b_g,
                             const Vec3& f_ab_g) {
  const double lever_z = p.zb - p.za + u_b_g[1] - u_a_g[1];
  const double lever_x = p.xb - p.xa + u_b_g[0] - u_a_g[0];
  const double M_ba = -f_ab_g[2] + f_ab_g[0] * lever_z - f_ab_g[1] * lever_x;
  return {-f_ab_g[0], -f_ab_g[1], M_ba};
}

Mat6 element_tangent(const ElementPlacement& p, const Vec3& u_a_g, const Vec3& u_b_g,
                     const LeftEndForces& f_ab, const Mat3& G) {
  const double phi_a = u_a_g[2];
  const Mat3 T = placement_T(p, phi_a);
  const Mat3 Gi = G.fullPivLu().inverse();
  const Mat3 A = T.transpose() * Gi * T;
  const Vec3 B = T.transpose() * Gi * (placement_dT(p, phi_a) * (u_b_g - u_a_g) + placement_dl(p, phi_a)) +
                 placement_dT(p, phi_a).transpose() * f_ab.vec();

  Mat6 K = Mat6::Zero();
  K.block<3, 3>(0, 3) = A;
  K.block<3, 2>(0, 0) = -A.leftCols<2>();
  K.block<3, 1>(0, 2) = -A.col(2) + B;
  K.row(3) = -K.row(0);
  K.row(4) = -K.row(1);
  // sixth row mirrored from the sixth column, diagonal from the k66 rule
  for (int j = 0; j < 5; ++j) K(5, j) = K(j, 5);
  const double lever_z = p.zb - p.za + u_b_g[1] - u_a_g[1];
  const double lever_x = p.xb - p.xa + u_b_g[0] - u_a_g[0];
  K(5, 5) = lever_z * K(0, 5) - lever_x * K(1, 5) - K(2, 5);
  return K;
}

}  // namespace arcbeam
