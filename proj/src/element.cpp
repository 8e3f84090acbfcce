#include "arcbeam/element.hpp"

#include <cmath>

namespace arcbeam {

namespace {

struct SectionAtX {
  const SectionModel& sec;
  const InitialShape& shape;
  double kappa0_eff(double x) const { return sec.kappa0_eff(shape.kappa0(x)); }
  double EIk(double k0) const { return sec.E() * sec.I_k(k0); }
};

}  // namespace

RightEndDisplacements march(const InitialShape& shape, const GridSpec& grid, const SectionModel& section,
                            const LeftEndForces& f_ab, MarchTrace* trace) {
  const std::size_t n = grid.n;
  const double X = f_ab.X, Z = f_ab.Z, Mab = f_ab.M;
  const double EA = section.EA();
  const SectionAtX sx{section, shape};

  double du = 0.0, dw = 0.0, dphi = 0.0;
  double M = -Mab;
  const double k00 = sx.kappa0_eff(0.0);
  const double eps0 = (-X + k00 * M) / EA;
  double dkap = k00 * eps0 + M / sx.EIk(k00);

  if (trace) {
    trace->du.assign(n + 1, 0.0);
    trace->dw.assign(n + 1, 0.0);
    trace->dphi.assign(n + 1, 0.0);
    trace->moment.assign(n + 1, 0.0);
    trace->dkappa.assign(n + 1, 0.0);
    trace->normal_mid.assign(n, 0.0);
    trace->eps_mid.assign(n, 0.0);
    trace->phi_mid.assign(n, 0.0);
    trace->moment[0] = M;
    trace->dkappa[0] = dkap;
  }

  for (std::size_t i = 1; i <= n; ++i) {
    const double dx = grid.h[i - 1];
    const double xm = grid.x_mid[i - 1];
    const double xi = grid.x_nodes[i];

    const double dphi_half = dphi + 0.5 * dkap * dx;
    const double phi0_m = shape.phi0(xm);
    const double phi_m = phi0_m + dphi_half;
    const double c = std::cos(phi_m), s = std::sin(phi_m);
    const double N_m = -X * c + Z * s;
    const double k0m = sx.kappa0_eff(xm);
    const double eps_m = (N_m + k0m * M) / EA;

    du += ((1.0 + eps_m) * c - std::cos(phi0_m)) * dx;
    dw += (std::sin(phi0_m) - (1.0 + eps_m) * s) * dx;
    M = -Mab + X * (shape.w_s0(xi) + dw) - Z * (xi + shape.u_s0(xi) + du);
    const double k0i = sx.kappa0_eff(xi);
    const double eps_i = (N_m + k0i * M) / EA;
    dkap = k0i * eps_i + M / sx.EIk(k0i);
    dphi = dphi_half + 0.5 * dkap * dx;

    if (!(std::isfinite(du) && std::isfinite(dw) && std::isfinite(dphi) && std::isfinite(M)))
      throw DivergedMarch();

    if (trace) {
      trace->du[i] = du;
      trace->dw[i] = dw;
      trace->dphi[i] = dphi;
      trace->moment[i] = M;
      trace->dkappa[i] = dkap;
      trace->normal_mid[i - 1] = N_m;
      trace->eps_mid[i - 1] = eps_m;
      trace->phi_mid[i - 1] = phi_m;
    }
  }
  return {du, dw, dphi};
}

Mat3 march_jacobian(const InitialShape& shape, const GridSpec& grid, const SectionModel& section,
                    const LeftEndForces& f_ab) {
  const std::size_t n = grid.n;
  const double X = f_ab.X, Z = f_ab.Z, Mab = f_ab.M;
  const double EA = section.EA();
  const SectionAtX sx{section, shape};

  // base state
  double du = 0.0, dw = 0.0, dphi = 0.0;
  double M = -Mab;
  const double k00 = sx.kappa0_eff(0.0);
  const double eps0 = (-X + k00 * M) / EA;
  double dkap = k00 * eps0 + M / sx.EIk(k00);

  // perturbation state, one column per unit increment of (X_ab, Z_ab, M_ab)
  Vec3 Du = Vec3::Zero(), Dw = Vec3::Zero(), Dphi = Vec3::Zero();
  Vec3 DM(0.0, 0.0, -1.0);
  const Vec3 Deps0 = Vec3(-1.0, 0.0, -k00) / EA;
  Vec3 Dkap = k00 * Deps0 + DM / sx.EIk(k00);

  for (std::size_t i = 1; i <= n; ++i) {
    const double dx = grid.h[i - 1];
    const double xm = grid.x_mid[i - 1];
    const double xi = grid.x_nodes[i];

    const double dphi_half = dphi + 0.5 * dkap * dx;
    const double phi0_m = shape.phi0(xm);
    const double phi_m = phi0_m + dphi_half;
    const double c = std::cos(phi_m), s = std::sin(phi_m);
    const double N_m = -X * c + Z * s;
    const double k0m = sx.kappa0_eff(xm);
    const double eps_m = (N_m + k0m * M) / EA;

    const Vec3 Dphi_half = Dphi + 0.5 * dx * Dkap;
    const Vec3 DN = Vec3(-c, s, 0.0) + (X * s + Z * c) * Dphi_half;
    const Vec3 Deps_m = (DN + k0m * DM) / EA;
    Du += dx * (c * Deps_m - (1.0 + eps_m) * s * Dphi_half);
    Dw += -dx * (s * Deps_m + (1.0 + eps_m) * c * Dphi_half);

    du += ((1.0 + eps_m) * c - std::cos(phi0_m)) * dx;
    dw += (std::sin(phi0_m) - (1.0 + eps_m) * s) * dx;
    const double w0i = shape.w_s0(xi);
    const double xu0i = xi + shape.u_s0(xi);
    M = -Mab + X * (w0i + dw) - Z * (xu0i + du);
    const Vec3 DMi = Vec3(w0i + dw, -(xu0i + du), -1.0) + X * Dw - Z * Du;
    const double k0i = sx.kappa0_eff(xi);
    const double eps_i = (N_m + k0i * M) / EA;
    const Vec3 Deps_i = (DN + k0i * DMi) / EA;
    const double EIk_i = sx.EIk(k0i);
    Dkap = k0i * Deps_i + DMi / EIk_i;
    DM = DMi;
    Dphi = Dphi_half + 0.5 * dx * Dkap;

    dkap = k0i * eps_i + M / EIk_i;
    dphi = dphi_half + 0.5 * dkap * dx;
    if (!(std::isfinite(du) && std::isfinite(dw) && std::isfinite(M))) throw DivergedMarch();
  }

  Mat3 G;
  G.row(0) = Du.transpose();
  G.row(1) = Dw.transpose();
  G.row(2) = Dphi.transpose();
  return G;
}

namespace {

// One Newton run with backtracking; throws ShootFailure when stalled.
ShootResult newton_shoot(const InitialShape& shape, const GridSpec& grid, const SectionModel& section,
                         const Vec3& target, Vec3 f, const ShootTolerances& tol, double scale) {
  MarchTrace trace;
  Vec3 g = march(shape, grid, section, LeftEndForces::from(f), &trace).vec();
  double rn = (target - g).norm();
  const double accept = tol.abs_scale * scale + tol.rel * target.norm();
  for (int it = 0; it <= tol.max_iterations; ++it) {
    if (rn <= accept) {
      ShootResult res;
      res.f_ab = LeftEndForces::from(f);
      res.G = march_jacobian(shape, grid, section, res.f_ab);
      res.trace = std::move(trace);
      res.iterations = it;
      res.residual_norm = rn;
      return res;
    }
    const Mat3 G = march_jacobian(shape, grid, section, LeftEndForces::from(f));
    Eigen::FullPivLU<Mat3> lu(G);
    const double gnorm = G.cwiseAbs().maxCoeff();
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-14 * gnorm * gnorm * gnorm)
      throw SingularJacobian();
    const Vec3 step = lu.solve(target - g);
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      const Vec3 ft = f + lambda * step;
      try {
        MarchTrace tt;
        const Vec3 gt = march(shape, grid, section, LeftEndForces::from(ft), &tt).vec();
        const double rt = (target - gt).norm();
        if (rt < rn * (1.0 - 0.25 * lambda) + 1e-300 || rt <= accept) {
          f = ft;
          g = gt;
          rn = rt;
          trace = std::move(tt);
          accepted = true;
          break;
        }
      } catch (const DivergedMarch&) {
        // shrink and retry
      }
      lambda *= 0.5;
    }
    if (!accepted) throw ShootFailure("shoot line search stalled");
  }
  throw ShootFailure("shoot did not converge");
}

}  // namespace

ShootResult shoot(const InitialShape& shape, const GridSpec& grid, const SectionModel& section,
                  const RightEndDisplacements& u_b_target, const LeftEndForces& f_ab_guess,
                  const ShootTolerances& tol) {
  const Vec3 target = u_b_target.vec();
  if (!target.allFinite()) throw ShootFailure("shoot target is not finite");
  const double L = shape.length();
  const double chord = std::hypot(L + shape.u_s0(L), shape.w_s0(L));
  const double scale = std::max(L, chord);

  try {
    return newton_shoot(shape, grid, section, target, f_ab_guess.vec(), tol, scale);
  } catch (const SingularJacobian&) {
    throw;
  } catch (const ShootFailure&) {
    // sub-step the target increment from the stress-free state
  }

  int nsub = 2;
  for (int halving = 1; halving <= tol.max_halvings; ++halving, nsub *= 2) {
    Vec3 f = Vec3::Zero();
    try {
      ShootResult res;
      for (int k = 1; k <= nsub; ++k) {
        res = newton_shoot(shape, grid, section, target * (double(k) / nsub), f, tol, scale);
        f = res.f_ab.vec();
      }
      return res;
    } catch (const SingularJacobian&) {
      throw;
    } catch (const ShootFailure&) {
      continue;
    }
  }
  throw ShootFailure("shoot did not converge after target sub-stepping");
}

double end_moment_right(const InitialShape& shape, const LeftEndForces& f_ab,
                        const RightEndDisplacements& u_b) {
  const double L = shape.length();
  return -f_ab.M + f_ab.X * (shape.w_s0(L) + u_b.w) - f_ab.Z * (L + shape.u_s0(L) + u_b.u);
}

std::vector<std::pair<double, double>> deformed_shape(const MarchTrace& trace, const InitialShape& shape,
                                                      const GridSpec& grid) {
  std::vector<std::pair<double, double>> pts(grid.n + 1);
  for (std::size_t i = 0; i <= grid.n; ++i) {
    const double x = grid.x_nodes[i];
    pts[i] = {x + shape.u_s0(x) + trace.du[i], shape.w_s0(x) + trace.dw[i]};
  }
  return pts;
}

}  // namespace arcbeam
