#include "arcbeam/section.hpp"

#include <cmath>

namespace arcbeam {

double modified_inertia_rect(double b_s, double h_s, double kappa0) {
  const double hk = h_s * kappa0;
  if (std::abs(hk) >= 2.0)
    throw ModelError("section invalid: |h_s * kappa0| >= 2 places the inner fiber at the curvature center");
  if (std::abs(hk) < 1e-4) {
    const double hk2 = hk * hk;
    return b_s * h_s * h_s * h_s * (1.0 / 12.0 + hk2 / 80.0 + hk2 * hk2 / 448.0);
  }
  return b_s / (kappa0 * kappa0 * kappa0) * (std::log((2.0 + hk) / (2.0 - hk)) - hk);
}

SectionModel::SectionModel(double E, double b_s, double h_s, SectionLaw law, InertiaModel inertia)
    : E_(E), b_(b_s), h_(h_s), law_(law), inertia_(inertia) {
  if (E <= 0.0 || b_s <= 0.0 || h_s <= 0.0) throw ModelError("section requires positive E, b_s, h_s");
  A_ = b_ * h_;
  I_ = b_ * h_ * h_ * h_ / 12.0;
}

SectionModel SectionModel::from_stiffness(double EA, double EI, SectionLaw law) {
  if (EA <= 0.0 || EI <= 0.0) throw ModelError("section requires positive EA, EI");
  // E = 1, A = EA, I = EI; the equivalent rectangle is only needed for the
  // Consistent law, h_s = sqrt(12 EI / EA)
  SectionModel s(1.0, 1.0, 1.0, law);
  s.E_ = 1.0;
  s.A_ = EA;
  s.I_ = EI;
  s.h_ = std::sqrt(12.0 * EI / EA);
  s.b_ = EA / s.h_;
  s.rectangle_ = false;
  return s;
}

double SectionModel::I_k(double kappa0) const {
  if (law_ == SectionLaw::Simplified || kappa0 == 0.0) return I_;
  if (inertia_ == InertiaModel::Quadratic) {
    const double hk = h_ * kappa0;
    return b_ * h_ * h_ * h_ * (1.0 / 12.0 + hk * hk / 80.0);
  }
  return modified_inertia_rect(b_, h_, kappa0);
}

CurvedCharacteristics SectionModel::characteristics(double kappa0) const {
  const double k0 = kappa0_eff(kappa0);
  CurvedCharacteristics c;
  c.kappa0 = k0;
  c.I_k = I_k(k0);
  c.S_k = -k0 * c.I_k;
  c.A_k = A_ + k0 * k0 * c.I_k;
  return c;
}

Resultants SectionModel::forces_from_strain(const CurvedCharacteristics& c, const StrainState& s) const {
  if (law_ == SectionLaw::Simplified)
    return {EA() * s.eps_s, EI() * s.dkappa};
  return {E_ * (c.A_k * s.eps_s + c.S_k * s.dkappa), E_ * (c.S_k * s.eps_s + c.I_k * s.dkappa)};
}

StrainState SectionModel::strain_from_forces(const CurvedCharacteristics& c, const Resultants& r) const {
  if (law_ == SectionLaw::Simplified)
    return {r.N / EA(), r.M / EI()};
  StrainState s;
  s.eps_s = (r.N + c.kappa0 * r.M) / EA();
  s.dkappa = r.M / (E_ * c.I_k) + c.kappa0 * s.eps_s;
  return s;
}

double straightening_moment(const SectionModel& section, double kappa0) {
  if (section.law() == SectionLaw::Simplified) return -kappa0 * section.EI();
  const double EIk = section.E() * section.I_k(kappa0);
  return -kappa0 / (1.0 / EIk + kappa0 * kappa0 / section.EA());
}

namespace {

// adaptive Simpson over [a, b]
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0) throw ModelError("sectional quadrature failed to converge");
  if (std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = rel_tol * (std::abs(whole) + 1e-300) + 1e-300;
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

CubicCharacteristics cubic_characteristics(double b_s, double h_s, double kappa0) {
  if (std::abs(h_s * kappa0) >= 2.0) throw ModelError("section invalid: |h_s * kappa0| >= 2");
  auto kernel = [&](int p) {
    return integrate(
        [&](double z) {
          const double d = 1.0 + z * kappa0;
          return b_s * std::pow(z, p) / (d * d * d);
        },
        -0.5 * h_s, 0.5 * h_s, 1e-12);
  };
  return {kernel(0), kernel(1), kernel(2), kernel(3), kernel(4)};
}

Resultants stvk_resultants(const SectionModel& section, double kappa0, const StrainState& state) {
  if (!section.is_rectangle()) throw ModelError("StVK resultants require a rectangular section");
  const auto c = cubic_characteristics(section.b_s(), section.h_s(), kappa0);
  const double E = section.E();
  const double es = state.eps_s, dk = state.dkappa, k0 = kappa0;
  const double f1 = 2.0 * es + 3.0 * es * es + es * es * es;
  const double f2 = k0 * es * (4.0 + 3.0 * es) + (2.0 + 6.0 * es + 3.0 * es * es) * dk;
  const double f3 = (2.0 * k0 * k0 + 6.0 * k0 * dk + 3.0 * dk * dk) * es + 4.0 * k0 * dk + 3.0 * dk * dk;
  const double f4 = 2.0 * k0 * k0 * dk + 3.0 * k0 * dk * dk + dk * dk * dk;
  Resultants r;
  r.N = 0.5 * E * (c.A3 * f1 + c.S3 * f2 + c.I3 * f3 + c.J3 * f4);
  r.M = 0.5 * E * (c.S3 * f1 + c.I3 * f2 + c.J3 * f3 + c.K3 * f4);
  return r;
}

Resultants law_resultants(const SectionModel& section, double kappa0, const StrainState& state,
                          const std::function<double(double)>& sigma_of_lambda) {
  if (!section.is_rectangle()) throw ModelError("law resultants require a rectangular section");
  const double b = section.b_s(), h = section.h_s();
  auto stretch = [&](double z) {
    return 1.0 + (state.eps_s + z * state.dkappa) / (1.0 + z * kappa0);
  };
  Resultants r;
  r.N = integrate([&](double z) { return b * sigma_of_lambda(stretch(z)); }, -0.5 * h, 0.5 * h, 1e-10);
  r.M = integrate([&](double z) { return b * z * sigma_of_lambda(stretch(z)); }, -0.5 * h, 0.5 * h, 1e-10);
  return r;
}

}  // namespace arcbeam
