#pragma once

#include <functional>

#include "arcbeam/geometry.hpp"

namespace arcbeam {

enum class SectionLaw { Consistent, Simplified };

// Modified inertia evaluation: closed form of the log expression, or the
// quadratic approximation bh^3(1/12 + h^2 kappa0^2/80).
enum class InertiaModel { Exact, Quadratic };

struct CurvedCharacteristics {
  double kappa0 = 0.0;
  double A_k = 0.0;
  double S_k = 0.0;
  double I_k = 0.0;
};

struct StrainState {
  double eps_s = 0.0;   // centerline strain, lambda_s - 1
  double dkappa = 0.0;  // curvature change kappa - kappa0
};

struct Resultants {
  double N = 0.0;
  double M = 0.0;
};

class SectionModel {
 public:
  // rectangle b_s x h_s
  SectionModel(double E, double b_s, double h_s, SectionLaw law,
               InertiaModel inertia = InertiaModel::Exact);
  // direct stiffness pair; Consistent law derives h_s = sqrt(12 EI / EA)
  static SectionModel from_stiffness(double EA, double EI, SectionLaw law = SectionLaw::Simplified);

  double E() const { return E_; }
  double A() const { return A_; }
  double I() const { return I_; }
  double EA() const { return E_ * A_; }
  double EI() const { return E_ * I_; }
  double b_s() const { return b_; }
  double h_s() const { return h_; }
  bool is_rectangle() const { return rectangle_; }
  SectionLaw law() const { return law_; }
  InertiaModel inertia_model() const { return inertia_; }

  // modified moment of inertia I_k(kappa0); equals I for the Simplified law
  double I_k(double kappa0) const;
  // curvature entering the sectional relations; zero for the Simplified law
  double kappa0_eff(double kappa0) const { return law_ == SectionLaw::Simplified ? 0.0 : kappa0; }

  CurvedCharacteristics characteristics(double kappa0) const;

  Resultants forces_from_strain(const CurvedCharacteristics& c, const StrainState& s) const;
  StrainState strain_from_forces(const CurvedCharacteristics& c, const Resultants& r) const;

 private:
  double E_ = 0.0, b_ = 0.0, h_ = 0.0, A_ = 0.0, I_ = 0.0;
  bool rectangle_ = true;
  SectionLaw law_ = SectionLaw::Consistent;
  InertiaModel inertia_ = InertiaModel::Exact;
};

// Modified moment of inertia of a rectangle, eq. with the log closed form;
// below |h kappa0| = 1e-4 a series branch avoids cancellation.
double modified_inertia_rect(double b_s, double h_s, double kappa0);

// Internal bending moment under pure bending (N = 0) that maps the section
// curvature from kappa0 to exactly zero, using the section's own law and
// inertia model: M = -kappa0 / (1/(E I_k) + kappa0^2/(EA)).
double straightening_moment(const SectionModel& section, double kappa0);

// St. Venant-Kirchhoff sectional resultants for a rectangle, by adaptive
// quadrature of the closed polynomial forms; verification path only.
Resultants stvk_resultants(const SectionModel& section, double kappa0, const StrainState& state);

// Generic resultants for a caller-supplied uniaxial law sigma(lambda),
// integrated over the stretch field of the curved section.
Resultants law_resultants(const SectionModel& section, double kappa0, const StrainState& state,
                          const std::function<double(double)>& sigma_of_lambda);

// Cubic-kernel characteristics A3..K3 (integrands z^k / (1+z kappa0)^3),
// evaluated by adaptive quadrature; used by the StVK verification path.
struct CubicCharacteristics {
  double A3, S3, I3, J3, K3;
};
CubicCharacteristics cubic_characteristics(double b_s, double h_s, double kappa0);

}  // namespace arcbeam
