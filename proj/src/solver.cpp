#include "arcbeam/solver.hpp"

#include <algorithm>
#include <cmath>

namespace arcbeam {

std::size_t StructureModel::node_index(int id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return i;
  throw ModelError("unknown node id " + std::to_string(id));
}

Assembler::Assembler(const StructureModel& model) : model_(model) {
  if (model.nodes.empty()) throw ModelError("model has no nodes");
  if (model.supports.empty()) throw ModelError("model has no supports");
  for (const auto& e : model.elements) {
    const auto& na = model.nodes[model.node_index(e.node_a)];
    const auto& nb = model.nodes[model.node_index(e.node_b)];
    placements_.push_back(make_placement(e.shape, e.node_a, e.node_b, na.x, na.z, nb.x, nb.z));
    grids_.push_back(build_grid(e.shape, e.nis, e.spacing));
  }
  warm_.assign(model.elements.size(), LeftEndForces{});
  warm_saved_ = warm_;
  last_shoot_.resize(model.elements.size());
  fixed_.assign(n_dofs(), false);
  for (const auto& s : model.supports) {
    const std::size_t base = 3 * model.node_index(s.node);
    for (int k = 0; k < 3; ++k)
      if (s.fix[k]) fixed_[base + static_cast<std::size_t>(k)] = true;
  }
  for (std::size_t i = 0; i < n_dofs(); ++i)
    if (!fixed_[i]) free_.push_back(static_cast<int>(i));
}

void Assembler::reset_warm_start() { warm_.assign(model_.elements.size(), LeftEndForces{}); }
void Assembler::save_warm_start() { warm_saved_ = warm_; }
void Assembler::restore_warm_start() { warm_ = warm_saved_; }

void Assembler::assemble(const Eigen::VectorXd& dofs, Eigen::VectorXd& f_int, Eigen::MatrixXd& tangent,
                         std::vector<ElementEndForces>* end_forces) {
  const std::size_t nd = n_dofs();
  f_int.setZero(static_cast<Eigen::Index>(nd));
  tangent.setZero(static_cast<Eigen::Index>(nd), static_cast<Eigen::Index>(nd));
  if (end_forces) end_forces->clear();

  for (std::size_t ie = 0; ie < model_.elements.size(); ++ie) {
    const auto& e = model_.elements[ie];
    const auto& p = placements_[ie];
    const int ia = 3 * static_cast<int>(model_.node_index(e.node_a));
    const int ib = 3 * static_cast<int>(model_.node_index(e.node_b));
    const Vec3 ua = dofs.segment<3>(ia);
    const Vec3 ub = dofs.segment<3>(ib);

    const RightEndDisplacements target = local_target_from_global(p, ua, ub);
    ShootResult sr;
    try {
      sr = shoot(e.shape, grids_[ie], e.section, target, warm_[ie], model_.tol.shoot);
    } catch (const ShootFailure& err) {
      throw ShootFailure("element " + std::to_string(e.id) + ": " + err.what());
    }
    warm_[ie] = sr.f_ab;

    const Vec3 fab_g = global_forces_from_local(p, ua[2], sr.f_ab);
    const Vec3 fba_g = global_right_end_forces(p, ua, ub, fab_g);
    f_int.segment<3>(ia) += fab_g;
    f_int.segment<3>(ib) += fba_g;

    const Mat6 K = element_tangent(p, ua, ub, sr.f_ab, sr.G);
    for (int r = 0; r < 6; ++r) {
      const int gr = (r < 3 ? ia + r : ib + r - 3);
      for (int c = 0; c < 6; ++c) {
        const int gc = (c < 3 ? ia + c : ib + c - 3);
        tangent(gr, gc) += K(r, c);
      }
    }

    if (end_forces) {
      ElementEndForces ef;
      ef.element = e.id;
      ef.f_ab = sr.f_ab;
      ef.M_ba = end_moment_right(e.shape, sr.f_ab,
                                 RightEndDisplacements::from(target.vec()));
      ef.f_ab_global = fab_g;
      ef.f_ba_global = fba_g;
      ef.shoot_iterations = sr.iterations;
      end_forces->push_back(ef);
    }
    last_shoot_[ie] = std::move(sr);
  }
}

Eigen::VectorXd Assembler::reference_load() const {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_dofs()));
  for (const auto& l : model_.loads) {
    const int base = 3 * static_cast<int>(model_.node_index(l.node));
    p[base + 0] += l.fx;
    p[base + 1] += l.fz;
    p[base + 2] += l.m;
  }
  return p;
}

namespace {

struct NewtonWork {
  Eigen::VectorXd f_int;
  Eigen::MatrixXd K;
  Eigen::MatrixXd Kff;
  Eigen::VectorXd r_free;
};

void gather_free(const std::vector<int>& free, const Eigen::MatrixXd& K, const Eigen::VectorXd& r,
                 Eigen::MatrixXd& Kff, Eigen::VectorXd& rf) {
  const auto nf = static_cast<Eigen::Index>(free.size());
  Kff.resize(nf, nf);
  rf.resize(nf);
  for (Eigen::Index i = 0; i < nf; ++i) {
    rf[i] = r[free[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < nf; ++j)
      Kff(i, j) = K(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
  }
}

struct StepState {
  Eigen::VectorXd dofs;
  double lambda = 0.0;
};

}  // namespace

PathResult solve_path(const StructureModel& model, const ControlStrategy& control) {
  Assembler assembler(model);
  const Eigen::VectorXd p_ref = assembler.reference_load();
  const double p_norm = p_ref.norm();
  const auto& free = assembler.free_dofs();
  const auto nf = static_cast<Eigen::Index>(free.size());
  const auto nd = static_cast<Eigen::Index>(assembler.n_dofs());

  const bool has_control_dof =
      control.type == ControlStrategy::Type::Displacement || control.type == ControlStrategy::Type::Indirect;
  int cdof = -1;
  if (has_control_dof) cdof = model.dof_index(control.node, control.dof);
  if (control.type == ControlStrategy::Type::Displacement) {
    if (!assembler.is_fixed(cdof))
      throw ModelError("displacement control requires the controlled dof to be a prescribed support dof");
    if (p_norm > 0.0) throw ModelError("displacement control does not combine with a reference load");
  }
  if (control.type == ControlStrategy::Type::Indirect && assembler.is_fixed(cdof))
    throw ModelError("indirect control requires the controlled dof to be free");
  if ((control.type == ControlStrategy::Type::Load || control.type == ControlStrategy::Type::Indirect ||
       control.type == ControlStrategy::Type::ArcLength) &&
      p_norm == 0.0)
    throw ModelError("control strategy requires a nonzero reference load");

  // position in the free-dof numbering for the indirect control dof
  int cfree = -1;
  if (control.type == ControlStrategy::Type::Indirect)
    cfree = static_cast<int>(std::find(free.begin(), free.end(), cdof) - free.begin());

  PathResult out;
  StepState cur;
  cur.dofs = Eigen::VectorXd::Zero(nd);
  cur.lambda = 0.0;

  NewtonWork w;
  Eigen::VectorXd p_free(nf);
  for (Eigen::Index i = 0; i < nf; ++i) p_free[i] = p_ref[free[static_cast<std::size_t>(i)]];

  const double res_tol = model.tol.residual_rel * (1.0 + p_norm);

  // previous converged increment, used as arc-length / indirect predictor
  Eigen::VectorXd prev_dd = Eigen::VectorXd::Zero(nf);
  double prev_dl = 0.0;
  bool have_prev = false;

  auto newton_converge = [&](StepState& st, int* iters_out) -> bool {
    // Load / Displacement control: plain Newton on the free dofs.
    for (int it = 0; it < model.tol.max_iterations; ++it) {
      try {
        assembler.assemble(st.dofs, w.f_int, w.K, nullptr);
      } catch (const ShootFailure&) {
        return false;
      }
      Eigen::VectorXd r = st.lambda * p_ref - w.f_int;
      gather_free(free, w.K, r, w.Kff, w.r_free);
      Eigen::VectorXd dd = Eigen::VectorXd::Zero(nf);
      bool small_dd = true;
      if (nf > 0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(w.Kff);
        if (!lu.isInvertible()) return false;
        dd = lu.solve(w.r_free);
        for (Eigen::Index i = 0; i < nf; ++i) st.dofs[free[static_cast<std::size_t>(i)]] += dd[i];
        small_dd = dd.norm() <= model.tol.dof_rel * (1.0 + st.dofs.norm());
      }
      if (w.r_free.norm() <= res_tol && (it > 0 || nf == 0) && small_dd) {
        if (iters_out) *iters_out = it + 1;
        return true;
      }
      if (nf == 0) {
        if (iters_out) *iters_out = it + 1;
        return true;
      }
    }
    return false;
  };

  auto indirect_converge = [&](StepState& st, double target_control, int* iters_out) -> bool {
    for (int it = 0; it < model.tol.max_iterations; ++it) {
      try {
        assembler.assemble(st.dofs, w.f_int, w.K, nullptr);
      } catch (const ShootFailure&) {
        return false;
      }
      Eigen::VectorXd r = st.lambda * p_ref - w.f_int;
      gather_free(free, w.K, r, w.Kff, w.r_free);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(w.Kff);
      if (!lu.isInvertible()) return false;
      const Eigen::VectorXd v1 = lu.solve(w.r_free);
      const Eigen::VectorXd v2 = lu.solve(p_free);
      const double gap = target_control - st.dofs[cdof];
      const double denom = v2[cfree];
      if (std::abs(denom) < 1e-300) return false;
      const double dl = (gap - v1[cfree]) / denom;
      const Eigen::VectorXd dd = v1 + dl * v2;
      for (Eigen::Index i = 0; i < nf; ++i) st.dofs[free[static_cast<std::size_t>(i)]] += dd[i];
      st.lambda += dl;
      const bool small = dd.norm() <= model.tol.dof_rel * (1.0 + st.dofs.norm());
      if (w.r_free.norm() <= res_tol && std::abs(gap) <= model.tol.dof_rel * (1.0 + std::abs(target_control)) &&
          it > 0 && small) {
        if (iters_out) *iters_out = it + 1;
        return true;
      }
    }
    return false;
  };

  auto arclength_converge = [&](StepState& st, double ds, int* iters_out) -> bool {
    // predictor
    Eigen::VectorXd dd_acc(nf);
    double dl_acc;
    const double psi2 = control.psi * control.psi * p_norm * p_norm;
    if (have_prev && (prev_dd.norm() > 0 || prev_dl != 0.0)) {
      const double len = std::sqrt(prev_dd.squaredNorm() + psi2 * prev_dl * prev_dl);
      const double sc = (len > 0) ? ds / len : 0.0;
      dd_acc = prev_dd * sc;
      dl_acc = prev_dl * sc;
    } else {
      try {
        assembler.assemble(st.dofs, w.f_int, w.K, nullptr);
      } catch (const ShootFailure&) {
        return false;
      }
      Eigen::VectorXd r0 = st.lambda * p_ref - w.f_int;
      gather_free(free, w.K, r0, w.Kff, w.r_free);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(w.Kff);
      if (!lu.isInvertible()) return false;
      const Eigen::VectorXd v2 = lu.solve(p_free);
      double dl0 = ds / std::sqrt(v2.squaredNorm() + psi2);
      dd_acc = dl0 * v2;
      dl_acc = dl0;
    }
    const Eigen::VectorXd dd_pred = dd_acc;
    const double dl_pred = dl_acc;
    for (Eigen::Index i = 0; i < nf; ++i) st.dofs[free[static_cast<std::size_t>(i)]] += dd_acc[i];
    st.lambda += dl_acc;

    for (int it = 0; it < model.tol.max_iterations; ++it) {
      try {
        assembler.assemble(st.dofs, w.f_int, w.K, nullptr);
      } catch (const ShootFailure&) {
        return false;
      }
      Eigen::VectorXd r = st.lambda * p_ref - w.f_int;
      gather_free(free, w.K, r, w.Kff, w.r_free);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(w.Kff);
      if (!lu.isInvertible()) return false;
      const Eigen::VectorXd v1 = lu.solve(w.r_free);
      const Eigen::VectorXd v2 = lu.solve(p_free);
      // spherical constraint on (dd_acc + v1 + dl v2, dl_acc + dl)
      const Eigen::VectorXd base = dd_acc + v1;
      const double a = v2.squaredNorm() + psi2;
      const double b = 2.0 * (v2.dot(base) + psi2 * dl_acc);
      const double c = base.squaredNorm() + psi2 * dl_acc * dl_acc - ds * ds;
      const double disc = b * b - 4.0 * a * c;
      if (disc < 0.0) return false;
      const double sq = std::sqrt(disc);
      const double r1 = (-b + sq) / (2.0 * a);
      const double r2 = (-b - sq) / (2.0 * a);
      auto continuation = [&](double dl) {
        return (base + dl * v2).dot(dd_pred) + psi2 * (dl_acc + dl) * dl_pred;
      };
      const double dl = continuation(r1) >= continuation(r2) ? r1 : r2;
      const Eigen::VectorXd dd = v1 + dl * v2;
      for (Eigen::Index i = 0; i < nf; ++i) st.dofs[free[static_cast<std::size_t>(i)]] += dd[i];
      st.lambda += dl;
      dd_acc += dd;
      dl_acc += dl;
      if (w.r_free.norm() <= res_tol && it > 0 && dd.norm() <= model.tol.dof_rel * (1.0 + st.dofs.norm())) {
        prev_dd = dd_acc;
        prev_dl = dl_acc;
        have_prev = true;
        if (iters_out) *iters_out = it + 1;
        return true;
      }
    }
    return false;
  };

  for (int step_index = 1; step_index <= control.steps; ++step_index) {
    double remaining = 1.0;  // fraction of this nominal increment still to apply
    double frac = 1.0;
    int halvings = 0;
    int iters_total = 0;
    while (remaining > 1e-12) {
      const double attempt = std::min(frac, remaining);
      StepState trial = cur;
      assembler.save_warm_start();
      int iters = 0;
      bool ok = false;
      switch (control.type) {
        case ControlStrategy::Type::Load:
          trial.lambda = cur.lambda + control.increment * attempt;
          ok = newton_converge(trial, &iters);
          break;
        case ControlStrategy::Type::Displacement:
          trial.dofs[cdof] = cur.dofs[cdof] + control.increment * attempt;
          ok = newton_converge(trial, &iters);
          break;
        case ControlStrategy::Type::Indirect:
          ok = indirect_converge(trial, cur.dofs[cdof] + control.increment * attempt, &iters);
          break;
        case ControlStrategy::Type::ArcLength:
          ok = arclength_converge(trial, control.increment * attempt, &iters);
          break;
      }
      if (ok) {
        cur = trial;
        remaining -= attempt;
        iters_total += iters;
        frac = std::min(1.0, frac * 2.0);
      } else {
        assembler.restore_warm_start();
        ++halvings;
        if (halvings > model.tol.max_halvings) {
          out.completed = false;
          out.failure = "no convergence at step " + std::to_string(step_index) + " after " +
                        std::to_string(model.tol.max_halvings) + " halvings";
          return out;
        }
        frac *= 0.5;
      }
    }
    SolutionStep rec;
    rec.step = step_index;
    rec.lambda = cur.lambda;
    rec.dofs = cur.dofs;
    std::vector<ElementEndForces> efs;
    assembler.assemble(cur.dofs, w.f_int, w.K, &efs);
    rec.reactions = w.f_int;
    rec.elements = std::move(efs);
    Eigen::VectorXd r = cur.lambda * p_ref - w.f_int;
    gather_free(free, w.K, r, w.Kff, w.r_free);
    rec.residual_norm = w.r_free.norm();
    rec.iterations = iters_total;
    rec.det_tangent = (nf > 0) ? w.Kff.fullPivLu().determinant() : 0.0;
    out.steps.push_back(std::move(rec));
  }
  out.completed = true;
  return out;
}

double initial_stiffness_ratio(const StructureModel& model, int node, Dof dof, double total_load) {
  Assembler assembler(model);
  Eigen::VectorXd f_int;
  Eigen::MatrixXd K;
  Eigen::VectorXd d0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(assembler.n_dofs()));
  assembler.assemble(d0, f_int, K);
  const Eigen::VectorXd p = assembler.reference_load();
  const auto& free = assembler.free_dofs();
  Eigen::MatrixXd Kff;
  Eigen::VectorXd pf;
  gather_free(free, K, p, Kff, pf);
  const Eigen::VectorXd d = Kff.fullPivLu().solve(pf);
  const int target = model.dof_index(node, dof);
  for (std::size_t i = 0; i < free.size(); ++i)
    if (free[i] == target) return total_load / std::abs(d[static_cast<Eigen::Index>(i)]);
  throw ModelError("initial stiffness ratio: designated dof is not free");
}

std::optional<CriticalPoint> find_critical_point(const StructureModel& model,
                                                 const ControlStrategy& control, double refine_tol) {
  PathResult path = solve_path(model, control);
  const int cdof = model.dof_index(control.node, control.dof);

  double prev_det = 0.0, prev_ctrl = 0.0;
  bool have = false;
  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  for (const auto& s : path.steps) {
    const double det = s.det_tangent;
    const double ctrl = s.dofs[cdof];
    if (have && prev_det * det < 0.0) {
      lo = prev_ctrl;
      hi = ctrl;
      bracketed = true;
      break;
    }
    prev_det = det;
    prev_ctrl = ctrl;
    have = true;
  }
  if (!bracketed) return std::nullopt;

  // bisection on the control value; each evaluation re-traces from zero with
  // a single control step (robust, and cheap at the desk scales used here)
  auto det_at = [&](double ctrl_value) {
    ControlStrategy c = control;
    c.increment = ctrl_value;
    c.steps = 1;
    StructureModel m = model;
    m.tol.max_halvings = std::max(m.tol.max_halvings, 12);
    PathResult r = solve_path(m, c);
    if (!r.completed || r.steps.empty()) throw ShootFailure("critical point refinement failed");
    return std::make_pair(r.steps.back().det_tangent, r.steps.back());
  };

  auto [dlo, slo] = det_at(lo);
  SolutionStep best = slo;
  for (int it = 0; it < 200 && (hi - lo) > refine_tol * (std::abs(hi) + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    auto [dm, sm] = det_at(mid);
    if (dlo * dm <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      dlo = dm;
      best = sm;
    }
  }
  CriticalPoint cp;
  cp.control_value = 0.5 * (lo + hi);
  cp.lambda = best.lambda;
  cp.reaction = best.reactions[cdof];
  return cp;
}

}  // namespace arcbeam
