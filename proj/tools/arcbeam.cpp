#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "arcbeam/model_io.hpp"

namespace fs = std::filesystem;
using namespace arcbeam;

namespace {

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct CsvWriter {
  std::ofstream out;
  explicit CsvWriter(const fs::path& p) : out(p, std::ios::binary) {
    if (!out) throw std::runtime_error("cannot open output file " + p.string());
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  }
};

void apply_overrides(ModelFile& mf, int nis, const std::string& law) {
  for (auto& e : mf.model.elements) {
    if (nis > 0) e.nis = static_cast<std::size_t>(nis);
    if (!law.empty()) {
      const SectionLaw l = (law == "consistent") ? SectionLaw::Consistent : SectionLaw::Simplified;
      if (e.section.is_rectangle())
        e.section = SectionModel(e.section.E(), e.section.b_s(), e.section.h_s(), l,
                                 e.section.inertia_model());
      else
        e.section = SectionModel::from_stiffness(e.section.EA(), e.section.EI(), l);
    }
  }
}

int run_solve(const std::string& model_path, int nis, const std::string& law, const std::string& out_dir) {
  ModelFile mf = load_model(model_path);
  apply_overrides(mf, nis, law);
  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / "shapes");

  PathResult path = solve_path(mf.model, mf.control);

  const bool has_control_dof = mf.control.type == ControlStrategy::Type::Displacement ||
                               mf.control.type == ControlStrategy::Type::Indirect;
  int cdof = has_control_dof ? mf.model.dof_index(mf.control.node, mf.control.dof) : -1;

  {
    CsvWriter curve(fs::path(out_dir) / "curve.csv");
    std::vector<std::string> head = {"step", "lambda"};
    if (has_control_dof) {
      head.push_back("control");
      head.push_back("reaction");
    }
    for (const auto& t : mf.track)
      head.push_back("n" + std::to_string(t.node) + "_" + dof_name(t.dof));
    curve.row(head);
    for (const auto& s : path.steps) {
      std::vector<std::string> cells = {std::to_string(s.step), fmt9(s.lambda)};
      if (has_control_dof) {
        cells.push_back(fmt9(s.dofs[cdof]));
        cells.push_back(fmt9(s.reactions[cdof]));
      }
      for (const auto& t : mf.track) cells.push_back(fmt9(s.dofs[mf.model.dof_index(t.node, t.dof)]));
      curve.row(cells);
    }
  }

  {
    CsvWriter el(fs::path(out_dir) / "elements.csv");
    el.row({"step", "element", "X_ab", "Z_ab", "M_ab", "M_ba", "X_ab_g", "Z_ab_g", "X_ba_g", "Z_ba_g",
            "M_ba_g"});
    for (const auto& s : path.steps)
      for (const auto& e : s.elements)
        el.row({std::to_string(s.step), std::to_string(e.element), fmt9(e.f_ab.X), fmt9(e.f_ab.Z),
                fmt9(e.f_ab.M), fmt9(e.M_ba), fmt9(e.f_ab_global[0]), fmt9(e.f_ab_global[1]),
                fmt9(e.f_ba_global[0]), fmt9(e.f_ba_global[1]), fmt9(e.f_ba_global[2])});
  }

  // deformed shapes per recorded step, replayed from the converged states
  Assembler assembler(mf.model);
  for (const auto& s : path.steps) {
    CsvWriter shp(fs::path(out_dir) / "shapes" / ("step_" + std::to_string(s.step) + ".csv"));
    shp.row({"element", "i", "x", "z"});
    for (std::size_t ie = 0; ie < mf.model.elements.size(); ++ie) {
      const auto& ec = mf.model.elements[ie];
      const auto& p = assembler.placement(ie);
      const Vec3 ua = s.dofs.segment<3>(3 * static_cast<Eigen::Index>(mf.model.node_index(ec.node_a)));
      const Vec3 ub = s.dofs.segment<3>(3 * static_cast<Eigen::Index>(mf.model.node_index(ec.node_b)));
      const auto target = local_target_from_global(p, ua, ub);
      LeftEndForces warm = s.elements.empty() ? LeftEndForces{} : s.elements[ie].f_ab;
      const auto sr = shoot(ec.shape, assembler.grid(ie), ec.section, target, warm, mf.model.tol.shoot);
      const auto pts = deformed_shape(sr.trace, ec.shape, assembler.grid(ie));
      const Mat3 Tt = placement_T(p, ua[2]).transpose();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec3 g = Tt * Vec3(pts[i].first, pts[i].second, 0.0);
        shp.row({std::to_string(ec.id), std::to_string(i), fmt9(p.xa + ua[0] + g[0]),
                 fmt9(p.za + ua[1] + g[1])});
      }
    }
  }

  if (!path.completed) {
    std::cerr << "solver failure: " << path.failure << " (" << path.steps.size()
              << " steps written)\n";
    return 3;
  }
  std::cout << "wrote " << path.steps.size() << " steps to " << out_dir << "\n";
  return 0;
}

double evaluate_metric(const ModelFile& mf, const std::string& metric) {
  if (metric == "stiffness") {
    if (!mf.report || mf.report->type != ReportSpec::Type::InitialStiffness)
      throw SchemaError("metric 'stiffness' requires a report block of type initial_stiffness");
    return initial_stiffness_ratio(mf.model, mf.report->node, mf.report->dof, mf.report->total_load);
  }
  if (metric == "dof") {
    PathResult path = solve_path(mf.model, mf.control);
    if (!path.completed) throw ShootFailure("path failed: " + path.failure);
    int node = mf.report ? mf.report->node : mf.track.at(0).node;
    Dof dof = mf.report ? mf.report->dof : mf.track.at(0).dof;
    return path.steps.back().dofs[mf.model.dof_index(node, dof)];
  }
  if (metric == "maxload") {
    // limit point located by det(K) sign change and bisection on the control
    auto cp = find_critical_point(mf.model, mf.control, 1e-10);
    if (!cp) throw ShootFailure("no limit point detected along the path");
    return cp->lambda;
  }
  if (metric == "reaction") {
    PathResult path = solve_path(mf.model, mf.control);
    if (!path.completed) throw ShootFailure("path failed: " + path.failure);
    const int cdof = mf.model.dof_index(mf.control.node, mf.control.dof);
    return path.steps.back().reactions[cdof];
  }
  throw SchemaError("unknown metric '" + metric + "'");
}

int run_convergence(const std::string& model_path, const std::vector<int>& nis_list,
                    const std::string& metric, const std::string& law, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<double> values;
  for (int nis : nis_list) {
    ModelFile mf = load_model(model_path);
    apply_overrides(mf, nis, law);
    values.push_back(evaluate_metric(mf, metric));
  }
  const double richest = values.back();
  CsvWriter t(fs::path(out_dir) / "table.csv");
  t.row({"nis", "value", "error_vs_richest", "error_ratio"});
  double prev_err = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double err = values[i] - richest;
    std::vector<std::string> cells = {std::to_string(nis_list[i]), fmt9(values[i]), fmt9(err)};
    if (i > 0 && err != 0.0)
      cells.push_back(fmt9(prev_err / err));
    else
      cells.push_back("");
    t.row(cells);
    prev_err = err;
    std::cout << "nis=" << nis_list[i] << " value=" << fmt9(values[i]) << "\n";
  }
  return 0;
}

int run_cantilever(const std::string& scenario_path, const std::string& out_dir) {
  CantileverScenario sc = load_cantilever(scenario_path);
  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / "shapes");
  const GridSpec grid = build_grid(sc.shape, sc.nis);
  const double k00 = sc.shape.kappa0(0.0);
  const double m_unit = sc.use_m1 ? straightening_moment(sc.section, k00) : sc.scale;

  SectionModel simplified = sc.section.is_rectangle()
                                ? SectionModel(sc.section.E(), sc.section.b_s(), sc.section.h_s(),
                                               SectionLaw::Simplified, sc.section.inertia_model())
                                : SectionModel::from_stiffness(sc.section.EA(), sc.section.EI(),
                                                               SectionLaw::Simplified);

  CsvWriter metrics(fs::path(out_dir) / "metrics.csv");
  metrics.row({"level", "m_end", "du_end", "dw_end", "dphi_end", "du_mid", "dw_mid", "err_norm"});
  for (std::size_t k = 0; k < sc.levels.size(); ++k) {
    const double level = sc.levels[k];
    const double m_end = level * m_unit;       // applied free-end moment
    const LeftEndForces fab{0.0, 0.0, -m_end};  // left-end reaction under pure bending
    MarchTrace trace;
    const auto gb = march(sc.shape, grid, sc.section, fab, &trace);
    const std::size_t imid = grid.n / 2;
    std::string err = "";
    if (sc.compare_simplified) {
      const auto gs = march(sc.shape, grid, simplified, fab);
      err = fmt9(std::hypot(gb.u - gs.u, gb.w - gs.w) / sc.normalize);
    }
    metrics.row({fmt9(level), fmt9(m_end), fmt9(gb.u), fmt9(gb.w), fmt9(gb.phi), fmt9(trace.du[imid]),
                 fmt9(trace.dw[imid]), err});
    CsvWriter shp(fs::path(out_dir) / "shapes" / ("level_" + std::to_string(k) + ".csv"));
    shp.row({"i", "x", "z"});
    const auto pts = deformed_shape(trace, sc.shape, grid);
    for (std::size_t i = 0; i < pts.size(); ++i)
      shp.row({std::to_string(i), fmt9(pts[i].first), fmt9(pts[i].second)});
  }
  std::cout << "wrote " << sc.levels.size() << " levels to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arcbeam - planar geometrically exact curved beam solver"};
  app.require_subcommand(1);

  std::string model_path, out_dir = "out", law;
  int nis = 0;

  auto* solve = app.add_subcommand("solve", "trace an equilibrium path and emit CSV curves and shapes");
  solve->add_option("model", model_path, "model file (JSON)")->required();
  solve->add_option("--nis", nis, "override integration segments per element");
  solve->add_option("--law", law, "override sectional law")->check(CLI::IsMember({"consistent", "simplified"}));
  solve->add_option("--out", out_dir, "output directory");

  std::vector<int> nis_list;
  std::string metric = "dof";
  auto* conv = app.add_subcommand("convergence", "rerun per NIS and emit a convergence table");
  conv->add_option("model", model_path, "model file (JSON)")->required();
  conv->add_option("--nis", nis_list, "NIS values")->required()->delimiter(',');
  conv->add_option("--metric", metric, "value to tabulate")
      ->check(CLI::IsMember({"dof", "maxload", "stiffness", "reaction"}));
  conv->add_option("--law", law, "override sectional law")->check(CLI::IsMember({"consistent", "simplified"}));
  conv->add_option("--out", out_dir, "output directory");

  auto* cant = app.add_subcommand("cantilever", "drive a single element by a free-end moment history");
  cant->add_option("scenario", model_path, "scenario file (JSON)")->required();
  cant->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(model_path, nis, law, out_dir);
    if (conv->parsed()) return run_convergence(model_path, nis_list, metric, law, out_dir);
    if (cant->parsed()) return run_cantilever(model_path, out_dir);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
