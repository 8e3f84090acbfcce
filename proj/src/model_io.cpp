#include "arcbeam/model_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace arcbeam {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw SchemaError(path + ": " + msg);
}

double num(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) fail(path, std::string("missing numeric field '") + key + "'");
  return j[key].get<double>();
}

double num_or(const json& j, const char* key, double dflt) {
  return j.contains(key) ? j[key].get<double>() : dflt;
}

int integer(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) fail(path, std::string("missing integer field '") + key + "'");
  return j[key].get<int>();
}

std::string str(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) fail(path, std::string("missing string field '") + key + "'");
  return j[key].get<std::string>();
}

}  // namespace

Dof parse_dof(const std::string& name) {
  if (name == "u") return Dof::U;
  if (name == "w") return Dof::W;
  if (name == "phi") return Dof::Phi;
  throw SchemaError("unknown dof name '" + name + "' (expected u, w or phi)");
}

std::string dof_name(Dof d) {
  switch (d) {
    case Dof::U: return "u";
    case Dof::W: return "w";
    case Dof::Phi: return "phi";
  }
  return "?";
}

InitialShape parse_geometry(const json& j) {
  const std::string path = "geometry";
  const std::string kind = str(j, path, "kind");
  if (kind == "straight") return InitialShape::straight(num(j, path, "L"));
  if (kind == "circle") return InitialShape::circle(num(j, path, "kappa0"), num(j, path, "L"));
  if (kind == "parabola") return InitialShape::parabola(num(j, path, "a"), num(j, path, "L"));
  if (kind == "logspiral")
    return InitialShape::logspiral(num(j, path, "a"), num(j, path, "b"), num(j, path, "theta_max"));
  if (kind == "zigzag") {
    if (!j.contains("segments") || !j["segments"].is_array()) fail(path, "zigzag requires 'segments' array");
    std::vector<std::pair<double, double>> segs;
    for (const auto& s : j["segments"]) {
      if (!s.is_array() || s.size() != 2) fail(path, "each zigzag segment must be [length, angle]");
      segs.emplace_back(s[0].get<double>(), s[1].get<double>());
    }
    return InitialShape::zigzag(segs);
  }
  fail(path, "unknown geometry kind '" + kind + "'");
}

nlohmann::json serialize_geometry(const InitialShape& s) {
  json j;
  switch (s.kind()) {
    case InitialShape::Kind::Straight:
      j["kind"] = "straight";
      j["L"] = s.length();
      break;
    case InitialShape::Kind::Circle:
      j["kind"] = "circle";
      j["kappa0"] = s.kappa0(0.0);
      j["L"] = s.length();
      break;
    case InitialShape::Kind::Parabola:
      j["kind"] = "parabola";
      j["a"] = s.parabola().a;
      j["L"] = s.length();
      break;
    case InitialShape::Kind::LogSpiral: {
      const auto& d = s.logspiral();
      j["kind"] = "logspiral";
      j["a"] = d.a;
      j["b"] = d.b;
      j["theta_max"] = d.theta_max;
      break;
    }
    case InitialShape::Kind::PiecewiseStraight: {
      j["kind"] = "zigzag";
      json segs = json::array();
      for (const auto& seg : s.zigzag().segments) segs.push_back(json::array({seg.length, seg.angle}));
      j["segments"] = segs;
      break;
    }
  }
  return j;
}

SectionModel parse_section(const json& j) {
  const std::string path = "section";
  SectionLaw law = SectionLaw::Simplified;
  const bool direct = j.contains("EA");
  if (j.contains("law")) {
    const std::string l = str(j, path, "law");
    if (l == "consistent")
      law = SectionLaw::Consistent;
    else if (l == "simplified")
      law = SectionLaw::Simplified;
    else
      fail(path, "law must be 'consistent' or 'simplified'");
  } else if (!direct) {
    fail(path, "rectangular sections must state the law explicitly");
  }
  if (direct) {
    return SectionModel::from_stiffness(num(j, path, "EA"), num(j, path, "EI"), law);
  }
  InertiaModel im = InertiaModel::Exact;
  if (j.contains("inertia")) {
    const std::string m = str(j, path, "inertia");
    if (m == "exact")
      im = InertiaModel::Exact;
    else if (m == "quadratic")
      im = InertiaModel::Quadratic;
    else
      fail(path, "inertia must be 'exact' or 'quadratic'");
  }
  return SectionModel(num(j, path, "E"), num(j, path, "b"), num(j, path, "h"), law, im);
}

nlohmann::json serialize_section(const SectionModel& s) {
  json j;
  if (s.is_rectangle()) {
    j["E"] = s.E();
    j["b"] = s.b_s();
    j["h"] = s.h_s();
    j["law"] = s.law() == SectionLaw::Consistent ? "consistent" : "simplified";
    if (s.inertia_model() == InertiaModel::Quadratic) j["inertia"] = "quadratic";
  } else {
    j["EA"] = s.EA();
    j["EI"] = s.EI();
    j["law"] = s.law() == SectionLaw::Consistent ? "consistent" : "simplified";
  }
  return j;
}

ModelFile parse_model(const json& j) {
  ModelFile mf;
  if (!j.contains("nodes") || !j["nodes"].is_array() || j["nodes"].empty())
    throw SchemaError("nodes: expected a non-empty array");
  for (const auto& n : j["nodes"])
    mf.model.nodes.push_back({integer(n, "nodes[]", "id"), num(n, "nodes[]", "x"), num(n, "nodes[]", "z")});

  if (!j.contains("elements") || !j["elements"].is_array() || j["elements"].empty())
    throw SchemaError("elements: expected a non-empty array");
  for (const auto& e : j["elements"]) {
    ElementConfig ec{0, 0, 0, InitialShape::straight(1.0), SectionModel(1.0, 1.0, 1.0, SectionLaw::Simplified)};
    ec.id = integer(e, "elements[]", "id");
    if (!e.contains("nodes") || !e["nodes"].is_array() || e["nodes"].size() != 2)
      throw SchemaError("elements[].nodes: expected [node_a, node_b]");
    ec.node_a = e["nodes"][0].get<int>();
    ec.node_b = e["nodes"][1].get<int>();
    if (!e.contains("geometry")) throw SchemaError("elements[].geometry: missing");
    ec.shape = parse_geometry(e["geometry"]);
    if (!e.contains("section")) throw SchemaError("elements[].section: missing");
    ec.section = parse_section(e["section"]);
    ec.nis = static_cast<std::size_t>(integer(e, "elements[]", "nis"));
    if (e.contains("spacing")) {
      const std::string sp = str(e, "elements[]", "spacing");
      if (sp == "arclength")
        ec.spacing = GridSpec::Spacing::UniformArcLength;
      else if (sp == "projection")
        ec.spacing = GridSpec::Spacing::UniformProjection;
      else
        throw SchemaError("elements[].spacing: expected 'arclength' or 'projection'");
    }
    mf.model.elements.push_back(std::move(ec));
  }

  if (!j.contains("supports") || !j["supports"].is_array())
    throw SchemaError("supports: expected an array");
  for (const auto& s : j["supports"]) {
    Support sup;
    sup.node = integer(s, "supports[]", "node");
    if (!s.contains("fix") || !s["fix"].is_array()) throw SchemaError("supports[].fix: expected an array");
    for (const auto& d : s["fix"]) sup.fix[static_cast<int>(parse_dof(d.get<std::string>()))] = true;
    mf.model.supports.push_back(sup);
  }

  if (j.contains("loads")) {
    for (const auto& l : j["loads"]) {
      NodalLoad nl;
      nl.node = integer(l, "loads[]", "node");
      nl.fx = num_or(l, "fx", 0.0);
      nl.fz = num_or(l, "fz", 0.0);
      nl.m = num_or(l, "m", 0.0);
      mf.model.loads.push_back(nl);
    }
  }

  if (!j.contains("control")) throw SchemaError("control: missing");
  {
    const auto& c = j["control"];
    const std::string t = str(c, "control", "type");
    if (t == "load")
      mf.control.type = ControlStrategy::Type::Load;
    else if (t == "displacement")
      mf.control.type = ControlStrategy::Type::Displacement;
    else if (t == "indirect")
      mf.control.type = ControlStrategy::Type::Indirect;
    else if (t == "arclength")
      mf.control.type = ControlStrategy::Type::ArcLength;
    else
      throw SchemaError("control.type: expected load, displacement, indirect or arclength");
    mf.control.increment = num(c, "control", "increment");
    mf.control.steps = integer(c, "control", "steps");
    if (mf.control.type == ControlStrategy::Type::Displacement ||
        mf.control.type == ControlStrategy::Type::Indirect) {
      mf.control.node = integer(c, "control", "node");
      mf.control.dof = parse_dof(str(c, "control", "dof"));
    }
    mf.control.psi = num_or(c, "psi", 0.0);
  }

  if (j.contains("track")) {
    for (const auto& t : j["track"])
      mf.track.push_back({integer(t, "track[]", "node"), parse_dof(str(t, "track[]", "dof"))});
  }

  if (j.contains("report")) {
    const auto& r = j["report"];
    ReportSpec rs;
    const std::string t = str(r, "report", "type");
    if (t == "initial_stiffness")
      rs.type = ReportSpec::Type::InitialStiffness;
    else if (t == "tracked_dof")
      rs.type = ReportSpec::Type::TrackedDof;
    else if (t == "max_load")
      rs.type = ReportSpec::Type::MaxLoad;
    else
      throw SchemaError("report.type: expected initial_stiffness, tracked_dof or max_load");
    if (r.contains("node")) rs.node = integer(r, "report", "node");
    if (r.contains("dof")) rs.dof = parse_dof(str(r, "report", "dof"));
    rs.total_load = num_or(r, "total_load", 1.0);
    mf.report = rs;
  }

  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    mf.model.tol.residual_rel = num_or(t, "residual_rel", mf.model.tol.residual_rel);
    mf.model.tol.dof_rel = num_or(t, "dof_rel", mf.model.tol.dof_rel);
    mf.model.tol.shoot.abs_scale = num_or(t, "shoot_abs", mf.model.tol.shoot.abs_scale);
    mf.model.tol.shoot.rel = num_or(t, "shoot_rel", mf.model.tol.shoot.rel);
    if (t.contains("max_iterations")) mf.model.tol.max_iterations = t["max_iterations"].get<int>();
    if (t.contains("max_halvings")) mf.model.tol.max_halvings = t["max_halvings"].get<int>();
  }
  return mf;
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return parse_model(j);
}

nlohmann::json serialize_model(const ModelFile& mf) {
  json j;
  j["nodes"] = json::array();
  for (const auto& n : mf.model.nodes) j["nodes"].push_back({{"id", n.id}, {"x", n.x}, {"z", n.z}});
  j["elements"] = json::array();
  for (const auto& e : mf.model.elements) {
    json je;
    je["id"] = e.id;
    je["nodes"] = json::array({e.node_a, e.node_b});
    je["geometry"] = serialize_geometry(e.shape);
    je["section"] = serialize_section(e.section);
    je["nis"] = static_cast<int>(e.nis);
    if (e.spacing == GridSpec::Spacing::UniformProjection) je["spacing"] = "projection";
    j["elements"].push_back(je);
  }
  j["supports"] = json::array();
  for (const auto& s : mf.model.supports) {
    json fix = json::array();
    for (int k = 0; k < 3; ++k)
      if (s.fix[k]) fix.push_back(dof_name(static_cast<Dof>(k)));
    j["supports"].push_back({{"node", s.node}, {"fix", fix}});
  }
  if (!mf.model.loads.empty()) {
    j["loads"] = json::array();
    for (const auto& l : mf.model.loads) {
      json jl;
      jl["node"] = l.node;
      if (l.fx != 0.0) jl["fx"] = l.fx;
      if (l.fz != 0.0) jl["fz"] = l.fz;
      if (l.m != 0.0) jl["m"] = l.m;
      j["loads"].push_back(jl);
    }
  }
  json jc;
  switch (mf.control.type) {
    case ControlStrategy::Type::Load: jc["type"] = "load"; break;
    case ControlStrategy::Type::Displacement: jc["type"] = "displacement"; break;
    case ControlStrategy::Type::Indirect: jc["type"] = "indirect"; break;
    case ControlStrategy::Type::ArcLength: jc["type"] = "arclength"; break;
  }
  jc["increment"] = mf.control.increment;
  jc["steps"] = mf.control.steps;
  if (mf.control.type == ControlStrategy::Type::Displacement ||
      mf.control.type == ControlStrategy::Type::Indirect) {
    jc["node"] = mf.control.node;
    jc["dof"] = dof_name(mf.control.dof);
  }
  if (mf.control.psi != 0.0) jc["psi"] = mf.control.psi;
  j["control"] = jc;
  if (!mf.track.empty()) {
    j["track"] = json::array();
    for (const auto& t : mf.track) j["track"].push_back({{"node", t.node}, {"dof", dof_name(t.dof)}});
  }
  if (mf.report) {
    json jr;
    switch (mf.report->type) {
      case ReportSpec::Type::InitialStiffness: jr["type"] = "initial_stiffness"; break;
      case ReportSpec::Type::TrackedDof: jr["type"] = "tracked_dof"; break;
      case ReportSpec::Type::MaxLoad: jr["type"] = "max_load"; break;
    }
    jr["node"] = mf.report->node;
    jr["dof"] = dof_name(mf.report->dof);
    jr["total_load"] = mf.report->total_load;
    j["report"] = jr;
  }
  return j;
}

CantileverScenario parse_cantilever(const json& j) {
  CantileverScenario sc{InitialShape::straight(1.0), SectionModel(1.0, 1.0, 1.0, SectionLaw::Simplified)};
  if (!j.contains("geometry")) throw SchemaError("geometry: missing");
  sc.shape = parse_geometry(j["geometry"]);
  if (!j.contains("section")) throw SchemaError("section: missing");
  sc.section = parse_section(j["section"]);
  sc.nis = static_cast<std::size_t>(integer(j, "scenario", "nis"));
  if (!j.contains("moment")) throw SchemaError("moment: missing");
  const auto& m = j["moment"];
  if (!m.contains("levels") || !m["levels"].is_array()) throw SchemaError("moment.levels: expected an array");
  for (const auto& v : m["levels"]) sc.levels.push_back(v.get<double>());
  sc.use_m1 = m.contains("mode") && m["mode"].get<std::string>() == "m1_multiples";
  sc.scale = num_or(m, "scale", 1.0);
  sc.compare_simplified = j.contains("compare_simplified") && j["compare_simplified"].get<bool>();
  sc.normalize = num_or(j, "normalize", 1.0);
  return sc;
}

CantileverScenario load_cantilever(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return parse_cantilever(j);
}

}  // namespace arcbeam
