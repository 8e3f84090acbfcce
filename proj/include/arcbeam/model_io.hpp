#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>

#include "arcbeam/solver.hpp"

namespace arcbeam {

struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optional reporting directive carried by a model file, used by the
// convergence command.
struct ReportSpec {
  enum class Type { InitialStiffness, TrackedDof, MaxLoad };
  Type type = Type::TrackedDof;
  int node = 0;
  Dof dof = Dof::W;
  double total_load = 1.0;
};

struct TrackedDof {
  int node = 0;
  Dof dof = Dof::W;
};

struct ModelFile {
  StructureModel model;
  ControlStrategy control;
  std::vector<TrackedDof> track;
  std::optional<ReportSpec> report;
};

ModelFile parse_model(const nlohmann::json& j);
ModelFile load_model(const std::string& path);
nlohmann::json serialize_model(const ModelFile& mf);

// Free-end moment scenario for cantilever-mode runs (closed-loop elements
// that cannot be placed; see cmd_cantilever).
struct CantileverScenario {
  InitialShape shape;
  SectionModel section;
  std::size_t nis = 16;
  // applied free-end moment per output level: M_ba = level * scale, or
  // multiples of the exact straightening moment when use_m1 is set
  std::vector<double> levels;
  double scale = 1.0;
  bool use_m1 = false;
  bool compare_simplified = false;
  double normalize = 1.0;  // length used to normalize error metrics
};

CantileverScenario parse_cantilever(const nlohmann::json& j);
CantileverScenario load_cantilever(const std::string& path);

InitialShape parse_geometry(const nlohmann::json& j);
SectionModel parse_section(const nlohmann::json& j);
nlohmann::json serialize_geometry(const InitialShape& s);
nlohmann::json serialize_section(const SectionModel& s);

Dof parse_dof(const std::string& name);
std::string dof_name(Dof d);

}  // namespace arcbeam
