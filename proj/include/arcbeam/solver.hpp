#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "arcbeam/frame.hpp"

namespace arcbeam {

enum class Dof { U = 0, W = 1, Phi = 2 };

struct Node {
  int id = 0;
  double x = 0.0, z = 0.0;
};

struct Support {
  int node = 0;
  bool fix[3] = {false, false, false};
};

struct NodalLoad {
  int node = 0;
  double fx = 0.0, fz = 0.0, m = 0.0;  // reference values, scaled by the load factor
};

struct ElementConfig {
  int id = 0;
  int node_a = 0, node_b = 0;
  InitialShape shape;
  SectionModel section;
  std::size_t nis = 16;
  GridSpec::Spacing spacing = GridSpec::Spacing::UniformArcLength;
};

struct SolverTolerances {
  double residual_rel = 1e-8;
  double dof_rel = 1e-10;
  int max_iterations = 30;
  int max_halvings = 8;
  ShootTolerances shoot;
};

struct ControlStrategy {
  enum class Type { Load, Displacement, Indirect, ArcLength };
  Type type = Type::Load;
  double increment = 0.0;  // load factor / dof / arc-length increment per step
  int steps = 1;
  int node = 0;            // Displacement, Indirect
  Dof dof = Dof::U;
  double psi = 0.0;        // ArcLength load-factor scaling
};

struct StructureModel {
  std::vector<Node> nodes;
  std::vector<ElementConfig> elements;
  std::vector<Support> supports;
  std::vector<NodalLoad> loads;
  SolverTolerances tol;

  std::size_t node_index(int id) const;
  int dof_index(int node_id, Dof dof) const { return 3 * static_cast<int>(node_index(node_id)) + static_cast<int>(dof); }
};

struct ElementEndForces {
  int element = 0;
  LeftEndForces f_ab;      // local
  double M_ba = 0.0;       // local right-end moment
  Vec3 f_ab_global = Vec3::Zero();
  Vec3 f_ba_global = Vec3::Zero();
  int shoot_iterations = 0;
};

struct SolutionStep {
  int step = 0;
  double lambda = 0.0;
  Eigen::VectorXd dofs;         // full vector, 3 per node
  Eigen::VectorXd reactions;    // internal force vector (reaction at fixed/controlled dofs)
  std::vector<ElementEndForces> elements;
  double residual_norm = 0.0;
  int iterations = 0;
  double det_tangent = 0.0;     // determinant of the free-free tangent block
};

struct PathResult {
  std::vector<SolutionStep> steps;
  bool completed = false;
  std::string failure;  // empty when completed
};

class Assembler {
 public:
  explicit Assembler(const StructureModel& model);

  std::size_t n_dofs() const { return 3 * model_.nodes.size(); }
  const std::vector<int>& free_dofs() const { return free_; }
  bool is_fixed(int dof) const { return fixed_[static_cast<std::size_t>(dof)]; }

  // internal force vector and tangent at the given dof state; element shoots
  // are warm-started from the forces cached by the previous call
  void assemble(const Eigen::VectorXd& dofs, Eigen::VectorXd& f_int, Eigen::MatrixXd& tangent,
                std::vector<ElementEndForces>* end_forces = nullptr);

  Eigen::VectorXd reference_load() const;

  void reset_warm_start();
  void save_warm_start();
  void restore_warm_start();

  const StructureModel& model() const { return model_; }
  const GridSpec& grid(std::size_t element_index) const { return grids_[element_index]; }
  const ElementPlacement& placement(std::size_t element_index) const { return placements_[element_index]; }
  const ShootResult& last_shoot(std::size_t element_index) const { return last_shoot_[element_index]; }

 private:
  const StructureModel& model_;
  std::vector<ElementPlacement> placements_;
  std::vector<GridSpec> grids_;
  std::vector<LeftEndForces> warm_, warm_saved_;
  std::vector<ShootResult> last_shoot_;
  std::vector<bool> fixed_;
  std::vector<int> free_;
};

PathResult solve_path(const StructureModel& model, const ControlStrategy& control);

// Tangent-stiffness load-deflection ratio in the undeformed configuration:
// assembles the tangent at zero dofs, solves K d = p for the free dofs and
// returns total_load / |d| at the designated dof.
double initial_stiffness_ratio(const StructureModel& model, int node, Dof dof, double total_load);

// Critical load by bisection on the control parameter: traces the path until
// det(K_ff) changes sign, then bisects the control increment.  Returns the
// control value and the conjugate reaction at the singular point.
struct CriticalPoint {
  double control_value = 0.0;
  double reaction = 0.0;
  double lambda = 0.0;
};
std::optional<CriticalPoint> find_critical_point(const StructureModel& model, const ControlStrategy& control,
                                                 double refine_tol);

}  // namespace arcbeam
