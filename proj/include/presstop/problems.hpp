#pragma once

#include "json.hpp"

#include <stdexcept>
#include <string>
#include <vector>

#include "presstop/darcy.hpp"
#include "presstop/elasticity.hpp"
#include "presstop/mesh.hpp"

namespace presstop {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A complete optimization problem: grid, optimizer and physics parameters,
// boundary data and non-design regions. All indices are 0-based (1-based node n
// is n - 1 here, and 1-based DOFs 2n - 1 / 2n are 2(n-1) / 2(n-1) + 1).
struct ProblemSpec {
  std::string name;
  Index nelx = 0;
  Index nely = 0;
  double volfrac = 0.3;
  double rmin = 2.4;
  int lst = 1;
  int maxit = 100;
  double move_limit = 0.1;
  FlowParams flow;           // carries etaf, betaf
  MaterialParams material;   // carries penal
  std::vector<PressureBc> pressure_bcs;  // sorted by node
  std::vector<Index> fixed_u_dofs;       // sorted
  ActiveSets sets;

  bool operator==(const ProblemSpec&) const = default;
};

// Throws ConfigError describing the first violated invariant.
void validate(const ProblemSpec& spec);

// True when the fixed DOFs suppress both translations and the rotation.
bool removes_rigid_body_modes(const GridMesh& grid, const std::vector<Index>& fixed_u_dofs);

enum class ArchSides {
  zero_pressure,  // left and right edges held at p = 0
  natural,        // left and right edges unconstrained
};

// Internally pressurized arch: Pin on the bottom edge, 0 on the top edge, both
// bottom corners pinned.
ProblemSpec make_arch(Index nelx = 200, Index nely = 100,
                      ArchSides sides = ArchSides::zero_pressure);
// Pressurized piston: Pin on the top edge, 0 on the bottom, x-rollers on the
// side edges and one pinned bottom node.
ProblemSpec make_piston(Index nelx = 300, Index nely = 100);
// Pressurized chamber with solid wall strips and a pressurized inlet channel.
ProblemSpec make_chamber(Index nelx = 300, Index nely = 200);

std::vector<std::string> problem_names();
// Named benchmark at its default size, or at (nelx, nely) when both are > 0.
// Throws ConfigError for unknown names.
ProblemSpec make_named(const std::string& name, Index nelx = 0, Index nely = 0);

// Builds and validates a problem from a configuration object (see README for
// the schema).
ProblemSpec build_custom(const nlohmann::json& config);

// Explicit configuration reproducing `spec` exactly under build_custom.
nlohmann::json to_config(const ProblemSpec& spec);

}  // namespace presstop
