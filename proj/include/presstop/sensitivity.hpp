#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "presstop/darcy.hpp"
#include "presstop/elasticity.hpp"
#include "presstop/filter.hpp"
#include "presstop/linalg.hpp"
#include "presstop/mesh.hpp"

namespace presstop {

// Pressure and displacement fields for one physical density field. `tag`
// identifies the Analysis::solve call that produced it.
struct SolvedState {
  std::uint64_t tag = 0;
  Vector rho_filt;
  SparseMatrix A;
  PressureField pressure;
  SparseMatrix K;
  Vector F;
  Vector u;
};

// Per-element pieces of dC/d(rho_filt).
struct ObjectiveTerms {
  Vector stiffness;  // -u_e^T dK_e u_e
  Vector load;       // lam1_e^T dA_e p_e
};

struct VolumeConstraint {
  double value = 0.0;  // mean(rho_filt over act) / volfrac - 1
  Vector gradient;     // d value / d x over the act elements
};

// Evaluates the coupled state equations A p = 0, K u = -T p for one problem
// setup. Element patterns, the transformation matrix and the symbolic
// factorizations are built once and reused across solves.
class Analysis {
 public:
  Analysis(Mesh mesh, FlowParams flow, MaterialParams material,
           std::vector<PressureBc> pressure_bcs, std::vector<Index> fixed_u_dofs);

  SolvedState solve(const Vector& rho_filt);

  // Displacements for a prescribed load, using the stiffness of rho_filt.
  Vector solve_displacement_for(const Vector& rho_filt, const Vector& f);

  // Solves A_ff lam_f = 2 (T^T u)_f with the factorization from the solve that
  // produced `state`; lam is zero on the fixed pressure nodes. Throws
  // std::logic_error if `state` is not the most recent solve.
  Vector adjoint_lambda1(const SolvedState& state) const;

  ObjectiveTerms objective_terms(const SolvedState& state, const Vector& lam1) const;

  const Mesh& mesh() const { return mesh_; }
  const FlowParams& flow() const { return flow_; }
  const MaterialParams& material() const { return material_; }
  const SparseMatrix& transformation() const { return t_; }
  const DofPartition& pressure_partition() const { return p_part_; }
  const DofPartition& displacement_partition() const { return u_part_; }

 private:
  SparseMatrix assemble_a(const Vector& rho_filt) const;
  SparseMatrix assemble_k(const Vector& rho_filt) const;

  Mesh mesh_;
  FlowParams flow_;
  MaterialParams material_;
  std::vector<PressureBc> pressure_bcs_;
  DofPartition p_part_;
  DofPartition u_part_;
  Vector p_fixed_values_;
  SparseMatrix t_;
  Matrix8d ke_;
  ElementAssembler a_assembler_;
  ElementAssembler k_assembler_;
  SpdSolver p_solver_;
  SpdSolver u_solver_;
  std::uint64_t tag_ = 0;
};

// u^T K u.
double compliance(const Vector& u, const SparseMatrix& k);

// Standalone adjoint solve, factorizing A_ff afresh.
Vector adjoint_lambda1(const SparseMatrix& a, const SparseMatrix& t, const Vector& u,
                       const DofPartition& pressure_partition);

ObjectiveTerms objective_terms(const Mesh& mesh, const FlowParams& flow,
                               const MaterialParams& material, const Vector& rho_filt,
                               const Vector& u, const Vector& p, const Vector& lam1);

// term1 + lst * term2.
Vector combine_terms(const ObjectiveTerms& terms, int lst);

// Chain rule through the filter: entries on non-design elements are dropped
// (their physical density is overwritten), the transposed filter is applied,
// and the result is restricted to `act`.
Vector chain_to_design(const Vector& d_rho_filt, const FilterKernel& kernel, const ActiveSets& sets);

VolumeConstraint volume_and_sensitivity(const Vector& rho_filt, const ActiveSets& sets,
                                        const FilterKernel& kernel, double volfrac);

// Objective normalization fixed at the first iteration: the scaled objective
// starts at 10.
double objective_normalization(double first_compliance);

}  // namespace presstop
