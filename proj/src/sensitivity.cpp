#include "presstop/sensitivity.hpp"

#include <stdexcept>
#include <string>

namespace presstop {

namespace {

std::vector<Index> flatten_u_dofs(const DofMaps& d) {
  std::vector<Index> flat;
  flat.reserve(d.u_dofs.size() * 8);
  for (const auto& ud : d.u_dofs) flat.insert(flat.end(), ud.begin(), ud.end());
  return flat;
}

std::vector<Index> flatten_p_dofs(const DofMaps& d) {
  std::vector<Index> flat;
  flat.reserve(d.p_dofs.size() * 4);
  for (const auto& pd : d.p_dofs) flat.insert(flat.end(), pd.begin(), pd.end());
  return flat;
}

template <int N, std::size_t M>
Eigen::Matrix<double, N, 1> gather(const Vector& v, const std::array<Index, M>& idx) {
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = v[idx[i]];
  return out;
}

ElementAssembler make_assembler(Index n, const std::vector<Index>& dofs, Index per_element) {
  return ElementAssembler(n, n, dofs, per_element, dofs, per_element);
}

}  // namespace

Analysis::Analysis(Mesh mesh, FlowParams flow, MaterialParams material,
                   std::vector<PressureBc> pressure_bcs, std::vector<Index> fixed_u_dofs)
    : mesh_(std::move(mesh)),
      flow_(flow),
      material_(material),
      pressure_bcs_(std::move(pressure_bcs)),
      p_part_(presstop::pressure_partition(mesh_.grid.nno, pressure_bcs_)),
      u_part_(DofPartition::from_fixed(2 * mesh_.grid.nno, std::move(fixed_u_dofs))),
      p_fixed_values_(Vector::Zero(mesh_.grid.nno)),
      t_(assemble_transformation(mesh_)),
      ke_(element_stiffness(material_.nu)),
      a_assembler_(make_assembler(mesh_.grid.nno, flatten_p_dofs(mesh_.dofs), 4)),
      k_assembler_(make_assembler(2 * mesh_.grid.nno, flatten_u_dofs(mesh_.dofs), 8)) {
  if (pressure_bcs_.empty()) {
    throw std::invalid_argument("Analysis: at least one prescribed pressure node is required");
  }
  for (const auto& bc : pressure_bcs_) p_fixed_values_[bc.node] = bc.value;
}

SparseMatrix Analysis::assemble_a(const Vector& rho_filt) const {
  const auto& em = element_flow_matrices();
  return a_assembler_.assemble([&](Index e) -> Eigen::MatrixXd {
    return flow_coeff(rho_filt[e], flow_) * em.Kp + drainage_coeff(rho_filt[e], flow_) * em.KDp;
  });
}

SparseMatrix Analysis::assemble_k(const Vector& rho_filt) const {
  return k_assembler_.assemble(
      [&](Index e) -> Eigen::MatrixXd { return simp_modulus(rho_filt[e], material_) * ke_; });
}

SolvedState Analysis::solve(const Vector& rho_filt) {
  if (rho_filt.size() != mesh_.grid.nel) {
    throw std::invalid_argument("Analysis::solve: expected " + std::to_string(mesh_.grid.nel) +
                                " densities, got " + std::to_string(rho_filt.size()));
  }
  SolvedState s;
  s.tag = ++tag_;
  s.rho_filt = rho_filt;
  s.A = assemble_a(rho_filt);
  s.pressure.partition = p_part_;
  s.pressure.p = solve_partitioned(s.A, Vector::Zero(mesh_.grid.nno), p_part_, p_fixed_values_,
                                   p_solver_, "pressure solve");
  s.K = assemble_k(rho_filt);
  s.F = assemble_force(s.pressure.p, t_);
  s.u = solve_partitioned(s.K, s.F, u_part_, Vector::Zero(2 * mesh_.grid.nno), u_solver_,
                          "displacement solve (check that the supports prevent rigid-body motion)");
  return s;
}

Vector Analysis::solve_displacement_for(const Vector& rho_filt, const Vector& f) {
  ++tag_;
  return solve_partitioned(assemble_k(rho_filt), f, u_part_, Vector::Zero(2 * mesh_.grid.nno),
                           u_solver_, "displacement solve");
}

Vector Analysis::adjoint_lambda1(const SolvedState& state) const {
  if (state.tag != tag_) {
    throw std::logic_error("adjoint_lambda1: state is stale (fields from an earlier solve)");
  }
  const Vector rhs = 2.0 * (t_.transpose() * state.u);
  Vector lam = Vector::Zero(mesh_.grid.nno);
  p_part_.scatter_free(p_solver_.solve(p_part_.restrict_free(rhs)), lam);
  return lam;
}

ObjectiveTerms Analysis::objective_terms(const SolvedState& state, const Vector& lam1) const {
  return presstop::objective_terms(mesh_, flow_, material_, state.rho_filt, state.u,
                                   state.pressure.p, lam1);
}

double compliance(const Vector& u, const SparseMatrix& k) { return u.dot(k * u); }

Vector adjoint_lambda1(const SparseMatrix& a, const SparseMatrix& t, const Vector& u,
                       const DofPartition& part) {
  const Vector rhs = 2.0 * (t.transpose() * u);
  Vector lam = Vector::Zero(a.rows());
  SpdSolver solver;
  solver.factorize(free_block(a, part), "adjoint solve");
  part.scatter_free(solver.solve(part.restrict_free(rhs)), lam);
  return lam;
}

ObjectiveTerms objective_terms(const Mesh& mesh, const FlowParams& flow,
                               const MaterialParams& material, const Vector& rho_filt,
                               const Vector& u, const Vector& p, const Vector& lam1) {
  const Matrix8d ke = element_stiffness(material.nu);
  const auto& em = element_flow_matrices();
  ObjectiveTerms t;
  t.stiffness.resize(mesh.grid.nel);
  t.load.resize(mesh.grid.nel);
  for (Index e = 0; e < mesh.grid.nel; ++e) {
    const auto ue = gather<8>(u, mesh.dofs.u_dofs[e]);
    const auto pe = gather<4>(p, mesh.dofs.p_dofs[e]);
    const auto le = gather<4>(lam1, mesh.dofs.p_dofs[e]);
    const double rho = rho_filt[e];
    t.stiffness[e] = -simp_modulus_derivative(rho, material) * ue.dot(ke * ue);
    const Eigen::Matrix4d dae = flow_coeff_derivative(rho, flow) * em.Kp +
                                drainage_coeff_derivative(rho, flow) * em.KDp;
    t.load[e] = le.dot(dae * pe);
  }
  return t;
}

Vector combine_terms(const ObjectiveTerms& terms, int lst) {
  if (lst != 0 && lst != 1) throw std::invalid_argument("lst must be 0 or 1");
  return lst == 1 ? Vector(terms.stiffness + terms.load) : terms.stiffness;
}

Vector chain_to_design(const Vector& d_rho_filt, const FilterKernel& kernel, const ActiveSets& sets) {
  Vector d = d_rho_filt;
  for (Index e : sets.nds) d[e] = 0.0;
  for (Index e : sets.ndv) d[e] = 0.0;
  const Vector full = apply_filter_transpose(d, kernel);
  Vector out(static_cast<Index>(sets.act.size()));
  for (std::size_t k = 0; k < sets.act.size(); ++k) out[k] = full[sets.act[k]];
  return out;
}

VolumeConstraint volume_and_sensitivity(const Vector& rho_filt, const ActiveSets& sets,
                                        const FilterKernel& kernel, double volfrac) {
  if (sets.act.empty()) throw std::invalid_argument("volume constraint: no design elements");
  const double scale = 1.0 / (volfrac * static_cast<double>(sets.act.size()));
  double sum = 0.0;
  Vector dv = Vector::Zero(rho_filt.size());
  for (Index e : sets.act) {
    sum += rho_filt[e];
    dv[e] = scale;
  }
  VolumeConstraint v;
  v.value = sum * scale - 1.0;
  v.gradient = chain_to_design(dv, kernel, sets);
  return v;
}

double objective_normalization(double first_compliance) {
  return first_compliance > 0.0 ? 10.0 / first_compliance : 1.0;
}

}  // namespace presstop
