#include "presstop/darcy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace presstop {

namespace {

// Filtered densities are convex combinations of values in [0, 1]; allow for
// rounding in the last bits, reject anything larger.
constexpr double kDomainSlack = 1e-12;

double checked_density(double x) {
  if (!(x >= -kDomainSlack && x <= 1.0 + kDomainSlack)) {
    throw std::domain_error("density " + std::to_string(x) + " outside [0, 1]");
  }
  return std::clamp(x, 0.0, 1.0);
}

// 1 - H(x) from the tanh difference, exact at x = 1.
double heaviside_complement(double x, double beta, double eta) {
  x = checked_density(x);
  const double t1 = std::tanh(beta * (1.0 - eta));
  return (t1 - std::tanh(beta * (x - eta))) / (std::tanh(beta * eta) + t1);
}

}  // namespace

double FlowParams::Ds() const {
  const double decay = std::log(r) / Dels;
  return decay * decay * kvs();
}

void FlowParams::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  require(Kv > 0.0, "flow: Kv must be positive");
  require(epsf > 0.0 && epsf < 1.0, "flow: epsf must lie in (0, 1)");
  require(r > 0.0 && r < 1.0, "flow: r must lie in (0, 1)");
  require(Dels > 0.0, "flow: Dels must be positive");
  require(betaf > 0.0, "flow: betaf must be positive");
  require(etaf > 0.0 && etaf < 1.0, "flow: etaf must lie in (0, 1)");
  require(Pin > 0.0, "flow: Pin must be positive");
}

double smooth_heaviside(double x, double beta, double eta) {
  x = checked_density(x);
  const double t0 = std::tanh(beta * eta);
  return (t0 + std::tanh(beta * (x - eta))) / (t0 + std::tanh(beta * (1.0 - eta)));
}

double smooth_heaviside_derivative(double x, double beta, double eta) {
  x = checked_density(x);
  const double t = std::tanh(beta * (x - eta));
  return beta * (1.0 - t * t) / (std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta)));
}

double flow_coeff(double rho_filt, const FlowParams& f) {
  return f.Kv * (heaviside_complement(rho_filt, f.betaf, f.etaf) +
                 f.epsf * smooth_heaviside(rho_filt, f.betaf, f.etaf));
}

double drainage_coeff(double rho_filt, const FlowParams& f) {
  return f.Ds() * smooth_heaviside(rho_filt, f.betaf, f.etaf);
}

double flow_coeff_derivative(double rho_filt, const FlowParams& f) {
  return -f.Kv * (1.0 - f.epsf) * smooth_heaviside_derivative(rho_filt, f.betaf, f.etaf);
}

double drainage_coeff_derivative(double rho_filt, const FlowParams& f) {
  return f.Ds() * smooth_heaviside_derivative(rho_filt, f.betaf, f.etaf);
}

const FlowElementMatrices& element_flow_matrices() {
  static const FlowElementMatrices m = [] {
    FlowElementMatrices r;
    r.Kp << 4, -1, -2, -1,
           -1, 4, -1, -2,
           -2, -1, 4, -1,
           -1, -2, -1, 4;
    r.Kp /= 6.0;
    r.KDp << 4, 2, 1, 2,
             2, 4, 2, 1,
             1, 2, 4, 2,
             2, 1, 2, 4;
    r.KDp /= 36.0;
    return r;
  }();
  return m;
}

SparseMatrix assemble_flow(const Vector& rho_filt, const Mesh& mesh, const FlowParams& f) {
  if (rho_filt.size() != mesh.grid.nel) {
    throw std::invalid_argument("assemble_flow: expected " + std::to_string(mesh.grid.nel) +
                                " densities, got " + std::to_string(rho_filt.size()));
  }
  const auto& em = element_flow_matrices();
  TripletList t(mesh.grid.nno, mesh.grid.nno);
  t.rows.reserve(16 * mesh.grid.nel);
  t.cols.reserve(16 * mesh.grid.nel);
  t.vals.reserve(16 * mesh.grid.nel);
  for (Index e = 0; e < mesh.grid.nel; ++e) {
    const Eigen::Matrix4d ae =
        flow_coeff(rho_filt[e], f) * em.Kp + drainage_coeff(rho_filt[e], f) * em.KDp;
    const auto& pd = mesh.dofs.p_dofs[e];
    for (int j = 0; j < 4; ++j) {
      for (int i = 0; i < 4; ++i) t.add(pd[i], pd[j], ae(i, j));
    }
  }
  return compress(t);
}

DofPartition pressure_partition(Index nno, const std::vector<PressureBc>& bcs) {
  std::vector<Index> fixed;
  fixed.reserve(bcs.size());
  for (const auto& bc : bcs) fixed.push_back(bc.node);
  return DofPartition::from_fixed(nno, std::move(fixed));
}

PressureField solve_pressure(const SparseMatrix& a, const std::vector<PressureBc>& bcs,
                             SpdSolver& solver) {
  if (bcs.empty()) {
    throw SolverError("pressure solve: no prescribed pressure nodes");
  }
  PressureField field;
  field.partition = pressure_partition(a.rows(), bcs);
  Vector values = Vector::Zero(a.rows());
  for (const auto& bc : bcs) values[bc.node] = bc.value;
  field.p = solve_partitioned(a, Vector::Zero(a.rows()), field.partition, values, solver,
                              "pressure solve");
  return field;
}

PressureField solve_pressure(const SparseMatrix& a, const std::vector<PressureBc>& bcs) {
  SpdSolver solver;
  return solve_pressure(a, bcs, solver);
}

}  // namespace presstop
