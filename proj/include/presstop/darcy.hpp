#pragma once

#include <Eigen/Core>

#include <vector>

#include "presstop/linalg.hpp"
#include "presstop/mesh.hpp"

namespace presstop {

// Darcy flow with drainage. The drainage coefficient is calibrated so that the
// pressure decays to r * Pin over a penetration depth Dels inside solid.
struct FlowParams {
  double Kv = 1.0;     // flow coefficient of a void element
  double epsf = 1e-7;  // flow contrast, solid / void
  double r = 0.1;      // residual pressure ratio at the penetration depth
  double Dels = 2.0;   // penetration depth, element units
  double etaf = 0.2;   // smooth Heaviside threshold
  double betaf = 8.0;  // smooth Heaviside sharpness
  double Pin = 1.0;    // applied pressure

  // Flow coefficient of solid.
  double kvs() const { return Kv * epsf; }
  // Drainage coefficient.
  double Ds() const;

  // Throws std::invalid_argument when a parameter is out of range.
  void validate() const;

  bool operator==(const FlowParams&) const = default;
};

// H(x; beta, eta) = [tanh(beta eta) + tanh(beta (x - eta))] /
//                   [tanh(beta eta) + tanh(beta (1 - eta))]
double smooth_heaviside(double x, double beta, double eta);
double smooth_heaviside_derivative(double x, double beta, double eta);

double flow_coeff(double rho_filt, const FlowParams& f);
double drainage_coeff(double rho_filt, const FlowParams& f);
double flow_coeff_derivative(double rho_filt, const FlowParams& f);
double drainage_coeff_derivative(double rho_filt, const FlowParams& f);

struct FlowElementMatrices {
  Eigen::Matrix4d Kp;   // integral of grad N^T grad N
  Eigen::Matrix4d KDp;  // integral of N^T N
};

// Bilinear unit square, counterclockwise node order from bottom-left.
const FlowElementMatrices& element_flow_matrices();

// A = sum_e K(rho_e) Kp + D(rho_e) KDp, nno x nno.
SparseMatrix assemble_flow(const Vector& rho_filt, const Mesh& mesh, const FlowParams& f);

// Prescribed nodal pressures, sorted by node.
struct PressureBc {
  Index node = 0;
  double value = 0.0;
  bool operator==(const PressureBc&) const = default;
};

struct PressureField {
  Vector p;
  DofPartition partition;
};

DofPartition pressure_partition(Index nno, const std::vector<PressureBc>& bcs);

// Solves A_ff p_f = -A_fc p_c. `solver` keeps the factorization of A_ff for the
// adjoint solve.
PressureField solve_pressure(const SparseMatrix& a, const std::vector<PressureBc>& bcs,
                             SpdSolver& solver);
PressureField solve_pressure(const SparseMatrix& a, const std::vector<PressureBc>& bcs);

}  // namespace presstop
