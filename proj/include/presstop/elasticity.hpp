#pragma once

#include <Eigen/Core>

#include <vector>

#include "presstop/darcy.hpp"
#include "presstop/linalg.hpp"
#include "presstop/mesh.hpp"

namespace presstop {

struct MaterialParams {
  double E0 = 1.0;
  double Emin = 1e-9;
  double nu = 0.3;
  double penal = 3.0;

  void validate() const;
  bool operator==(const MaterialParams&) const = default;
};

// Modified SIMP: E = Emin + rho^penal (E0 - Emin).
double simp_modulus(double rho_filt, const MaterialParams& m);
double simp_modulus_derivative(double rho_filt, const MaterialParams& m);

using Matrix8d = Eigen::Matrix<double, 8, 8>;
using Matrix84d = Eigen::Matrix<double, 8, 4>;

// Plane-stress bilinear unit square, unit modulus and thickness.
Matrix8d element_stiffness(double nu);

// Te = integral of N_u^T grad N_p; element forces are -Te p_e.
const Matrix84d& element_transformation();

SparseMatrix assemble_stiffness(const Vector& rho_filt, const Mesh& mesh, const MaterialParams& m);

// Global T (2 nno x nno). Independent of the design.
SparseMatrix assemble_transformation(const Mesh& mesh);

// F = -T p.
Vector assemble_force(const Vector& p, const Mesh& mesh);
Vector assemble_force(const Vector& p, const SparseMatrix& t);

// K_ff u_f = F_f with u = 0 on the fixed DOFs.
Vector solve_displacement(const SparseMatrix& k, const Vector& f, const DofPartition& part,
                          SpdSolver& solver);
Vector solve_displacement(const SparseMatrix& k, const Vector& f,
                          const std::vector<Index>& fixed_u_dofs);

}  // namespace presstop
