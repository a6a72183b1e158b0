#include "presstop/elasticity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace presstop {

namespace {

void check_length(const Vector& rho, const Mesh& mesh, const char* who) {
  if (rho.size() != mesh.grid.nel) {
    throw std::invalid_argument(std::string(who) + ": expected " +
                                std::to_string(mesh.grid.nel) + " densities, got " +
                                std::to_string(rho.size()));
  }
}

double checked_density(double x) {
  if (!(x >= -1e-12 && x <= 1.0 + 1e-12)) {
    throw std::domain_error("density " + std::to_string(x) + " outside [0, 1]");
  }
  return std::clamp(x, 0.0, 1.0);
}

}  // namespace

void MaterialParams::validate() const {
  if (!(E0 > Emin && Emin > 0.0)) throw std::invalid_argument("material: need E0 > Emin > 0");
  if (!(nu >= 0.0 && nu < 0.5)) throw std::invalid_argument("material: nu must lie in [0, 0.5)");
  if (!(penal >= 1.0)) throw std::invalid_argument("material: penal must be >= 1");
}

double simp_modulus(double rho_filt, const MaterialParams& m) {
  return m.Emin + std::pow(checked_density(rho_filt), m.penal) * (m.E0 - m.Emin);
}

double simp_modulus_derivative(double rho_filt, const MaterialParams& m) {
  return m.penal * std::pow(checked_density(rho_filt), m.penal - 1.0) * (m.E0 - m.Emin);
}

Matrix8d element_stiffness(double nu) {
  Eigen::Matrix4d a11, a12, b11, b12;
  a11 << 12, 3, -6, -3, 3, 12, 3, 0, -6, 3, 12, -3, -3, 0, -3, 12;
  a12 << -6, -3, 0, 3, -3, -6, -3, -6, 0, -3, -6, 3, 3, -6, 3, -6;
  b11 << -4, 3, -2, 9, 3, -4, -9, 4, -2, -9, -4, -3, 9, 4, -3, -4;
  b12 << 2, -3, 4, -9, -3, 2, 9, -2, 4, 9, 2, 3, -9, -2, 3, 2;
  Matrix8d a, b;
  a << a11, a12, a12.transpose(), a11;
  b << b11, b12, b12.transpose(), b11;
  return (a + nu * b) / (24.0 * (1.0 - nu * nu));
}

const Matrix84d& element_transformation() {
  static const Matrix84d te = [] {
    Matrix84d t;
    t << -2, 2, 1, -1,
         -2, -1, 1, 2,
         -2, 2, 1, -1,
         -1, -2, 2, 1,
         -1, 1, 2, -2,
         -1, -2, 2, 1,
         -1, 1, 2, -2,
         -2, -1, 1, 2;
    return Matrix84d(t / 12.0);
  }();
  return te;
}

SparseMatrix assemble_stiffness(const Vector& rho_filt, const Mesh& mesh, const MaterialParams& m) {
  check_length(rho_filt, mesh, "assemble_stiffness");
  const Matrix8d ke = element_stiffness(m.nu);
  TripletList t(2 * mesh.grid.nno, 2 * mesh.grid.nno);
  t.rows.reserve(64 * mesh.grid.nel);
  t.cols.reserve(64 * mesh.grid.nel);
  t.vals.reserve(64 * mesh.grid.nel);
  for (Index e = 0; e < mesh.grid.nel; ++e) {
    const double modulus = simp_modulus(rho_filt[e], m);
    const auto& ud = mesh.dofs.u_dofs[e];
    for (int j = 0; j < 8; ++j) {
      for (int i = 0; i < 8; ++i) t.add(ud[i], ud[j], modulus * ke(i, j));
    }
  }
  return compress(t);
}

SparseMatrix assemble_transformation(const Mesh& mesh) {
  const Matrix84d& te = element_transformation();
  TripletList t(2 * mesh.grid.nno, mesh.grid.nno);
  for (Index e = 0; e < mesh.grid.nel; ++e) {
    const auto& ud = mesh.dofs.u_dofs[e];
    const auto& pd = mesh.dofs.p_dofs[e];
    for (int j = 0; j < 4; ++j) {
      for (int i = 0; i < 8; ++i) t.add(ud[i], pd[j], te(i, j));
    }
  }
  return compress(t);
}

Vector assemble_force(const Vector& p, const SparseMatrix& t) {
  if (p.size() != t.cols()) {
    throw std::invalid_argument("assemble_force: pressure vector has wrong length");
  }
  return -(t * p);
}

Vector assemble_force(const Vector& p, const Mesh& mesh) {
  return assemble_force(p, assemble_transformation(mesh));
}

Vector solve_displacement(const SparseMatrix& k, const Vector& f, const DofPartition& part,
                          SpdSolver& solver) {
  return solve_partitioned(k, f, part, Vector::Zero(k.rows()), solver,
                           "displacement solve (check that the supports prevent rigid-body motion)");
}

Vector solve_displacement(const SparseMatrix& k, const Vector& f,
                          const std::vector<Index>& fixed_u_dofs) {
  SpdSolver solver;
  return solve_displacement(k, f, DofPartition::from_fixed(k.rows(), fixed_u_dofs), solver);
}

}  // namespace presstop
