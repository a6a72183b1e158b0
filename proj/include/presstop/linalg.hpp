#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "presstop/mesh.hpp"

namespace presstop {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TripletList {
  Index nrows = 0;
  Index ncols = 0;
  std::vector<Index> rows;
  std::vector<Index> cols;
  std::vector<double> vals;

  TripletList() = default;
  TripletList(Index nr, Index nc) : nrows(nr), ncols(nc) {}

  void add(Index r, Index c, double v) {
    rows.push_back(r);
    cols.push_back(c);
    vals.push_back(v);
  }
  std::size_t size() const { return vals.size(); }
};

// Duplicates are summed. Throws std::out_of_range for indices outside the shape
// and std::invalid_argument for ragged lists.
SparseMatrix compress(const TripletList& t);

// Scatters dense element matrices into a fixed global sparsity pattern.
//
// The pattern and the slot of every element entry are computed once; each
// assemble() call is then a single pass over the element entries in a fixed
// order, so results are bitwise reproducible.
class ElementAssembler {
 public:
  // row_dofs holds rows_per_element indices per element, col_dofs likewise.
  ElementAssembler(Index nrows, Index ncols, std::span<const Index> row_dofs,
                   Index rows_per_element, std::span<const Index> col_dofs,
                   Index cols_per_element);

  Index num_elements() const { return nel_; }

  // local(e) must return a (rows_per_element x cols_per_element) matrix.
  template <class LocalFn>
  SparseMatrix assemble(LocalFn&& local) const {
    SparseMatrix m = pattern_;
    double* values = m.valuePtr();
    std::fill(values, values + m.nonZeros(), 0.0);
    std::size_t k = 0;
    for (Index e = 0; e < nel_; ++e) {
      const Eigen::MatrixXd le = local(e);
      for (Index j = 0; j < ncol_el_; ++j) {
        for (Index i = 0; i < nrow_el_; ++i) {
          values[slots_[k++]] += le(i, j);
        }
      }
    }
    return m;
  }

 private:
  Index nel_ = 0;
  Index nrow_el_ = 0;
  Index ncol_el_ = 0;
  SparseMatrix pattern_;
  std::vector<Index> slots_;
};

// Split of an index range into Dirichlet (fixed) and free entries.
struct DofPartition {
  Index size = 0;
  std::vector<Index> fixed;
  std::vector<Index> free;
  // position[i] is the index of i within `free`, or -1 when i is fixed.
  std::vector<Index> position;

  static DofPartition from_fixed(Index n, std::vector<Index> fixed);

  Vector restrict_free(const Vector& full) const;
  void scatter_free(const Vector& reduced, Vector& full) const;
};

SparseMatrix free_block(const SparseMatrix& m, const DofPartition& part);

// Sparse LDL^T factorization of a symmetric positive definite matrix.
//
// The symbolic analysis is kept and reused while successive matrices share a
// sparsity pattern. solve() applies iterative refinement until the relative
// residual is below 1e-10 (at most a few sweeps).
class SpdSolver {
 public:
  static constexpr double kResidualTolerance = 1e-10;

  SpdSolver();
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  // Throws SolverError when the matrix is not (numerically) positive definite.
  void factorize(const SparseMatrix& m, const std::string& context = "");
  Vector solve(const Vector& b) const;

  Index rows() const { return matrix_.rows(); }
  double last_residual() const { return last_residual_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SparseMatrix matrix_;
  std::string context_;
  mutable double last_residual_ = 0.0;
};

// One-shot SPD solve.
Vector spd_solve(const SparseMatrix& m, const Vector& b);

// Solves M x = b subject to x[fixed] = fixed_values (full-length vector whose
// free entries are ignored), by reduction to the free block. `solver` receives
// the factorization of M_ff so it can be reused, e.g. for adjoint solves.
Vector solve_partitioned(const SparseMatrix& m, const Vector& b, const DofPartition& part,
                         const Vector& fixed_values, SpdSolver& solver,
                         const std::string& context = "");

double relative_residual(const SparseMatrix& m, const Vector& x, const Vector& b);

}  // namespace presstop
