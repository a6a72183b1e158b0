#include "presstop/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace presstop {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

bool all_finite(const SparseMatrix& m) {
  const double* v = m.valuePtr();
  return std::all_of(v, v + m.nonZeros(), [](double x) { return std::isfinite(x); });
}

std::string with_context(const std::string& msg, const std::string& context) {
  return context.empty() ? msg : context + ": " + msg;
}

}  // namespace

SparseMatrix compress(const TripletList& t) {
  if (t.rows.size() != t.vals.size() || t.cols.size() != t.vals.size()) {
    throw std::invalid_argument("compress: triplet arrays have different lengths");
  }
  if (t.nrows < 0 || t.ncols < 0) {
    throw std::invalid_argument("compress: negative shape");
  }
  std::vector<Eigen::Triplet<double, int>> trips;
  trips.reserve(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t.rows[k] < 0 || t.rows[k] >= t.nrows || t.cols[k] < 0 || t.cols[k] >= t.ncols) {
      throw std::out_of_range("compress: triplet (" + std::to_string(t.rows[k]) + ", " +
                              std::to_string(t.cols[k]) + ") outside " +
                              std::to_string(t.nrows) + " x " + std::to_string(t.ncols));
    }
    trips.emplace_back(static_cast<int>(t.rows[k]), static_cast<int>(t.cols[k]), t.vals[k]);
  }
  SparseMatrix m(t.nrows, t.ncols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

ElementAssembler::ElementAssembler(Index nrows, Index ncols, std::span<const Index> row_dofs,
                                   Index rows_per_element, std::span<const Index> col_dofs,
                                   Index cols_per_element)
    : nrow_el_(rows_per_element), ncol_el_(cols_per_element) {
  if (rows_per_element <= 0 || cols_per_element <= 0 ||
      row_dofs.size() % rows_per_element != 0 ||
      col_dofs.size() / cols_per_element != row_dofs.size() / rows_per_element) {
    throw std::invalid_argument("ElementAssembler: inconsistent element DOF lists");
  }
  nel_ = static_cast<Index>(row_dofs.size()) / rows_per_element;

  TripletList t(nrows, ncols);
  for (Index e = 0; e < nel_; ++e) {
    for (Index j = 0; j < ncol_el_; ++j) {
      for (Index i = 0; i < nrow_el_; ++i) {
        t.add(row_dofs[e * nrow_el_ + i], col_dofs[e * ncol_el_ + j], 1.0);
      }
    }
  }
  pattern_ = compress(t);

  slots_.resize(t.size());
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const int* first = inner + outer[t.cols[k]];
    const int* last = inner + outer[t.cols[k] + 1];
    const int* hit = std::lower_bound(first, last, static_cast<int>(t.rows[k]));
    slots_[k] = hit - inner;
  }
}

DofPartition DofPartition::from_fixed(Index n, std::vector<Index> fixed) {
  std::sort(fixed.begin(), fixed.end());
  fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());
  if (!fixed.empty() && (fixed.front() < 0 || fixed.back() >= n)) {
    throw std::out_of_range("DofPartition: fixed index out of range");
  }
  DofPartition p;
  p.size = n;
  p.position.assign(static_cast<std::size_t>(n), -1);
  std::vector<char> is_fixed(static_cast<std::size_t>(n), 0);
  for (Index i : fixed) is_fixed[i] = 1;
  for (Index i = 0; i < n; ++i) {
    if (!is_fixed[i]) {
      p.position[i] = static_cast<Index>(p.free.size());
      p.free.push_back(i);
    }
  }
  p.fixed = std::move(fixed);
  return p;
}

Vector DofPartition::restrict_free(const Vector& full) const {
  Vector r(static_cast<Index>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) r[k] = full[free[k]];
  return r;
}

void DofPartition::scatter_free(const Vector& reduced, Vector& full) const {
  for (std::size_t k = 0; k < free.size(); ++k) full[free[k]] = reduced[k];
}

SparseMatrix free_block(const SparseMatrix& m, const DofPartition& part) {
  if (m.rows() != part.size || m.cols() != part.size) {
    throw std::invalid_argument("free_block: matrix shape does not match partition");
  }
  const auto nf = static_cast<Index>(part.free.size());
  SparseMatrix r(nf, nf);
  r.reserve(m.nonZeros());
  for (Index jf = 0; jf < nf; ++jf) {
    r.startVec(jf);
    for (SparseMatrix::InnerIterator it(m, part.free[jf]); it; ++it) {
      const Index i = part.position[it.row()];
      if (i >= 0) r.insertBack(i, jf) = it.value();
    }
  }
  r.finalize();
  return r;
}

struct SpdSolver::Impl {
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  std::vector<int> outer;
  std::vector<int> inner;
  bool analyzed = false;

  bool same_pattern(const SparseMatrix& m) const {
    if (!analyzed || static_cast<Index>(outer.size()) != m.outerSize() + 1 ||
        static_cast<Index>(inner.size()) != m.nonZeros()) {
      return false;
    }
    return std::equal(outer.begin(), outer.end(), m.outerIndexPtr()) &&
           std::equal(inner.begin(), inner.end(), m.innerIndexPtr());
  }
};

SpdSolver::SpdSolver() : impl_(std::make_unique<Impl>()) {}
SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

void SpdSolver::factorize(const SparseMatrix& m, const std::string& context) {
  context_ = context;
  if (m.rows() != m.cols()) {
    throw SolverError(with_context("matrix is not square", context));
  }
  if (!all_finite(m)) {
    throw SolverError(with_context("matrix contains NaN or Inf", context));
  }
  matrix_ = m;
  matrix_.makeCompressed();
  if (matrix_.rows() == 0) return;

  if (!impl_->same_pattern(matrix_)) {
    impl_->ldlt.analyzePattern(matrix_);
    impl_->outer.assign(matrix_.outerIndexPtr(), matrix_.outerIndexPtr() + matrix_.outerSize() + 1);
    impl_->inner.assign(matrix_.innerIndexPtr(), matrix_.innerIndexPtr() + matrix_.nonZeros());
    impl_->analyzed = true;
  }
  impl_->ldlt.factorize(matrix_);
  if (impl_->ldlt.info() != Eigen::Success) {
    throw SolverError(with_context("sparse factorization failed (matrix is not positive definite)", context));
  }
  const Vector& d = impl_->ldlt.vectorD();
  const double dmax = d.maxCoeff();
  const double dmin = d.minCoeff();
  if (!(dmin > 0.0) || dmin < 1e-14 * dmax) {
    throw SolverError(with_context("matrix is singular or not positive definite (pivot ratio " +
                                       std::to_string(dmin / dmax) + ")",
                                   context));
  }
}

Vector SpdSolver::solve(const Vector& b) const {
  if (b.size() != matrix_.rows()) {
    throw std::invalid_argument("SpdSolver::solve: right-hand side has wrong length");
  }
  if (!all_finite(b)) {
    throw SolverError(with_context("right-hand side contains NaN or Inf", context_));
  }
  if (b.size() == 0) return Vector();
  const double bnorm = std::max(b.norm(), std::numeric_limits<double>::min());
  Vector x = impl_->ldlt.solve(b);
  Vector r = b - matrix_.selfadjointView<Eigen::Lower>() * x;
  last_residual_ = r.norm() / bnorm;
  for (int sweep = 0; sweep < 3 && last_residual_ > kResidualTolerance; ++sweep) {
    x += impl_->ldlt.solve(r);
    r = b - matrix_.selfadjointView<Eigen::Lower>() * x;
    last_residual_ = r.norm() / bnorm;
  }
  if (!x.allFinite() || last_residual_ > 1e-6) {
    throw SolverError(with_context("linear solve did not converge (relative residual " +
                                       std::to_string(last_residual_) + ")",
                                   context_));
  }
  return x;
}

Vector spd_solve(const SparseMatrix& m, const Vector& b) {
  SpdSolver solver;
  solver.factorize(m);
  return solver.solve(b);
}

Vector solve_partitioned(const SparseMatrix& m, const Vector& b, const DofPartition& part,
                         const Vector& fixed_values, SpdSolver& solver,
                         const std::string& context) {
  if (b.size() != part.size || fixed_values.size() != part.size) {
    throw std::invalid_argument("solve_partitioned: vector lengths do not match partition");
  }
  Vector x = Vector::Zero(part.size);
  for (Index i : part.fixed) x[i] = fixed_values[i];
  const Vector lifted = m * x;
  Vector rhs(static_cast<Index>(part.free.size()));
  for (std::size_t k = 0; k < part.free.size(); ++k) {
    rhs[k] = b[part.free[k]] - lifted[part.free[k]];
  }
  solver.factorize(free_block(m, part), context);
  part.scatter_free(solver.solve(rhs), x);
  return x;
}

double relative_residual(const SparseMatrix& m, const Vector& x, const Vector& b) {
  const double bnorm = std::max(b.norm(), std::numeric_limits<double>::min());
  return (m * x - b).norm() / bnorm;
}

}  // namespace presstop
