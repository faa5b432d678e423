#include "geotherm/sparse.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace geotherm {

void SparseAssembler::reserve_block(const std::vector<int>& rows,
                                    const std::vector<int>& cols) {
  require(!finalized_, "assembler: pattern already finalized");
  int needed = 0;
  for (int r : rows) needed = std::max(needed, r + 1);
  if (static_cast<int>(pending_.size()) < needed) pending_.resize(needed);
  for (int r : rows)
    for (int c : cols) pending_[r].push_back(c);
}

void SparseAssembler::finalize(int n) {
  require(!finalized_, "assembler: pattern already finalized");
  require(static_cast<int>(pending_.size()) <= n, "assembler: row index beyond dimension");
  n_ = n;
  pending_.resize(n);
  std::vector<Eigen::Triplet<double>> trips;
  for (int r = 0; r < n; ++r) {
    auto& cols = pending_[r];
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    for (int c : cols) trips.emplace_back(r, c, 0.0);
  }
  mat_.resize(n, n);
  mat_.setFromTriplets(trips.begin(), trips.end());
  mat_.makeCompressed();
  pending_.clear();
  pending_.shrink_to_fit();
  finalized_ = true;
}

void SparseAssembler::zero() {
  std::fill(mat_.valuePtr(), mat_.valuePtr() + mat_.nonZeros(), 0.0);
}

int SparseAssembler::slot(int r, int c) const {
  require(finalized_, "assembler: pattern not finalized");
  if (r < 0 || r >= n_ || c < 0 || c >= n_)
    fail("assembler: index (" + std::to_string(r) + "," + std::to_string(c) +
         ") out of range");
  const int* begin = mat_.innerIndexPtr() + mat_.outerIndexPtr()[r];
  const int* end = mat_.innerIndexPtr() + mat_.outerIndexPtr()[r + 1];
  const int* it = std::lower_bound(begin, end, c);
  if (it == end || *it != c)
    fail("assembler: entry (" + std::to_string(r) + "," + std::to_string(c) +
         ") not in preallocated pattern");
  return static_cast<int>(it - mat_.innerIndexPtr());
}

void LinearSolver::set_matrix(const SpMat& A) {
  require(A.rows() == A.cols(), "solver: matrix must be square");
  A_ = &A;
  if (cfg_.method == SolverConfig::Method::DirectLU) {
    lu_input_ = A;  // SparseLU wants column-major storage
    if (!pattern_analyzed_) {
      lu_.analyzePattern(lu_input_);
      pattern_analyzed_ = true;
    }
    lu_.factorize(lu_input_);
    if (lu_.info() != Eigen::Success)
      fail("solver: sparse LU factorization failed (singular pivot?)");
  }
}

SolveReport LinearSolver::solve(const Eigen::VectorXd& b, Eigen::VectorXd& x,
                                const Eigen::VectorXd* guess) {
  require(A_ != nullptr, "solver: no matrix set");
  require(b.size() == A_->rows(), "solver: rhs dimension mismatch");
  SolveReport rep;
  const double bnorm = b.norm();
  if (cfg_.method == SolverConfig::Method::DirectLU) {
    x = lu_.solve(b);
    if (lu_.info() != Eigen::Success) fail("solver: sparse LU solve failed");
    rep.iterations = 1;
  } else {
    Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<double>> it;
    it.setTolerance(cfg_.rel_tol);
    it.setMaxIterations(cfg_.max_iterations > 0 ? cfg_.max_iterations
                                                : 10 * static_cast<int>(A_->rows()));
    it.compute(*A_);
    if (guess)
      x = it.solveWithGuess(b, *guess);
    else
      x = it.solve(b);
    rep.iterations = static_cast<int>(it.iterations());
  }
  rep.rel_residual = bnorm > 0.0 ? (b - (*A_) * x).norm() / bnorm : (b - (*A_) * x).norm();
  if (!(rep.rel_residual <= 10.0 * cfg_.rel_tol) &&
      cfg_.method == SolverConfig::Method::BiCGStabJacobi)
    fail("solver: BiCGStab did not converge, relative residual " +
         std::to_string(rep.rel_residual) + " after " + std::to_string(rep.iterations) +
         " iterations");
  return rep;
}

void write_matrix_market(const SpMat& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
  char buf[64];
  for (int r = 0; r < A.outerSize(); ++r)
    for (SpMat::InnerIterator it(A, r); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.16e\n", static_cast<int>(it.row()) + 1,
                    static_cast<int>(it.col()) + 1, it.value());
      out << buf;
    }
}

}  // namespace geotherm
