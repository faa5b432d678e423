#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <string>
#include <vector>

#include "geotherm/common.hpp"

namespace geotherm {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Preallocated sparsity pattern with in-place accumulation. Entries outside
/// the pattern are a hard error; re-assembly after zero() is idempotent.
class SparseAssembler {
 public:
  /// Pattern-building phase: declare that all (row, col) pairs of the block
  /// may receive contributions.
  void reserve_block(const std::vector<int>& rows, const std::vector<int>& cols);
  void finalize(int n);

  void zero();
  void add(int r, int c, double v) { values()[slot(r, c)] += v; }

  /// Index into the value array for (r, c); hard error when out of pattern.
  int slot(int r, int c) const;
  double* values() { return mat_.valuePtr(); }

  int size() const { return n_; }
  bool finalized() const { return finalized_; }
  const SpMat& matrix() const { return mat_; }

 private:
  int n_ = 0;
  bool finalized_ = false;
  std::vector<std::vector<int>> pending_;
  SpMat mat_;
};

struct SolverConfig {
  enum class Method { DirectLU, BiCGStabJacobi };
  Method method = Method::BiCGStabJacobi;
  double rel_tol = 1e-10;   // in (0,1)
  int max_iterations = 0;   // 0 means 10*n

  void validate() const {
    require(rel_tol > 0.0 && rel_tol < 1.0, "solver: tolerance must be in (0,1)");
    require(max_iterations >= 0, "solver: max iterations must be >= 1 (or 0 for default)");
  }
};

struct SolveReport {
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Linear solution service. set_matrix() captures (and factorizes, in direct
/// mode) the operator; solve() may then be called repeatedly, so steppers with
/// static matrices pay for one factorization only.
class LinearSolver {
 public:
  explicit LinearSolver(SolverConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  void set_matrix(const SpMat& A);
  /// Solves with the captured matrix; guess seeds the iterative method.
  SolveReport solve(const Eigen::VectorXd& b, Eigen::VectorXd& x,
                    const Eigen::VectorXd* guess = nullptr);
  /// One-shot convenience.
  SolveReport solve(const SpMat& A, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                    const Eigen::VectorXd* guess = nullptr) {
    set_matrix(A);
    return solve(b, x, guess);
  }

  const SolverConfig& config() const { return cfg_; }

 private:
  SolverConfig cfg_;
  const SpMat* A_ = nullptr;
  Eigen::SparseMatrix<double> lu_input_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool pattern_analyzed_ = false;
};

/// MatrixMarket coordinate-format dump for debugging.
void write_matrix_market(const SpMat& A, const std::string& path);

}  // namespace geotherm
