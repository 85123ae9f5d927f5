#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "lmcf/errors.hpp"

namespace lmcf {

/// Sparse LU that reuses its symbolic analysis while the sparsity pattern is unchanged.
class SparseSolver {
public:
  Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& rhs) {
    factorize(a);
    return solve(rhs);
  }

  void factorize(const Eigen::SparseMatrix<double>& a) {
    if (!analyzed_ || a.nonZeros() != nnz_ || a.rows() != rows_) {
      lu_.analyzePattern(a);
      analyzed_ = true;
      nnz_ = a.nonZeros();
      rows_ = a.rows();
    }
    lu_.factorize(a);
    if (lu_.info() != Eigen::Success) throw ConvergenceError("sparse LU factorization failed");
  }

  /// Solve with the last factorized matrix.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) {
    Eigen::VectorXd x = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success || !x.allFinite()) throw ConvergenceError("sparse LU solve failed");
    return x;
  }

private:
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
  Eigen::Index nnz_ = 0;
  Eigen::Index rows_ = 0;
};

}  // namespace lmcf
