#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sigred/expr.hpp"

namespace sigred {

using ExprMatrix = std::vector<std::vector<Expr>>;  // row-major

/// Cofactor-expansion determinant. Zero entries are skipped, so triangular
/// and diagonal matrices come out as plain products.
Expr determinant(const ExprMatrix& m);

/// Solves the square system m * x = b by Cramer's rule.
std::vector<Expr> cramer_solve(const ExprMatrix& m, const std::vector<Expr>& b);

/// Numerical rank with singular values below `rel_cutoff * largest` dropped.
std::size_t numeric_rank(const Eigen::MatrixXd& m, double rel_cutoff = 1e-8);

/// Indices of `k` rows of `m` that are linearly independent, chosen by a
/// column-pivoted QR of the transpose. Empty when rank(m) < k.
std::vector<std::size_t> independent_rows(const Eigen::MatrixXd& m, std::size_t k, double rel_cutoff = 1e-8);

/// Least-squares solution of a * x = b with its residual max-norm.
struct LeastSquares {
    Eigen::VectorXd x;
    double residual = 0.0;
};
LeastSquares least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

} // namespace sigred
