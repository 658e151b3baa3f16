#include "sigred/linalg.hpp"

#include <numeric>

namespace sigred {

Expr determinant(const ExprMatrix& m) {
    const std::size_t n = m.size();
    if (n == 0) return Expr(1);
    if (n == 1) return m[0][0];
    if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    // Expand along the row with the most zeros.
    std::size_t best = 0;
    std::size_t best_zeros = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t zeros = 0;
        for (const auto& e : m[i]) zeros += e.is_zero();
        if (zeros > best_zeros) {
            best = i;
            best_zeros = zeros;
        }
    }
    std::vector<Expr> terms;
    for (std::size_t j = 0; j < n; ++j) {
        if (m[best][j].is_zero()) continue;
        ExprMatrix minor;
        minor.reserve(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == best) continue;
            std::vector<Expr> row;
            row.reserve(n - 1);
            for (std::size_t c = 0; c < n; ++c) {
                if (c != j) row.push_back(m[i][c]);
            }
            minor.push_back(std::move(row));
        }
        Expr term = m[best][j] * determinant(minor);
        terms.push_back((best + j) % 2 ? -term : term);
    }
    return sum(std::move(terms));
}

std::vector<Expr> cramer_solve(const ExprMatrix& m, const std::vector<Expr>& b) {
    const std::size_t n = m.size();
    Expr det = determinant(m);
    if (det.is_zero() || expand(det).is_zero()) throw DomainError("singular coefficient matrix");
    Expr inv_det = pow(det, Rational(-1));
    std::vector<Expr> x;
    x.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        bool b_zero = true;
        for (const auto& e : b) b_zero = b_zero && e.is_zero();
        if (b_zero) {
            x.emplace_back(0);
            continue;
        }
        ExprMatrix mk = m;
        for (std::size_t i = 0; i < n; ++i) mk[i][k] = b[i];
        Expr num = determinant(mk);
        x.push_back(num.is_zero() ? Expr(0) : num * inv_det);
    }
    return x;
}

std::size_t numeric_rank(const Eigen::MatrixXd& m, double rel_cutoff) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > rel_cutoff * s(0)) ++r;
    }
    return r;
}

std::vector<std::size_t> independent_rows(const Eigen::MatrixXd& m, std::size_t k, double rel_cutoff) {
    if (k == 0) return {};
    if (numeric_rank(m, rel_cutoff) < k) return {};
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m.transpose());
    std::vector<std::size_t> rows;
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t i = 0; i < k; ++i) rows.push_back(static_cast<std::size_t>(perm(static_cast<Eigen::Index>(i))));
    std::sort(rows.begin(), rows.end());
    return rows;
}

LeastSquares least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    LeastSquares out;
    if (a.cols() == 0) {
        out.x = Eigen::VectorXd();
        out.residual = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
        return out;
    }
    out.x = a.colPivHouseholderQr().solve(b);
    Eigen::VectorXd r = a * out.x - b;
    out.residual = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    return out;
}

} // namespace sigred
