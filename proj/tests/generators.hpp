// Hand-rolled random generators for property tests.
#pragma once

#include <string>
#include <vector>

#include "sigred/expr.hpp"
#include "sigred/sampling.hpp"
#include "sigred/vector_field.hpp"

namespace gen {

using sigred::Expr;
using sigred::Rational;
using sigred::Rng;

inline Rational small_rational(Rng& rng) {
    long num = static_cast<long>(rng.index(9)) - 4;
    long den = static_cast<long>(rng.index(3)) + 1;
    return Rational(num, den);
}

inline Expr variable(Rng& rng, const std::vector<std::string>& vars) {
    return Expr::symbol(vars[rng.index(vars.size())]);
}

/// Random AST of depth at most `depth`. Logs and negative powers only wrap
/// expressions that stay positive on the default box (sums of squares plus
/// one), so samples are always admissible.
inline Expr expression(Rng& rng, const std::vector<std::string>& vars, int depth) {
    if (depth <= 0 || rng.index(4) == 0) {
        if (rng.index(3) == 0) return Expr(small_rational(rng));
        return variable(rng, vars);
    }
    switch (rng.index(6)) {
    case 0:
        return expression(rng, vars, depth - 1) + expression(rng, vars, depth - 1);
    case 1:
        return expression(rng, vars, depth - 1) * expression(rng, vars, depth - 1);
    case 2:
        return sigred::pow(expression(rng, vars, depth - 1), Rational(static_cast<long>(rng.index(3)) + 1));
    case 3: {
        Expr inner = expression(rng, vars, depth - 2);
        return sigred::pow(Expr(1) + inner * inner, Rational(-1, static_cast<long>(rng.index(2)) + 1));
    }
    case 4: {
        Expr inner = expression(rng, vars, depth - 2);
        return sigred::exp(sigred::pow(Expr(1) + inner * inner, Rational(-1)));
    }
    default: {
        Expr inner = expression(rng, vars, depth - 2);
        return sigred::log(Expr(1) + inner * inner);
    }
    }
}

/// Random polynomial of total degree at most `degree` with small integer
/// coefficients.
inline Expr polynomial(Rng& rng, const std::vector<std::string>& vars, int degree) {
    std::vector<Expr> terms;
    int n_terms = 1 + static_cast<int>(rng.index(4));
    for (int t = 0; t < n_terms; ++t) {
        Expr term(static_cast<int>(rng.index(7)) - 3);
        int d = static_cast<int>(rng.index(static_cast<std::size_t>(degree) + 1));
        for (int k = 0; k < d; ++k) term = term * variable(rng, vars);
        terms.push_back(term);
    }
    return sigred::sum(terms);
}

inline sigred::VectorField polynomial_field(Rng& rng, const sigred::Chart& chart, int degree) {
    auto base = chart.base_coordinates();
    std::vector<Expr> phi;
    for (std::size_t a = 0; a < base.size(); ++a) phi.push_back(polynomial(rng, base, degree));
    return sigred::VectorField(chart, Expr(0), phi);
}

} // namespace gen
