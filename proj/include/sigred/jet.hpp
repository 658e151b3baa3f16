#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sigred/chart.hpp"
#include "sigred/expr.hpp"
#include "sigred/sampling.hpp"
#include "sigred/vector_field.hpp"

namespace sigred {

class AlreadyAutonomous : public Error {
public:
    AlreadyAutonomous() : Error("system is already autonomous") {}
};

class OrderOverflow : public Error {
public:
    using Error::Error;
};

class ZeroDenominator : public Error {
public:
    using Error::Error;
};

/// ẋᵃ = fᵃ on a jet chart with a time symbol. States carry a right-hand
/// side; parameters do not, and their jets p' are free symbols that may
/// appear in the state equations.
class DynamicalSystem {
public:
    DynamicalSystem() = default;
    /// `rhs` follows chart.states(). The chart is extended with a time symbol
    /// and jet coordinates when missing.
    DynamicalSystem(const Chart& chart, std::vector<Expr> rhs);

    const Chart& chart() const { return chart_; }
    const std::vector<Expr>& rhs() const { return rhs_; }
    std::vector<std::string> states() const { return chart_.states(); }
    std::vector<std::string> parameters() const { return chart_.parameters(); }
    const Expr& rhs_for(std::string_view state) const;
    /// n = states + parameters.
    std::size_t dimension() const { return chart_.dimension(); }

    bool is_autonomous() const;
    bool has_parameters() const { return !chart_.parameters().empty(); }

    /// ẋᵃ → fᵃ for every state.
    const Substitution& restriction() const { return restriction_; }
    Expr restrict(const Expr& e) const { return substitute(e, restriction_); }

    /// X₀ = fᵃ ∂ₐ + p' ∂ₚ on the jet chart: the total derivative on solutions
    /// for time-independent functions.
    VectorField dynamical_field() const;

private:
    Chart chart_;
    std::vector<Expr> rhs_;
    Substitution restriction_;
};

/// s×s matrix of expressions on the jet chart.
struct SigmaMatrix {
    std::vector<std::vector<Expr>> entries;

    SigmaMatrix() = default;
    explicit SigmaMatrix(std::vector<std::vector<Expr>> e);
    static SigmaMatrix zero(std::size_t s);

    std::size_t size() const { return entries.size(); }
    const Expr& operator()(std::size_t i, std::size_t j) const { return entries[i][j]; }
    /// σ̄: every state jet replaced by its right-hand side.
    SigmaMatrix restricted(const DynamicalSystem& sys) const;
};

/// Adds the state x0 with ẋ0 = 1 and replaces t by x0 everywhere.
DynamicalSystem autonomize(const DynamicalSystem& sys);

/// Unrestricted D_t g = ∂g/∂t + Σ ẋᵃ ∂g/∂xᵃ over `chart`. Throws
/// OrderOverflow when g depends on a jet coordinate.
Expr total_derivative(const Expr& g, const Chart& chart);

/// Restricted total derivative: jets of states are replaced by fᵃ first, then
/// D_t = ∂_t + fᵃ ∂ₐ + p' ∂ₚ. Throws OrderOverflow when the restricted g still
/// depends on a parameter jet.
Expr total_derivative(const Expr& g, const DynamicalSystem& sys);

/// Yᵢ with ψᵃᵢ = (D_t φᵃᵢ − ẋᵃ D_t ξᵢ) + σᵢⱼ(φᵃⱼ − ẋᵃ ξⱼ) on the jet chart.
std::vector<VectorField> sigma_prolong(const std::vector<VectorField>& fields, const SigmaMatrix& sigma);

/// Θ = D_t z1 / D_t z2 for zero-order invariants z1, z2.
Expr derived_invariant(const Expr& z1, const Expr& z2, const Chart& chart);

struct InvariantCheck {
    bool invariant = true;
    double residual = 0.0;
    std::vector<double> per_field;
};

/// Yᵢ(g) ≈ 0 for every field.
InvariantCheck verify_invariant(const std::vector<VectorField>& fields, const Expr& g,
                                const SampleDomain& domain = {});

} // namespace sigred
