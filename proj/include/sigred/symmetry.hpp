#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sigred/jet.hpp"
#include "sigred/linalg.hpp"
#include "sigred/vector_field.hpp"

namespace sigred {

class NonVerticalField : public Error {
public:
    using Error::Error;
};
class NoSolution : public Error {
public:
    using Error::Error;
};
class RankDeficient : public Error {
public:
    using Error::Error;
};
class NotStandardSymmetry : public Error {
public:
    using Error::Error;
};
class NonConstantStructure : public Error {
public:
    using Error::Error;
};
class CompletionOverflow : public Error {
public:
    using Error::Error;
};
class NonVerticalCompletion : public Error {
public:
    using Error::Error;
};

enum class Mode { Strict, Orbital };
enum class Verdict { Strong, OnSolutions, Orbital, Fail };

std::string_view verdict_name(Verdict v);

/// Both sides of the determining equations
///   Π([Xᵢ, X₀]) = σ̄ᵢⱼ Π(Xⱼ)
/// with one entry per state. Π(V)ᵃ = Vᵃ − Vᵖ ∂fᵃ/∂p' folds in parameter
/// components; without parameters Π is the identity on state components.
struct DeterminingSystem {
    std::vector<std::vector<Expr>> lhs;    // [i][a]
    std::vector<std::vector<Expr>> basis;  // [j][a]
    std::vector<Expr> flow;                // Π(X₀)ᵃ
};

DeterminingSystem determining_system(const DynamicalSystem& sys, const std::vector<VectorField>& fields);

struct SymmetryReport {
    Verdict verdict = Verdict::Fail;
    bool strong = false;
    bool on_solutions = false;
    bool orbital = false;
    /// Max residual of the strict bracket condition, per field and state.
    std::vector<std::vector<double>> residuals;
    double residual = 0.0;         // of the strict condition
    double strong_residual = 0.0;  // of Yᵢ(ẋᵃ − fᵃ) on the whole jet space
    double orbital_residual = 0.0; // of the orbital fit (orbital mode only)
    SigmaMatrix sigma_bar;
    /// σᵢ₀ sampled at each accepted point (orbital mode only).
    std::vector<std::vector<double>> sigma0;
};

/// Checks [Xᵢ, X₀] = σ̄ᵢⱼ Xⱼ (strict) or [Xᵢ, X₀] = σᵢ₀ X₀ + σ̄ᵢⱼ Xⱼ
/// (orbital), and separately whether the prolonged fields leave ẋ − f
/// invariant without restriction (strong).
SymmetryReport check_sigma_symmetry(const DynamicalSystem& sys, const std::vector<VectorField>& fields,
                                    const SigmaMatrix& sigma, Mode mode = Mode::Strict,
                                    const SampleDomain& domain = {});

struct SigmaSolution {
    bool exact = false;
    SigmaMatrix sigma_bar;  // valid when exact
    std::vector<std::vector<std::vector<double>>> at_points;  // [point][i][j]
    std::vector<Point> points;
    double residual = 0.0;
};

/// Solves the determining equations for σ̄ given the fields. Throws
/// RankDeficient when the fields are dependent and NoSolution when some
/// bracket leaves their span.
SigmaSolution solve_sigma(const DynamicalSystem& sys, const std::vector<VectorField>& fields,
                          const SampleDomain& domain = {});

struct Theorem4Result {
    SigmaMatrix sigma;
    /// beta[k][i][j] with [Xᵢ, Xⱼ] = βᵏᵢⱼ Xₖ.
    std::vector<std::vector<std::vector<Rational>>> beta;
    double identity_residual = 0.0;
    bool identity_holds = false;
};

/// For standard symmetries Xᵢ of ẋ = f with constant structure constants,
/// σᵢⱼ = αₖ β^j_{ik} + Xᵢ(αⱼ), together with a check of the identity
///   Xᵢ(σⱼₖ) − Xⱼ(σᵢₖ) + σᵢₘ βᵏₘⱼ − σⱼₘ βᵏₘᵢ − βᵐᵢⱼ σₘₖ = 0.
Theorem4Result theorem4_sigma(const DynamicalSystem& simplified, const std::vector<VectorField>& fields,
                              const std::vector<Expr>& alphas, const SampleDomain& domain = {});

/// ẋ = f + αₖ φₖ, the family covered by theorem4_sigma.
DynamicalSystem theorem4_system(const DynamicalSystem& simplified, const std::vector<VectorField>& fields,
                                const std::vector<Expr>& alphas);

struct CompletionResult {
    std::vector<VectorField> original;
    std::vector<VectorField> added;
    std::size_t r0 = 0;
    std::size_t r = 0;
    std::size_t n = 0;
    bool commuting = true;  // added fields commute with every generator
    double commute_residual = 0.0;
    /// ρ block of σ̂: ψₘ = ρₘⱼ φⱼ; empty rows when not expressible.
    std::vector<std::vector<Expr>> rho;

    long delta() const { return static_cast<long>(r) - static_cast<long>(r0); }
    long theta() const { return static_cast<long>(r0) - delta(); }
    std::size_t kappa0() const { return n - r0; }
    std::vector<VectorField> all() const;
};

/// Adds brackets outside the current span until the set is involutive.
/// `max_new` of 0 means 2n.
CompletionResult complete_prolonged_set(const std::vector<VectorField>& prolonged, const SampleDomain& domain = {},
                                        std::size_t max_new = 0);

/// Vertical field with coefficients φᵃ − ξ fᵃ.
VectorField evolutionary_representative(const VectorField& field, const DynamicalSystem& sys);

} // namespace sigred
