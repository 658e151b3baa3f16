#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sigred/jet.hpp"
#include "sigred/symmetry.hpp"

namespace sigred {

class InverseRequired : public Error {
public:
    using Error::Error;
};
class ValidationFailed : public Error {
public:
    using Error::Error;
};
class LeakageDetected : public Error {
public:
    using Error::Error;
};
class NotRectifying : public Error {
public:
    using Error::Error;
};

/// Change from the base coordinates of a system to symmetry-adapted ones.
///
/// Target symbols split into invariants (common invariants of the fields)
/// and complementary coordinates (the ones rectifying the fields, in field
/// order). A complementary symbol listed in `parameters` stays a parameter:
/// its forward map may only involve source parameters, and its jet follows
/// from theirs.
struct CoordinateChange {
    Chart source;  // jet chart with time, as in DynamicalSystem
    std::vector<std::string> invariants;
    std::vector<std::string> complementary;
    std::vector<std::string> parameters;  // subset of complementary
    Substitution forward;  // target symbol -> expression in source symbols
    Substitution inverse;  // source symbol -> expression in target symbols

    std::vector<std::string> target_symbols() const;  // invariants then complementary
    bool is_parameter(std::string_view target) const;
    /// Time, target states, target parameters and their jets.
    Chart target_chart() const;

    /// Source jets in target coordinates: ẋᵃ = D_t(inverseᵃ), unrestricted.
    Substitution jet_inverse() const;
    /// Target jets in source coordinates: u̇ = D_t(forwardᵤ), unrestricted.
    Substitution jet_forward() const;
};

/// The change whose target is the source itself.
CoordinateChange identity_change(const DynamicalSystem& sys, std::vector<std::string> invariants,
                                 std::vector<std::string> complementary);

struct ChangeValidation {
    bool ok = false;
    double round_trip_source = 0.0;  // residual of inverse∘forward
    double round_trip_target = 0.0;  // residual of forward∘inverse
    bool jacobian_full_rank = false;
    std::string failure;
};

/// Checks both round trips with equals_numeric and the Jacobian rank of the
/// forward map at every accepted sample point. `target_domain` samples the
/// target symbols.
ChangeValidation validate_change(const CoordinateChange& change, const SampleDomain& domain = {},
                                 const SampleDomain& target_domain = {});

/// u̇ = X₀(forwardᵤ) written in target coordinates, for every target state.
/// Throws InverseRequired when the inverse map is incomplete.
DynamicalSystem transform_system(const DynamicalSystem& sys, const CoordinateChange& change);

/// The change read backwards: target becomes source.
CoordinateChange reversed(const CoordinateChange& change);

struct ReducedEquation {
    std::string symbol;
    Expr rhs;
};

struct ReductionResult {
    std::vector<ReducedEquation> reduced;
    std::vector<ReducedEquation> reconstruction;
    /// Set when the reduced right-hand sides only involve invariants.
    std::optional<DynamicalSystem> reduced_system;
    /// Orbital mode: uₖ̇ / u₁̇ for k ≥ 2, which must be free of complementary
    /// symbols even though the rates themselves carry a common factor.
    std::vector<ReducedEquation> ratios;
    double leakage = 0.0;
    bool orbital = false;
};

/// Splits a transformed system into the reduced block and the
/// reconstruction equations. For 32 fixings of the invariants the
/// complementary symbols are varied over 8 draws; the spread of every
/// reduced rate (or rate ratio in orbital mode) must stay below tolerance.
/// Throws LeakageDetected otherwise.
ReductionResult extract_reduced(const DynamicalSystem& transformed, const CoordinateChange& change,
                                const SampleDomain& domain = {}, Mode mode = Mode::Strict);

struct BetaForm {
    Expr beta;           // as supplied, on the source jet chart
    bool invariant = false;  // annihilated by the prolonged fields
    Expr value;          // restricted to solutions, in target coordinates
    double leakage = 0.0;
    bool reduced = false;  // value depends on invariants only
};

/// Reconstruction equations in the form βⱼ = Bⱼ(z) for user supplied
/// first-order invariants βⱼ.
std::vector<BetaForm> beta_forms(const DynamicalSystem& sys, const std::vector<VectorField>& prolonged,
                                 const CoordinateChange& change, const std::vector<Expr>& betas,
                                 const SampleDomain& domain = {});

/// A field pushed forward to the target jet chart.
VectorField push_forward(const VectorField& field, const CoordinateChange& change);

/// True iff each prolonged field reads ∂/∂yᵢ + σᵢⱼ ∂/∂ẏⱼ in the target
/// chart. Throws NotRectifying when some Xᵢ is not ∂/∂yᵢ there.
bool rectified_form_check(const std::vector<VectorField>& fields, const std::vector<VectorField>& prolonged,
                          const CoordinateChange& change, const SigmaMatrix& sigma, const SampleDomain& domain = {});

struct ConstantCheck {
    Expr candidate;
    bool constant = false;   // D_t I ≈ 0 on solutions
    bool invariant = false;  // Xᵢ(I) ≈ 0 for every field
    double motion_residual = 0.0;
    double invariance_residual = 0.0;
};

struct ConstantsReport {
    std::vector<ConstantCheck> candidates;
    std::size_t independent = 0;  // functionally independent among the passing ones
    std::size_t bound = 0;        // n − r − 1
    std::size_t n = 0;
    std::size_t r = 0;
    bool all_pass = true;
    std::string note;
};

ConstantsReport verify_constants_of_motion(const DynamicalSystem& sys, const std::vector<VectorField>& fields,
                                           const std::vector<Expr>& candidates, const SampleDomain& domain = {});

} // namespace sigred
