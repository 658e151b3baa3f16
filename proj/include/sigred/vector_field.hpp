#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigred/chart.hpp"
#include "sigred/expr.hpp"
#include "sigred/sampling.hpp"

namespace sigred {

class NonConstantRank : public Error {
public:
    NonConstantRank(const std::string& what, std::vector<std::size_t> profile)
        : Error(what), profile_(std::move(profile)) {}
    /// Rank at each accepted sample point.
    const std::vector<std::size_t>& profile() const noexcept { return profile_; }

private:
    std::vector<std::size_t> profile_;
};

/// ξ ∂_t + φᵃ ∂_{xᵃ} (+ ψᵃ ∂_{ẋᵃ} on a jet chart). The base coefficients
/// follow chart.base_coordinates(); jet coefficients follow the same order.
class VectorField {
public:
    VectorField() = default;
    VectorField(Chart chart, Expr xi, std::vector<Expr> phi, std::optional<std::vector<Expr>> psi = std::nullopt,
                std::string label = {});

    const Chart& chart() const { return chart_; }
    const Expr& xi() const { return xi_; }
    const std::vector<Expr>& phi() const { return phi_; }
    /// Jet coefficients; empty when the field has none.
    const std::vector<Expr>& psi() const { return psi_; }
    bool has_jet_part() const { return has_psi_; }
    const std::string& label() const { return label_; }
    void set_label(std::string label) { label_ = std::move(label); }

    /// ξ structurally zero.
    bool is_vertical() const { return xi_.is_zero(); }
    /// ξ and every φ structurally zero.
    bool has_zero_base_part() const;
    bool is_zero() const;

    /// Same field with the jet coefficients dropped.
    VectorField base_projection() const;

    /// Coefficients in chart order of directions: time (if the chart has
    /// one), base coordinates, then jets when `include_jets`.
    std::vector<Expr> components(bool include_jets = true) const;
    /// Direction symbols matching components().
    std::vector<std::string> directions(bool include_jets = true) const;

    /// Every coefficient expression, for sampling.
    std::vector<Expr> coefficient_list() const;

    friend bool operator==(const VectorField& a, const VectorField& b);

private:
    Chart chart_;
    Expr xi_;
    std::vector<Expr> phi_;
    std::vector<Expr> psi_;
    bool has_psi_ = false;
    std::string label_;
};

/// X(g) = ξ ∂g/∂t + φᵃ ∂g/∂xᵃ + ψᵃ ∂g/∂ẋᵃ. Throws ChartMismatch when g uses
/// a symbol outside X's chart.
Expr apply(const VectorField& field, const Expr& g);

/// [X, Y], componentwise X(Y^c) − Y(X^c), expanded.
VectorField lie_bracket(const VectorField& x, const VectorField& y);

/// Σ cᵢ Xᵢ with expression coefficients.
VectorField combine(const std::vector<Expr>& coefficients, const std::vector<VectorField>& fields);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField scale(const Expr& c, const VectorField& f);

enum class Projection { Base, Full };

/// Rows = fields, columns = directions, at one point.
Eigen::MatrixXd coefficient_matrix(const std::vector<VectorField>& fields, const Point& p,
                                   Projection projection = Projection::Full);

/// Common pointwise rank over the sample domain. Throws NonConstantRank.
std::size_t distribution_rank(const std::vector<VectorField>& fields, const SampleDomain& domain = {},
                              Projection projection = Projection::Full);

/// [Xᵢ, Xⱼ] = μᵏᵢⱼ Xₖ data for one pair i < j.
struct PairStructure {
    std::size_t i = 0;
    std::size_t j = 0;
    std::vector<Expr> mu;  // exact μᵏᵢⱼ, k = 0..s-1; empty if only sampled
    std::vector<std::vector<double>> mu_at_points;
    double residual = 0.0;
};

struct InvolutionReport {
    bool success = false;
    bool exact = false;  // every pair has exact μ
    std::size_t rank = 0;
    double residual = 0.0;
    std::vector<PairStructure> pairs;
    std::vector<Point> points;
    std::string failure;  // offending pair and point when !success

    /// μᵏᵢⱼ for any ordered pair, using antisymmetry. Requires exact.
    Expr mu(std::size_t k, std::size_t i, std::size_t j) const;
    /// Sampled μᵏᵢⱼ at point index p.
    double mu_at(std::size_t k, std::size_t i, std::size_t j, std::size_t p) const;
};

class NotInInvolution : public Error {
public:
    NotInInvolution(const std::string& what, InvolutionReport report) : Error(what), report_(std::move(report)) {}
    const InvolutionReport& report() const noexcept { return report_; }

private:
    InvolutionReport report_;
};

/// Involution analysis without throwing on failure.
InvolutionReport analyze_involution(const std::vector<VectorField>& fields, const SampleDomain& domain = {});

/// Same as analyze_involution but throws NotInInvolution on failure.
InvolutionReport involution_check(const std::vector<VectorField>& fields, const SampleDomain& domain = {});

std::string to_string(const VectorField& field);

} // namespace sigred
