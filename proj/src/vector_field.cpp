#include "sigred/vector_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sigred/linalg.hpp"

namespace sigred {

VectorField::VectorField(Chart chart, Expr xi, std::vector<Expr> phi, std::optional<std::vector<Expr>> psi,
                         std::string label)
    : chart_(std::move(chart)), xi_(std::move(xi)), phi_(std::move(phi)), label_(std::move(label)) {
    const std::size_t n = chart_.dimension();
    if (phi_.size() != n) {
        throw SizeMismatch("vector field has " + std::to_string(phi_.size()) + " base coefficients for " +
                           std::to_string(n) + " coordinates");
    }
    if (!chart_.time() && !xi_.is_zero()) throw ChartMismatch("time coefficient on a chart without time");
    if (psi) {
        if (!chart_.is_jet_chart()) throw ChartMismatch("jet coefficients on a chart without jet coordinates");
        if (psi->size() != n) throw SizeMismatch("jet coefficient count does not match the dimension");
        psi_ = std::move(*psi);
        has_psi_ = true;
    }
}

bool VectorField::has_zero_base_part() const {
    return xi_.is_zero() && std::all_of(phi_.begin(), phi_.end(), [](const Expr& e) { return e.is_zero(); });
}

bool VectorField::is_zero() const {
    return has_zero_base_part() && std::all_of(psi_.begin(), psi_.end(), [](const Expr& e) { return e.is_zero(); });
}

VectorField VectorField::base_projection() const { return VectorField(chart_, xi_, phi_, std::nullopt, label_); }

std::vector<Expr> VectorField::components(bool include_jets) const {
    std::vector<Expr> out;
    if (chart_.time()) out.push_back(xi_);
    out.insert(out.end(), phi_.begin(), phi_.end());
    if (include_jets && chart_.is_jet_chart()) {
        if (has_psi_) {
            out.insert(out.end(), psi_.begin(), psi_.end());
        } else {
            out.insert(out.end(), phi_.size(), Expr(0));
        }
    }
    return out;
}

std::vector<std::string> VectorField::directions(bool include_jets) const {
    std::vector<std::string> out;
    if (chart_.time()) out.push_back(*chart_.time());
    auto base = chart_.base_coordinates();
    out.insert(out.end(), base.begin(), base.end());
    if (include_jets && chart_.is_jet_chart()) {
        for (const auto& b : base) out.push_back(Chart::jet_name(b));
    }
    return out;
}

std::vector<Expr> VectorField::coefficient_list() const { return components(true); }

bool operator==(const VectorField& a, const VectorField& b) {
    return a.chart_ == b.chart_ && a.components(true) == b.components(true);
}

Expr apply(const VectorField& field, const Expr& g) {
    const Chart& chart = field.chart();
    for (const auto& s : free_symbols(g)) {
        if (!chart.has(s)) throw ChartMismatch("symbol '" + s + "' is not in the vector field's chart");
    }
    auto dirs = field.directions(true);
    auto comps = field.components(true);
    std::vector<Expr> terms;
    for (std::size_t c = 0; c < dirs.size(); ++c) {
        if (comps[c].is_zero()) continue;
        Expr d = differentiate(g, dirs[c]);
        if (!d.is_zero()) terms.push_back(comps[c] * d);
    }
    return sum(std::move(terms));
}

namespace {

VectorField from_components(const Chart& chart, const std::vector<Expr>& comps, bool with_psi) {
    std::size_t at = 0;
    Expr xi(0);
    if (chart.time()) xi = comps[at++];
    const std::size_t n = chart.dimension();
    std::vector<Expr> phi(comps.begin() + static_cast<std::ptrdiff_t>(at),
                          comps.begin() + static_cast<std::ptrdiff_t>(at + n));
    at += n;
    std::optional<std::vector<Expr>> psi;
    if (with_psi) {
        psi.emplace(comps.begin() + static_cast<std::ptrdiff_t>(at), comps.begin() + static_cast<std::ptrdiff_t>(at + n));
    }
    return VectorField(chart, xi, std::move(phi), std::move(psi));
}

void require_same_chart(const VectorField& a, const VectorField& b) {
    if (!(a.chart() == b.chart())) throw ChartMismatch("vector fields live on different charts");
}

} // namespace

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
    require_same_chart(x, y);
    const bool with_psi = x.has_jet_part() || y.has_jet_part();
    auto cx = x.components(true);
    auto cy = y.components(true);
    std::vector<Expr> out(cx.size());
    for (std::size_t c = 0; c < cx.size(); ++c) out[c] = expand(apply(x, cy[c]) - apply(y, cx[c]));
    return from_components(x.chart(), out, with_psi);
}

VectorField combine(const std::vector<Expr>& coefficients, const std::vector<VectorField>& fields) {
    if (fields.empty()) throw SizeMismatch("cannot combine an empty list of fields");
    if (coefficients.size() != fields.size()) throw SizeMismatch("coefficient count does not match field count");
    bool with_psi = false;
    for (const auto& f : fields) {
        require_same_chart(fields.front(), f);
        with_psi = with_psi || f.has_jet_part();
    }
    auto n = fields.front().components(true).size();
    std::vector<std::vector<Expr>> terms(n);
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (coefficients[i].is_zero()) continue;
        auto c = fields[i].components(true);
        for (std::size_t k = 0; k < n; ++k) {
            if (!c[k].is_zero()) terms[k].push_back(coefficients[i] * c[k]);
        }
    }
    std::vector<Expr> out;
    out.reserve(n);
    for (auto& t : terms) out.push_back(sum(std::move(t)));
    return from_components(fields.front().chart(), out, with_psi);
}

VectorField operator-(const VectorField& a, const VectorField& b) { return combine({Expr(1), Expr(-1)}, {a, b}); }

VectorField scale(const Expr& c, const VectorField& f) { return combine({c}, {f}); }

Eigen::MatrixXd coefficient_matrix(const std::vector<VectorField>& fields, const Point& p, Projection projection) {
    const bool jets = projection == Projection::Full;
    const auto cols = fields.empty() ? 0 : fields.front().components(jets).size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(fields.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < fields.size(); ++i) {
        auto c = fields[i].components(jets);
        for (std::size_t k = 0; k < cols; ++k) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = evaluate(c[k], p);
        }
    }
    return m;
}

namespace {

std::vector<Expr> all_coefficients(const std::vector<VectorField>& fields) {
    std::vector<Expr> out;
    for (const auto& f : fields) {
        auto c = f.coefficient_list();
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}

} // namespace

std::size_t distribution_rank(const std::vector<VectorField>& fields, const SampleDomain& domain,
                              Projection projection) {
    if (fields.empty()) throw Error("distribution_rank needs at least one field");
    for (const auto& f : fields) require_same_chart(fields.front(), f);
    auto coeffs = all_coefficients(fields);
    auto points = sample_points(domain, coeffs);
    std::vector<std::size_t> profile;
    profile.reserve(points.size());
    for (const auto& p : points) profile.push_back(numeric_rank(coefficient_matrix(fields, p, projection)));
    auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
    if (*lo != *hi) {
        throw NonConstantRank("distribution rank varies between " + std::to_string(*lo) + " and " +
                                  std::to_string(*hi) + " over the sample domain",
                              profile);
    }
    return profile.front();
}

Expr InvolutionReport::mu(std::size_t k, std::size_t i, std::size_t j) const {
    if (i == j) return Expr(0);
    for (const auto& pr : pairs) {
        if (pr.i == i && pr.j == j) return pr.mu.at(k);
        if (pr.i == j && pr.j == i) return -pr.mu.at(k);
    }
    throw Error("no structure data for this pair");
}

double InvolutionReport::mu_at(std::size_t k, std::size_t i, std::size_t j, std::size_t p) const {
    if (i == j) return 0.0;
    for (const auto& pr : pairs) {
        if (pr.i == i && pr.j == j) return pr.mu_at_points.at(p).at(k);
        if (pr.i == j && pr.j == i) return -pr.mu_at_points.at(p).at(k);
    }
    throw Error("no structure data for this pair");
}

namespace {

std::string describe_point(const Point& p) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [k, v] : p.entries()) {
        os << (first ? "" : ", ") << k << "=" << v;
        first = false;
    }
    os << "}";
    return os.str();
}

// Exact μ for one bracket via Cramer's rule on a row subset chosen at a
// sample point; verified against all components numerically.
std::optional<std::vector<Expr>> exact_structure(const std::vector<VectorField>& fields, const VectorField& bracket,
                                                 const Point& at, const SampleDomain& domain) {
    const std::size_t s = fields.size();
    if (bracket.is_zero()) return std::vector<Expr>(s, Expr(0));
    for (const auto& c : bracket.coefficient_list()) {
        if (!is_rational_function(c)) return std::nullopt;
    }
    for (const auto& f : fields) {
        for (const auto& c : f.coefficient_list()) {
            if (!is_rational_function(c)) return std::nullopt;
        }
    }
    Eigen::MatrixXd m = coefficient_matrix(fields, at).transpose();
    auto rows = independent_rows(m, s);
    if (rows.empty()) return std::nullopt;
    std::vector<std::vector<Expr>> comps;
    for (const auto& f : fields) comps.push_back(f.components(true));
    auto b_full = bracket.components(true);
    ExprMatrix sub;
    std::vector<Expr> b;
    for (auto r : rows) {
        std::vector<Expr> row;
        for (std::size_t k = 0; k < s; ++k) row.push_back(comps[k][r]);
        sub.push_back(std::move(row));
        b.push_back(b_full[r]);
    }
    std::vector<Expr> mu;
    try {
        mu = cramer_solve(sub, b);
        for (std::size_t c = 0; c < b_full.size(); ++c) {
            std::vector<Expr> terms{b_full[c]};
            for (std::size_t k = 0; k < s; ++k) terms.push_back(-(mu[k] * comps[k][c]));
            if (!is_zero_numeric(sum(terms), domain).equal) return std::nullopt;
        }
    } catch (const DomainError&) {
        return std::nullopt;
    } catch (const InsufficientSamples&) {
        return std::nullopt;
    }
    return mu;
}

} // namespace

InvolutionReport analyze_involution(const std::vector<VectorField>& fields, const SampleDomain& domain) {
    InvolutionReport report;
    if (fields.empty()) throw Error("involution check needs at least one field");
    report.rank = distribution_rank(fields, domain);
    const std::size_t s = fields.size();

    std::vector<VectorField> brackets;
    std::vector<std::pair<std::size_t, std::size_t>> index;
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i + 1; j < s; ++j) {
            brackets.push_back(lie_bracket(fields[i], fields[j]));
            index.emplace_back(i, j);
        }
    }
    auto coeffs = all_coefficients(fields);
    auto bc = all_coefficients(brackets);
    coeffs.insert(coeffs.end(), bc.begin(), bc.end());
    report.points = sample_points(domain, coeffs);
    report.success = true;
    report.exact = true;

    for (std::size_t b = 0; b < brackets.size(); ++b) {
        PairStructure pr;
        pr.i = index[b].first;
        pr.j = index[b].second;
        for (const auto& p : report.points) {
            Eigen::MatrixXd a = coefficient_matrix(fields, p).transpose();
            Eigen::VectorXd rhs = coefficient_matrix({brackets[b]}, p).row(0).transpose();
            auto ls = least_squares(a, rhs);
            double scale = std::max(1.0, a.size() ? a.cwiseAbs().maxCoeff() : 0.0);
            double res = ls.residual / scale;
            pr.residual = std::max(pr.residual, res);
            pr.mu_at_points.emplace_back(ls.x.data(), ls.x.data() + ls.x.size());
            if (res >= domain.tolerance && report.success) {
                report.success = false;
                report.failure = "[X" + std::to_string(pr.i + 1) + ", X" + std::to_string(pr.j + 1) +
                                 "] leaves the span at " + describe_point(p) + " (residual " + std::to_string(res) +
                                 ")";
            }
        }
        report.residual = std::max(report.residual, pr.residual);
        if (report.success && pr.residual < domain.tolerance) {
            auto mu = exact_structure(fields, brackets[b], report.points.front(), domain);
            if (mu) {
                pr.mu = std::move(*mu);
            } else {
                report.exact = false;
            }
        } else {
            report.exact = false;
        }
        report.pairs.push_back(std::move(pr));
    }
    if (!report.success) report.exact = false;
    return report;
}

InvolutionReport involution_check(const std::vector<VectorField>& fields, const SampleDomain& domain) {
    auto report = analyze_involution(fields, domain);
    if (!report.success) throw NotInInvolution("fields are not in involution: " + report.failure, report);
    return report;
}

std::string to_string(const VectorField& field) {
    auto dirs = field.directions(true);
    auto comps = field.components(true);
    std::string out;
    for (std::size_t c = 0; c < dirs.size(); ++c) {
        if (comps[c].is_zero()) continue;
        if (!out.empty()) out += " + ";
        std::string coef = to_string(comps[c]);
        if (comps[c].kind() == Kind::Sum) coef = "(" + coef + ")";
        if (comps[c].is_one()) {
            out += "d/d" + dirs[c];
        } else {
            out += coef + " d/d" + dirs[c];
        }
    }
    return out.empty() ? "0" : out;
}

} // namespace sigred
