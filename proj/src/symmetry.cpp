#include "sigred/symmetry.hpp"

#include <algorithm>
#include <cmath>

namespace sigred {

std::string_view verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Strong: return "strong";
    case Verdict::OnSolutions: return "on-solutions";
    case Verdict::Orbital: return "orbital";
    case Verdict::Fail: return "fail";
    }
    return "?";
}

namespace {

void require_vertical(const DynamicalSystem& sys, const std::vector<VectorField>& fields) {
    const auto& t = *sys.chart().time();
    for (const auto& f : fields) {
        if (!(f.chart() == sys.chart())) throw ChartMismatch("field chart differs from the system chart");
        if (!f.is_vertical()) throw NonVerticalField("field " + f.label() + " has a time component");
        if (f.has_jet_part()) throw NonVerticalField("field " + f.label() + " already carries jet coefficients");
        for (const auto& c : f.phi()) {
            if (depends_on(c, t)) throw NonVerticalField("field " + f.label() + " depends on time");
        }
    }
}

// Π(V)ᵃ for a vector of base components (states then parameters).
std::vector<Expr> fold_parameters(const DynamicalSystem& sys, const std::vector<Expr>& base) {
    auto states = sys.states();
    auto params = sys.parameters();
    std::vector<Expr> out;
    out.reserve(states.size());
    for (std::size_t a = 0; a < states.size(); ++a) {
        std::vector<Expr> terms{base[a]};
        for (std::size_t p = 0; p < params.size(); ++p) {
            const Expr& vp = base[states.size() + p];
            if (vp.is_zero()) continue;
            Expr d = differentiate(sys.rhs()[a], Chart::jet_name(params[p]));
            if (!d.is_zero()) terms.push_back(-(vp * d));
        }
        out.push_back(expand(sum(std::move(terms))));
    }
    return out;
}

std::vector<Expr> flatten(const std::vector<std::vector<Expr>>& m) {
    std::vector<Expr> out;
    for (const auto& row : m) out.insert(out.end(), row.begin(), row.end());
    return out;
}

Expr combination(const std::vector<Expr>& coeffs, const std::vector<std::vector<Expr>>& basis, std::size_t a) {
    std::vector<Expr> terms;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (!coeffs[j].is_zero() && !basis[j][a].is_zero()) terms.push_back(coeffs[j] * basis[j][a]);
    }
    return sum(std::move(terms));
}

Eigen::MatrixXd eval_columns(const std::vector<std::vector<Expr>>& cols, const Point& p) {
    const auto rows = cols.empty() ? 0 : cols.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        for (std::size_t a = 0; a < rows; ++a) {
            m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) = evaluate(cols[j][a], p);
        }
    }
    return m;
}

Eigen::VectorXd eval_vector(const std::vector<Expr>& v, const Point& p) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t a = 0; a < v.size(); ++a) out(static_cast<Eigen::Index>(a)) = evaluate(v[a], p);
    return out;
}

// Exact solution of Σⱼ cⱼ cols[j] = rhs by Cramer's rule on rows chosen at
// `at`, with near-zero entries replaced by structural zeros. Returns nullopt
// when the column matrix is singular at `at` or the solution fails the full
// system numerically.
std::optional<std::vector<Expr>> exact_coefficients(const std::vector<std::vector<Expr>>& cols,
                                                    const std::vector<Expr>& rhs, const Point& at,
                                                    const SampleDomain& domain) {
    const std::size_t s = cols.size();
    if (s == 0) return std::vector<Expr>{};
    auto rows = independent_rows(eval_columns(cols, at), s);
    if (rows.empty()) return std::nullopt;
    ExprMatrix sub;
    std::vector<Expr> b;
    for (auto r : rows) {
        std::vector<Expr> row;
        for (std::size_t j = 0; j < s; ++j) row.push_back(cols[j][r]);
        sub.push_back(std::move(row));
        b.push_back(rhs[r]);
    }
    std::vector<Expr> c;
    try {
        c = cramer_solve(sub, b);
        for (auto& e : c) {
            if (!e.is_zero() && is_zero_numeric(e, domain).equal) e = Expr(0);
        }
        for (std::size_t a = 0; a < rhs.size(); ++a) {
            if (!equals_numeric(rhs[a], combination(c, cols, a), domain).equal) return std::nullopt;
        }
    } catch (const DomainError&) {
        return std::nullopt;
    } catch (const InsufficientSamples&) {
        return std::nullopt;
    }
    return c;
}

} // namespace

DeterminingSystem determining_system(const DynamicalSystem& sys, const std::vector<VectorField>& fields) {
    require_vertical(sys, fields);
    DeterminingSystem d;
    VectorField x0 = sys.dynamical_field();
    d.flow = fold_parameters(sys, x0.phi());
    for (const auto& f : fields) {
        d.basis.push_back(fold_parameters(sys, f.phi()));
        d.lhs.push_back(fold_parameters(sys, lie_bracket(f, x0).phi()));
    }
    return d;
}

SymmetryReport check_sigma_symmetry(const DynamicalSystem& sys, const std::vector<VectorField>& fields,
                                    const SigmaMatrix& sigma, Mode mode, const SampleDomain& domain) {
    const std::size_t s = fields.size();
    if (sigma.size() != s) throw SizeMismatch("sigma size does not match the number of fields");
    auto d = determining_system(sys, fields);
    SymmetryReport rep;
    rep.sigma_bar = sigma.restricted(sys);
    const std::size_t n = sys.states().size();

    // Strict: Π([Xᵢ,X₀]) = σ̄ᵢⱼ Π(Xⱼ) componentwise.
    std::vector<std::vector<Expr>> rhs(s, std::vector<Expr>(n));
    rep.on_solutions = true;
    rep.residuals.assign(s, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t a = 0; a < n; ++a) {
            rhs[i][a] = combination(rep.sigma_bar.entries[i], d.basis, a);
            auto c = equals_numeric(d.lhs[i][a], rhs[i][a], domain);
            rep.residuals[i][a] = c.residual;
            rep.residual = std::max(rep.residual, c.residual);
            rep.on_solutions = rep.on_solutions && c.equal;
        }
    }

    // Strong: Yᵢ(ẋᵃ − fᵃ) vanishes on the whole jet space.
    auto prolonged = sigma_prolong(fields, sigma);
    auto states = sys.states();
    rep.strong = true;
    for (const auto& y : prolonged) {
        for (std::size_t a = 0; a < n; ++a) {
            Expr e = expand(apply(y, Expr::symbol(Chart::jet_name(states[a])) - sys.rhs()[a]));
            if (e.is_zero()) continue;
            auto c = is_zero_numeric(e, domain);
            rep.strong_residual = std::max(rep.strong_residual, c.residual);
            rep.strong = rep.strong && c.equal;
        }
    }

    if (mode == Mode::Orbital) {
        // Fit the strict residual Rᵢ to σᵢ₀ Π(X₀) pointwise.
        std::vector<Expr> all = flatten(d.lhs);
        auto rf = flatten(rhs);
        all.insert(all.end(), rf.begin(), rf.end());
        all.insert(all.end(), d.flow.begin(), d.flow.end());
        auto points = sample_points(domain, all);
        rep.sigma0.assign(s, {});
        bool fits = true;
        bool nonzero = false;
        for (std::size_t i = 0; i < s; ++i) {
            std::vector<Expr> resid(n);
            for (std::size_t a = 0; a < n; ++a) resid[a] = d.lhs[i][a] - rhs[i][a];
            for (const auto& p : points) {
                Eigen::VectorXd r = eval_vector(resid, p);
                Eigen::VectorXd v = eval_vector(d.flow, p);
                Eigen::VectorXd l = eval_vector(d.lhs[i], p);
                double vv = v.squaredNorm();
                double s0 = vv > 0 ? r.dot(v) / vv : 0.0;
                double fit = (r - s0 * v).cwiseAbs().maxCoeff() / (1.0 + l.cwiseAbs().maxCoeff());
                rep.orbital_residual = std::max(rep.orbital_residual, fit);
                rep.sigma0[i].push_back(s0);
                if (fit >= domain.tolerance) fits = false;
                if (std::abs(s0) > domain.tolerance) nonzero = true;
            }
        }
        rep.orbital = fits && nonzero;
    }

    if (rep.on_solutions) {
        rep.verdict = rep.strong ? Verdict::Strong : Verdict::OnSolutions;
    } else if (rep.orbital) {
        rep.verdict = Verdict::Orbital;
    } else {
        rep.verdict = Verdict::Fail;
    }
    return rep;
}

SigmaSolution solve_sigma(const DynamicalSystem& sys, const std::vector<VectorField>& fields,
                          const SampleDomain& domain) {
    auto d = determining_system(sys, fields);
    const std::size_t s = fields.size();
    const std::size_t n = sys.states().size();
    SigmaSolution out;
    std::vector<Expr> all = flatten(d.basis);
    auto lf = flatten(d.lhs);
    all.insert(all.end(), lf.begin(), lf.end());
    for (const auto& f : fields) all.insert(all.end(), f.phi().begin(), f.phi().end());
    out.points = sample_points(domain, all);

    // With parameters, Π can map independent fields onto dependent vectors.
    // Their coefficients are then not fixed by the determining equations and
    // are set to zero; only a pivot subset of the projections is solved for.
    std::vector<std::vector<Expr>> raw;
    for (const auto& f : fields) raw.push_back(f.phi());
    std::vector<std::size_t> active;
    {
        Eigen::MatrixXd m0 = eval_columns(d.basis, out.points.front());
        std::size_t r = numeric_rank(m0);
        if (r > 0) active = independent_rows(Eigen::MatrixXd(m0.transpose()), r);
    }
    std::vector<std::vector<Expr>> cols;
    for (auto j : active) cols.push_back(d.basis[j]);

    for (const auto& p : out.points) {
        if (numeric_rank(eval_columns(raw, p)) < s) {
            throw RankDeficient("the fields are linearly dependent at some sample point");
        }
        Eigen::MatrixXd m = eval_columns(cols, p);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < s; ++i) {
            Eigen::VectorXd l = eval_vector(d.lhs[i], p);
            auto ls = least_squares(m, l);
            double res = ls.residual / (1.0 + (n ? l.cwiseAbs().maxCoeff() : 0.0));
            out.residual = std::max(out.residual, res);
            std::vector<double> row(s, 0.0);
            for (std::size_t k = 0; k < active.size(); ++k) row[active[k]] = ls.x(static_cast<Eigen::Index>(k));
            rows.push_back(std::move(row));
        }
        out.at_points.push_back(std::move(rows));
    }
    if (out.residual >= domain.tolerance) {
        throw NoSolution("a bracket [Xi, X0] leaves the span of the fields (residual " +
                         std::to_string(out.residual) + "); no sigma exists");
    }
    std::vector<std::vector<Expr>> rows;
    bool exact = true;
    for (std::size_t i = 0; i < s && exact; ++i) {
        auto c = exact_coefficients(cols, d.lhs[i], out.points.front(), domain);
        if (!c) {
            exact = false;
            break;
        }
        std::vector<Expr> row(s, Expr(0));
        for (std::size_t k = 0; k < active.size(); ++k) row[active[k]] = cancel((*c)[k]);
        rows.push_back(std::move(row));
    }
    if (exact) {
        out.exact = true;
        out.sigma_bar = SigmaMatrix(std::move(rows));
    }
    return out;
}

namespace {

std::vector<Expr> base_of(const VectorField& f) { return f.phi(); }

} // namespace

DynamicalSystem theorem4_system(const DynamicalSystem& simplified, const std::vector<VectorField>& fields,
                                const std::vector<Expr>& alphas) {
    if (alphas.size() != fields.size()) throw SizeMismatch("one alpha per field is required");
    std::vector<Expr> rhs;
    for (std::size_t a = 0; a < simplified.rhs().size(); ++a) {
        std::vector<Expr> terms{simplified.rhs()[a]};
        for (std::size_t k = 0; k < fields.size(); ++k) terms.push_back(alphas[k] * base_of(fields[k])[a]);
        rhs.push_back(expand(sum(std::move(terms))));
    }
    return DynamicalSystem(simplified.chart(), std::move(rhs));
}

Theorem4Result theorem4_sigma(const DynamicalSystem& simplified, const std::vector<VectorField>& fields,
                              const std::vector<Expr>& alphas, const SampleDomain& domain) {
    require_vertical(simplified, fields);
    const std::size_t s = fields.size();
    if (alphas.size() != s) throw SizeMismatch("one alpha per field is required");

    VectorField x0 = simplified.dynamical_field();
    for (const auto& f : fields) {
        VectorField b = lie_bracket(f, x0);
        for (const auto& c : b.phi()) {
            if (!c.is_zero() && !is_zero_numeric(c, domain).equal) {
                throw NotStandardSymmetry("field " + f.label() + " does not commute with the simplified flow");
            }
        }
    }

    Theorem4Result out;
    out.beta.assign(s, std::vector<std::vector<Rational>>(s, std::vector<Rational>(s, Rational(0))));
    if (s > 1) {
        SampleDomain d16 = domain;
        d16.count = 16;
        auto inv = involution_check(fields, d16);
        for (const auto& pr : inv.pairs) {
            for (std::size_t k = 0; k < s; ++k) {
                Rational b;
                if (!pr.mu.empty() && pr.mu[k].is_constant()) {
                    b = pr.mu[k].value();
                } else {
                    double lo = pr.mu_at_points.front()[k];
                    double hi = lo;
                    for (const auto& v : pr.mu_at_points) {
                        lo = std::min(lo, v[k]);
                        hi = std::max(hi, v[k]);
                    }
                    if (hi - lo >= 1e-9) {
                        throw NonConstantStructure("structure function for [X" + std::to_string(pr.i + 1) + ", X" +
                                                   std::to_string(pr.j + 1) + "] is not constant");
                    }
                    if (!rationalize(0.5 * (lo + hi), 1e-9, b)) {
                        throw NonConstantStructure("structure constant is not a small rational");
                    }
                }
                out.beta[k][pr.i][pr.j] = b;
                out.beta[k][pr.j][pr.i] = -b;
            }
        }
    }
    auto beta = [&](std::size_t k, std::size_t i, std::size_t j) { return Expr(out.beta[k][i][j]); };

    std::vector<std::vector<Expr>> sigma(s, std::vector<Expr>(s));
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) {
            std::vector<Expr> terms{apply(fields[i], alphas[j])};
            for (std::size_t k = 0; k < s; ++k) terms.push_back(alphas[k] * beta(j, i, k));
            sigma[i][j] = expand(sum(std::move(terms)));
        }
    }
    out.sigma = SigmaMatrix(sigma);

    out.identity_holds = true;
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) {
            for (std::size_t k = 0; k < s; ++k) {
                std::vector<Expr> terms{apply(fields[i], sigma[j][k]), -apply(fields[j], sigma[i][k])};
                for (std::size_t m = 0; m < s; ++m) {
                    terms.push_back(sigma[i][m] * beta(k, m, j));
                    terms.push_back(-(sigma[j][m] * beta(k, m, i)));
                    terms.push_back(-(beta(m, i, j) * sigma[m][k]));
                }
                Expr e = expand(sum(std::move(terms)));
                if (e.is_zero()) continue;
                auto c = is_zero_numeric(e, domain);
                out.identity_residual = std::max(out.identity_residual, c.residual);
                out.identity_holds = out.identity_holds && c.equal;
            }
        }
    }
    return out;
}

std::vector<VectorField> CompletionResult::all() const {
    auto out = original;
    out.insert(out.end(), added.begin(), added.end());
    return out;
}

namespace {

bool in_span(const std::vector<VectorField>& span, const VectorField& v, const SampleDomain& domain) {
    std::vector<Expr> exprs = v.coefficient_list();
    for (const auto& f : span) {
        auto c = f.coefficient_list();
        exprs.insert(exprs.end(), c.begin(), c.end());
    }
    for (const auto& p : sample_points(domain, exprs)) {
        Eigen::MatrixXd a = coefficient_matrix(span, p).transpose();
        Eigen::VectorXd b = coefficient_matrix({v}, p).row(0).transpose();
        auto ls = least_squares(a, b);
        double scale = std::max(1.0, std::max(a.size() ? a.cwiseAbs().maxCoeff() : 0.0, b.cwiseAbs().maxCoeff()));
        if (ls.residual / scale >= domain.tolerance) return false;
    }
    return true;
}

} // namespace

CompletionResult complete_prolonged_set(const std::vector<VectorField>& prolonged, const SampleDomain& domain,
                                        std::size_t max_new) {
    if (prolonged.empty()) throw Error("completion needs at least one field");
    const Chart& chart = prolonged.front().chart();
    if (!chart.is_jet_chart()) throw ChartMismatch("completion works on a jet chart");
    CompletionResult out;
    out.original = prolonged;
    out.n = chart.dimension();
    if (max_new == 0) max_new = 2 * out.n;
    const std::size_t s = prolonged.size();

    std::vector<VectorField> base;
    for (const auto& y : prolonged) base.push_back(y.base_projection());
    std::optional<InvolutionReport> base_inv;

    std::vector<VectorField> current = prolonged;
    std::vector<std::pair<std::size_t, std::size_t>> work;
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i + 1; j < s; ++j) work.emplace_back(i, j);
    }
    for (std::size_t w = 0; w < work.size(); ++w) {
        auto [i, j] = work[w];
        VectorField b = lie_bracket(current[i], current[j]);
        if (b.is_zero() || in_span(current, b, domain)) continue;
        if (!b.has_zero_base_part()) {
            // Remove the part along the generators that the base brackets
            // dictate: [Yᵢ,Yⱼ] − μᵏᵢⱼ Yₖ with [Xᵢ,Xⱼ] = μᵏᵢⱼ Xₖ.
            if (i < s && j < s) {
                if (!base_inv) base_inv = analyze_involution(base, domain);
                if (base_inv->success && base_inv->exact) {
                    std::vector<Expr> coeffs{Expr(1)};
                    std::vector<VectorField> terms{b};
                    for (std::size_t k = 0; k < s; ++k) {
                        coeffs.push_back(-base_inv->mu(k, i, j));
                        terms.push_back(current[k]);
                    }
                    VectorField reduced = combine(coeffs, terms);
                    std::vector<Expr> comps;
                    for (const auto& c : reduced.components(true)) comps.push_back(expand(c));
                    std::vector<Expr> phi(comps.begin() + (chart.time() ? 1 : 0),
                                          comps.begin() + (chart.time() ? 1 : 0) + static_cast<std::ptrdiff_t>(out.n));
                    std::vector<Expr> psi(comps.end() - static_cast<std::ptrdiff_t>(out.n), comps.end());
                    b = VectorField(chart, chart.time() ? comps.front() : Expr(0), phi, psi);
                }
            }
            if (!b.has_zero_base_part()) {
                throw NonVerticalCompletion("bracket of generators " + std::to_string(i + 1) + " and " +
                                            std::to_string(j + 1) + " has a nonzero projection on M");
            }
        }
        if (out.added.size() == max_new) {
            throw CompletionOverflow("set is not involutive after adding " + std::to_string(max_new) + " fields");
        }
        b.set_label("Y" + std::to_string(current.size() + 1));
        current.push_back(b);
        out.added.push_back(b);
        for (std::size_t k = 0; k + 1 < current.size(); ++k) work.emplace_back(k, current.size() - 1);
    }

    out.r0 = distribution_rank(base, domain, Projection::Base);
    out.r = distribution_rank(current, domain, Projection::Full);

    for (const auto& m : out.added) {
        for (const auto& y : current) {
            VectorField c = lie_bracket(y, m);
            for (const auto& e : c.coefficient_list()) {
                if (e.is_zero()) continue;
                auto z = is_zero_numeric(e, domain);
                out.commute_residual = std::max(out.commute_residual, z.residual);
                out.commuting = out.commuting && z.equal;
            }
        }
        // ρ row: ψₘ = ρₘⱼ φⱼ.
        std::vector<std::vector<Expr>> cols;
        for (const auto& f : base) cols.push_back(f.phi());
        std::vector<Expr> all;
        for (const auto& c : cols) all.insert(all.end(), c.begin(), c.end());
        all.insert(all.end(), m.psi().begin(), m.psi().end());
        std::optional<std::vector<Expr>> row;
        try {
            auto pts = sample_points(domain, all);
            row = exact_coefficients(cols, m.psi(), pts.front(), domain);
        } catch (const InsufficientSamples&) {
        }
        out.rho.push_back(row ? *row : std::vector<Expr>{});
    }
    return out;
}

VectorField evolutionary_representative(const VectorField& field, const DynamicalSystem& sys) {
    if (field.is_vertical()) return field;
    auto base = field.chart().base_coordinates();
    auto states = sys.states();
    std::vector<Expr> phi;
    for (std::size_t a = 0; a < base.size(); ++a) {
        Expr rate = a < states.size() ? sys.rhs()[a] : Expr::symbol(Chart::jet_name(base[a]));
        phi.push_back(expand(field.phi()[a] - field.xi() * rate));
    }
    return VectorField(field.chart(), Expr(0), std::move(phi), std::nullopt, field.label());
}

} // namespace sigred
