#include "sigred/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sigred/linalg.hpp"

namespace sigred {

std::vector<std::string> CoordinateChange::target_symbols() const {
    auto out = invariants;
    out.insert(out.end(), complementary.begin(), complementary.end());
    return out;
}

bool CoordinateChange::is_parameter(std::string_view target) const {
    return std::find(parameters.begin(), parameters.end(), target) != parameters.end();
}

Chart CoordinateChange::target_chart() const {
    std::vector<std::string> states;
    for (const auto& s : target_symbols()) {
        if (!is_parameter(s)) states.push_back(s);
    }
    return Chart::make(source.time(), states, parameters);
}

Substitution CoordinateChange::jet_inverse() const {
    Chart target = target_chart();
    Substitution out;
    for (const auto& s : source.base_coordinates()) {
        auto it = inverse.find(s);
        if (it == inverse.end()) throw InverseRequired("no inverse given for " + s);
        out[Chart::jet_name(s)] = expand(total_derivative(it->second, target));
    }
    return out;
}

Substitution CoordinateChange::jet_forward() const {
    Substitution out;
    for (const auto& u : target_symbols()) {
        auto it = forward.find(u);
        if (it == forward.end()) throw ValidationFailed("no forward map given for " + u);
        out[Chart::jet_name(u)] = expand(total_derivative(it->second, source));
    }
    return out;
}

CoordinateChange identity_change(const DynamicalSystem& sys, std::vector<std::string> invariants,
                                 std::vector<std::string> complementary) {
    CoordinateChange c;
    c.source = sys.chart();
    c.invariants = std::move(invariants);
    c.complementary = std::move(complementary);
    for (const auto& p : sys.parameters()) {
        if (std::find(c.complementary.begin(), c.complementary.end(), p) != c.complementary.end()) {
            c.parameters.push_back(p);
        }
    }
    for (const auto& s : sys.chart().base_coordinates()) {
        c.forward[s] = Expr::symbol(s);
        c.inverse[s] = Expr::symbol(s);
    }
    return c;
}

CoordinateChange reversed(const CoordinateChange& change) {
    CoordinateChange r;
    r.source = change.target_chart();
    r.forward = change.inverse;
    r.inverse = change.forward;
    auto states = change.source.states();
    auto params = change.source.parameters();
    r.complementary = states;
    r.complementary.insert(r.complementary.end(), params.begin(), params.end());
    r.parameters = params;
    return r;
}

namespace {

void require_complete(const CoordinateChange& change) {
    for (const auto& u : change.target_symbols()) {
        if (!change.forward.count(u)) throw ValidationFailed("no forward map given for " + u);
    }
    for (const auto& s : change.source.base_coordinates()) {
        if (!change.inverse.count(s)) throw InverseRequired("no inverse given for " + s);
    }
    if (change.target_symbols().size() != change.source.dimension()) {
        throw ValidationFailed("the target chart must have as many symbols as the source");
    }
}

// Source base symbols and source parameter jets, expressed in the target.
Substitution to_target(const CoordinateChange& change, bool all_jets) {
    Substitution sub = change.inverse;
    Substitution jets = change.jet_inverse();
    auto params = change.source.parameters();
    for (const auto& [name, e] : jets) {
        bool is_param_jet = false;
        for (const auto& p : params) is_param_jet = is_param_jet || name == Chart::jet_name(p);
        if (all_jets || is_param_jet) sub[name] = e;
    }
    return sub;
}

// Draws a value for every name; retries until `ok` accepts or the budget
// runs out.
template <class Accept>
bool draw(Rng& rng, const SampleDomain& domain, const std::vector<std::string>& names, Point& p, Accept&& ok) {
    for (std::size_t attempt = 0; attempt < domain.max_draws(); ++attempt) {
        for (const auto& n : names) {
            Interval iv = domain.bounds_for(n);
            p.set(n, rng.uniform(iv.lo, iv.hi));
        }
        if (ok(p)) return true;
    }
    return false;
}

bool finite_values(const std::vector<Expr>& exprs, const Point& p, std::vector<double>& out) {
    out.clear();
    try {
        for (const auto& e : exprs) {
            double v = evaluate(e, p);
            if (!std::isfinite(v)) return false;
            out.push_back(v);
        }
    } catch (const DomainError&) {
        return false;
    }
    return true;
}

// Largest relative spread of `exprs` when the `vary` symbols change while
// the `fixed` ones stay put. Returns the first accepted point via `slice`.
double leakage(const std::vector<Expr>& exprs, const std::vector<std::string>& fixed,
               const std::vector<std::string>& vary, const SampleDomain& domain, Point* slice = nullptr) {
    std::set<std::string> vary_set(vary.begin(), vary.end());
    bool any = false;
    for (const auto& e : exprs) {
        for (const auto& s : free_symbols(e)) any = any || vary_set.count(s);
    }
    Rng rng(domain.seed);
    std::vector<std::string> all = fixed;
    for (const auto& e : exprs) {
        for (const auto& s : free_symbols(e)) {
            if (!vary_set.count(s) && std::find(all.begin(), all.end(), s) == all.end()) all.push_back(s);
        }
    }
    std::vector<double> vals;
    auto evaluable = [&](const Point& p) { return finite_values(exprs, p, vals); };
    if (!any) {
        if (slice) {
            Point p;
            std::vector<std::string> names = all;
            names.insert(names.end(), vary.begin(), vary.end());
            if (draw(rng, domain, names, p, evaluable)) *slice = p;
        }
        return 0.0;
    }
    double worst = 0.0;
    std::size_t fixings = 0;
    for (std::size_t attempt = 0; fixings < 32 && attempt < 32 * 10; ++attempt) {
        Point p;
        for (const auto& n : all) {
            Interval iv = domain.bounds_for(n);
            p.set(n, rng.uniform(iv.lo, iv.hi));
        }
        std::vector<double> lo(exprs.size(), std::numeric_limits<double>::infinity());
        std::vector<double> hi(exprs.size(), -std::numeric_limits<double>::infinity());
        std::size_t draws = 0;
        for (std::size_t k = 0; draws < 8 && k < 80; ++k) {
            if (!draw(rng, domain, vary, p, evaluable)) break;
            if (slice && fixings == 0 && draws == 0) *slice = p;
            for (std::size_t i = 0; i < exprs.size(); ++i) {
                lo[i] = std::min(lo[i], vals[i]);
                hi[i] = std::max(hi[i], vals[i]);
            }
            ++draws;
        }
        if (draws < 8) continue;
        ++fixings;
        for (std::size_t i = 0; i < exprs.size(); ++i) {
            double scale = 1.0 + std::max(std::abs(lo[i]), std::abs(hi[i]));
            worst = std::max(worst, (hi[i] - lo[i]) / scale);
        }
    }
    if (fixings < 32) throw InsufficientSamples("could not certify independence: too few admissible draws");
    return worst;
}

// Replaces the varying symbols by rational values of an admissible slice.
Expr on_slice(const Expr& e, const std::vector<std::string>& vary, const Point& slice) {
    Substitution sub;
    for (const auto& v : vary) {
        const double* x = slice.find(v);
        if (!x) continue;
        Rational q;
        if (!rationalize(*x, 1e-3, q, 100)) q = Rational(static_cast<long>(std::lround(*x * 100)), 100);
        sub[v] = Expr(q);
    }
    return expand(substitute(e, sub));
}

} // namespace

ChangeValidation validate_change(const CoordinateChange& change, const SampleDomain& domain,
                                 const SampleDomain& target_domain) {
    ChangeValidation out;
    try {
        require_complete(change);
        for (const auto& s : change.source.base_coordinates()) {
            auto c = equals_numeric(Expr::symbol(s), substitute(change.inverse.at(s), change.forward), domain);
            out.round_trip_source = std::max(out.round_trip_source, c.residual);
            if (!c.equal) out.failure = "inverse(forward(" + s + ")) differs from " + s;
        }
        for (const auto& u : change.target_symbols()) {
            auto c =
                equals_numeric(Expr::symbol(u), substitute(change.forward.at(u), change.inverse), target_domain);
            out.round_trip_target = std::max(out.round_trip_target, c.residual);
            if (!c.equal && out.failure.empty()) out.failure = "forward(inverse(" + u + ")) differs from " + u;
        }
        auto src = change.source.base_coordinates();
        auto tgt = change.target_symbols();
        std::vector<std::vector<Expr>> jac(tgt.size());
        std::vector<Expr> all;
        for (std::size_t i = 0; i < tgt.size(); ++i) {
            for (const auto& s : src) {
                jac[i].push_back(differentiate(change.forward.at(tgt[i]), s));
                all.push_back(jac[i].back());
            }
        }
        out.jacobian_full_rank = true;
        for (const auto& p : sample_points(domain, all)) {
            Eigen::MatrixXd m(static_cast<Eigen::Index>(tgt.size()), static_cast<Eigen::Index>(src.size()));
            for (std::size_t i = 0; i < tgt.size(); ++i) {
                for (std::size_t j = 0; j < src.size(); ++j) {
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = evaluate(jac[i][j], p);
                }
            }
            if (numeric_rank(m) < src.size()) {
                out.jacobian_full_rank = false;
                if (out.failure.empty()) out.failure = "the Jacobian of the forward map is singular somewhere";
                break;
            }
        }
    } catch (const InsufficientSamples& e) {
        out.failure = e.what();
    } catch (const ValidationFailed& e) {
        out.failure = e.what();
    } catch (const InverseRequired& e) {
        out.failure = e.what();
    }
    out.ok = out.failure.empty();
    return out;
}

DynamicalSystem transform_system(const DynamicalSystem& sys, const CoordinateChange& change) {
    require_complete(change);
    if (!(sys.chart() == change.source)) throw ChartMismatch("change source differs from the system chart");
    VectorField x0 = sys.dynamical_field();
    Substitution sub = to_target(change, false);
    Chart target = change.target_chart();
    std::vector<Expr> rhs;
    for (const auto& u : target.states()) {
        Expr rate = cancel(apply(x0, change.forward.at(u)));
        rhs.push_back(cancel(substitute(rate, sub)));
    }
    return DynamicalSystem(target, std::move(rhs));
}

ReductionResult extract_reduced(const DynamicalSystem& transformed, const CoordinateChange& change,
                                const SampleDomain& domain, Mode mode) {
    ReductionResult out;
    out.orbital = mode == Mode::Orbital;
    std::vector<std::string> vary;
    for (const auto& c : change.complementary) {
        vary.push_back(c);
        if (change.is_parameter(c)) vary.push_back(Chart::jet_name(c));
    }
    for (const auto& u : change.invariants) out.reduced.push_back({u, transformed.rhs_for(u)});
    for (const auto& c : change.complementary) {
        if (!change.is_parameter(c)) out.reconstruction.push_back({c, transformed.rhs_for(c)});
    }

    std::vector<Expr> probe;
    if (out.orbital) {
        if (out.reduced.size() < 2) throw Error("orbital reduction needs at least two invariants");
        const Expr& lead = out.reduced.front().rhs;
        for (std::size_t k = 1; k < out.reduced.size(); ++k) {
            Expr ratio = expand(out.reduced[k].rhs) / expand(lead);
            out.ratios.push_back({out.reduced[k].symbol, ratio});
            probe.push_back(ratio);
        }
    } else {
        for (const auto& r : out.reduced) probe.push_back(r.rhs);
    }
    Point slice;
    out.leakage = leakage(probe, change.invariants, vary, domain, &slice);
    if (out.leakage >= domain.tolerance) {
        throw LeakageDetected("reduced rates depend on complementary coordinates (spread " +
                              std::to_string(out.leakage) + ")");
    }
    std::set<std::string> vary_set(vary.begin(), vary.end());
    auto leaks = [&](const Expr& e) {
        for (const auto& s : free_symbols(e)) {
            if (vary_set.count(s)) return true;
        }
        return false;
    };
    if (out.orbital) {
        for (auto& r : out.ratios) {
            if (!leaks(r.rhs)) continue;
            Expr flat = on_slice(r.rhs, vary, slice);
            if (equals_numeric(r.rhs, flat, domain).equal) r.rhs = flat;
        }
        return out;
    }
    std::vector<Expr> rhs;
    bool clean = true;
    for (auto& r : out.reduced) {
        if (leaks(r.rhs)) {
            Expr flat = on_slice(r.rhs, vary, slice);
            if (leaks(flat) || !equals_numeric(r.rhs, flat, domain).equal) {
                clean = false;
            } else {
                r.rhs = flat;
            }
        }
        rhs.push_back(r.rhs);
    }
    if (clean) {
        out.reduced_system = DynamicalSystem(Chart::make(change.source.time(), change.invariants), rhs);
    }
    return out;
}

std::vector<BetaForm> beta_forms(const DynamicalSystem& sys, const std::vector<VectorField>& prolonged,
                                 const CoordinateChange& change, const std::vector<Expr>& betas,
                                 const SampleDomain& domain) {
    Substitution sub = to_target(change, false);
    std::vector<std::string> vary;
    for (const auto& c : change.complementary) {
        vary.push_back(c);
        if (change.is_parameter(c)) vary.push_back(Chart::jet_name(c));
    }
    std::vector<BetaForm> out;
    for (const auto& b : betas) {
        BetaForm f;
        f.beta = b;
        f.invariant = verify_invariant(prolonged, b, domain).invariant;
        f.value = cancel(substitute(cancel(sys.restrict(b)), sub));
        f.leakage = leakage({f.value}, change.invariants, vary, domain);
        f.reduced = f.leakage < domain.tolerance;
        out.push_back(std::move(f));
    }
    return out;
}

VectorField push_forward(const VectorField& field, const CoordinateChange& change) {
    require_complete(change);
    Chart target = change.target_chart();
    Substitution sub = to_target(change, true);
    auto tgt_base = target.base_coordinates();
    std::vector<Expr> phi;
    for (const auto& u : tgt_base) phi.push_back(expand(substitute(apply(field, change.forward.at(u)), sub)));
    std::optional<std::vector<Expr>> psi;
    if (field.has_jet_part()) {
        Substitution jf = change.jet_forward();
        psi.emplace();
        for (const auto& u : tgt_base) {
            psi->push_back(expand(substitute(apply(field, jf.at(Chart::jet_name(u))), sub)));
        }
    }
    Expr xi = expand(substitute(field.xi(), sub));
    return VectorField(target, xi, phi, psi, field.label());
}

bool rectified_form_check(const std::vector<VectorField>& fields, const std::vector<VectorField>& prolonged,
                          const CoordinateChange& change, const SigmaMatrix& sigma, const SampleDomain& domain) {
    if (fields.size() != change.complementary.size() || prolonged.size() != fields.size() ||
        sigma.size() != fields.size()) {
        throw SizeMismatch("one complementary coordinate and one sigma row per field are required");
    }
    Chart target = change.target_chart();
    auto tgt_base = target.base_coordinates();
    auto index_of = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(tgt_base.begin(), tgt_base.end(), name) - tgt_base.begin());
    };
    auto close = [&](const Expr& a, const Expr& b) {
        Expr d = expand(a - b);
        return d.is_zero() || is_zero_numeric(d, domain).equal;
    };
    for (std::size_t i = 0; i < fields.size(); ++i) {
        VectorField x = push_forward(fields[i], change);
        std::size_t k = index_of(change.complementary[i]);
        for (std::size_t a = 0; a < tgt_base.size(); ++a) {
            if (!close(x.phi()[a], Expr(a == k ? 1 : 0))) {
                throw NotRectifying(fields[i].label() + " is not d/d" + change.complementary[i] +
                                    " in the target coordinates");
            }
        }
    }
    Substitution sub = to_target(change, true);
    bool ok = true;
    for (std::size_t i = 0; i < prolonged.size(); ++i) {
        VectorField y = push_forward(prolonged[i], change);
        if (!y.has_jet_part()) return false;
        std::vector<Expr> expected(tgt_base.size(), Expr(0));
        for (std::size_t j = 0; j < fields.size(); ++j) {
            expected[index_of(change.complementary[j])] = expand(substitute(sigma(i, j), sub));
        }
        for (std::size_t a = 0; a < tgt_base.size(); ++a) ok = ok && close(y.psi()[a], expected[a]);
        std::size_t k = index_of(change.complementary[i]);
        for (std::size_t a = 0; a < tgt_base.size(); ++a) ok = ok && close(y.phi()[a], Expr(a == k ? 1 : 0));
    }
    return ok;
}

ConstantsReport verify_constants_of_motion(const DynamicalSystem& sys, const std::vector<VectorField>& fields,
                                           const std::vector<Expr>& candidates, const SampleDomain& domain) {
    ConstantsReport out;
    out.n = sys.dimension();
    out.r = fields.empty() ? 0 : distribution_rank(fields, domain);
    out.bound = out.n > out.r ? out.n - out.r - 1 : 0;
    std::vector<Expr> passing;
    for (const auto& c : candidates) {
        ConstantCheck chk;
        chk.candidate = c;
        try {
            auto m = is_zero_numeric(total_derivative(c, sys), domain);
            chk.motion_residual = m.residual;
            chk.constant = m.equal;
        } catch (const OrderOverflow&) {
            chk.constant = false;
            chk.motion_residual = std::numeric_limits<double>::infinity();
        }
        chk.invariant = true;
        for (const auto& f : fields) {
            auto m = is_zero_numeric(apply(f, c), domain);
            chk.invariance_residual = std::max(chk.invariance_residual, m.residual);
            chk.invariant = chk.invariant && m.equal;
        }
        if (chk.constant && chk.invariant) passing.push_back(c);
        out.all_pass = out.all_pass && chk.constant && chk.invariant;
        out.candidates.push_back(std::move(chk));
    }
    if (!passing.empty()) {
        auto base = sys.chart().base_coordinates();
        std::vector<std::vector<Expr>> grad(passing.size());
        std::vector<Expr> all;
        for (std::size_t i = 0; i < passing.size(); ++i) {
            for (const auto& s : base) {
                grad[i].push_back(differentiate(passing[i], s));
                all.push_back(grad[i].back());
            }
        }
        std::size_t rank = passing.size();
        for (const auto& p : sample_points(domain, all)) {
            Eigen::MatrixXd m(static_cast<Eigen::Index>(passing.size()), static_cast<Eigen::Index>(base.size()));
            for (std::size_t i = 0; i < passing.size(); ++i) {
                for (std::size_t j = 0; j < base.size(); ++j) {
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = evaluate(grad[i][j], p);
                }
            }
            rank = std::min(rank, numeric_rank(m));
        }
        out.independent = rank;
    }
    out.all_pass = out.all_pass && out.independent == passing.size();
    if (candidates.empty()) {
        out.note = "bound " + std::to_string(out.bound) + ", nothing to verify";
    } else {
        out.note = std::to_string(out.independent) + " independent of bound " + std::to_string(out.bound);
    }
    return out;
}

} // namespace sigred
