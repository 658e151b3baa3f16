// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "adapted.hpp"
#include "generators.hpp"
#include "sigred/integrate.hpp"

using namespace sigred;

namespace {

// Collects named sub-checks; the criterion passes when all of them do.
struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(what + (ok ? " ok" : " FAILED"));
    }
    void info(const std::string& what) { notes.push_back(what); }
};

std::string sci(double v) {
    std::ostringstream os;
    os.precision(2);
    os << std::scientific << v;
    return os.str();
}

Expr in(const fx::Adapted& a, const std::string& s) { return parse(s, a.change.target_chart()); }

bool same(const Expr& a, const Expr& b, const SampleDomain& d = {}) { return equals_numeric(a, b, d).equal; }

bool structural(const Expr& a, const Expr& b) { return expand(a) == expand(b); }

State image(const std::vector<Expr>& map, const std::vector<std::string>& base, const State& x) {
    Point p;
    for (std::size_t k = 0; k < base.size(); ++k) p.set(base[k], x[k]);
    State out;
    for (const auto& e : map) out.push_back(evaluate(e, p));
    return out;
}

// Example 1: translation with σ = ẋ.
Outcome criterion1() {
    Outcome o;
    auto c = fx::example1();
    auto rep = check_sigma_symmetry(c.sys, c.fields, c.sigma);
    o.require(rep.verdict == Verdict::OnSolutions, "verdict " + std::string(verdict_name(rep.verdict)));
    o.require(rep.residual < 1e-9, "residual " + sci(rep.residual));
    auto inv = verify_invariant(sigma_prolong(c.fields, c.sigma), c.e("z' - x'*z"));
    o.require(inv.invariant && inv.residual < 1e-9, "beta z' - x'z invariant " + sci(inv.residual));
    return o;
}

// Example 2: scaling field, reduced rotation, reconstruction of ρ and the
// variant's constant of motion.
Outcome criterion2() {
    Outcome o;
    auto a = fx::adapted2();
    auto t = transform_system(a.c.sys, a.change);
    o.require(structural(t.rhs_for("xi"), in(a, "-2*eta")), "xi' = -2 eta");
    o.require(structural(t.rhs_for("eta"), in(a, "2*xi")), "eta' = 2 xi");
    o.require(structural(t.rhs_for("rho"), in(a, "2*(xi^2 + eta^2)")),
              "rho' = 2(xi^2 + eta^2) (found " + to_string(t.rhs_for("rho")) + ")");

    auto r = extract_reduced(t, a.change, a.domain);
    const State x0{0.5, 0.7, 0.3};
    const double t_end = 1.0, h = 1e-3;
    double dev = flow_consistency(a.c.sys, a.change, *r.reduced_system, x0, t_end, h);
    o.require(dev < 1e-6, "flow consistency " + sci(dev));

    auto base = a.c.sys.chart().base_coordinates();
    State z0 = image({a.change.forward.at("xi"), a.change.forward.at("eta")}, base, x0);
    State y0 = image({a.change.forward.at("rho")}, base, x0);
    auto z = integrate(*r.reduced_system, z0, t_end, h / 2);
    auto y = reconstruct_along(z, r.reconstruction, y0, h);
    double alpha2 = z0[0] * z0[0] + z0[1] * z0[1];
    double worst_closed = 0.0;
    for (std::size_t i = 0; i < y.rows.size(); ++i)
        worst_closed = std::max(worst_closed, std::abs(y.rows[i][0] - (y0[0] + 2 * alpha2 * y.times[i])));
    o.require(worst_closed < 1e-6, "rho(t) = rho0 + 2 alpha^2 t deviation " + sci(worst_closed));

    auto full = integrate(a.c.sys, x0, t_end, h);
    double worst_full = 0.0;
    for (std::size_t i = 0; i < y.rows.size() && i < full.rows.size(); ++i)
        worst_full = std::max(worst_full, std::abs(image({a.change.forward.at("rho")}, base, full.rows[i])[0] - y.rows[i][0]));
    o.info("reconstruction against the full flow " + sci(worst_full));

    auto forms = beta_forms(a.c.sys, sigma_prolong(a.c.fields, a.c.sigma), a.change,
                            {a.c.e("2*y'/y - (x'*y + x*y')*log(y^2)")}, a.domain);
    o.info(std::string("beta form mu = 2(xi^2 + eta^2) ") +
           (forms[0].invariant && same(forms[0].value, in(a, "2*(xi^2 + eta^2)"), a.domain) ? "holds" : "fails"));

    auto v = fx::example2_variant();
    auto rep = verify_constants_of_motion(v.sys, v.fields, {v.e("x/z")});
    o.require(rep.bound == 1, "variant bound " + std::to_string(rep.bound));
    o.require(rep.all_pass, "variant I = x/z constant, D_t residual " + sci(rep.candidates[0].motion_residual));
    return o;
}

// Example 3: orbital σ-symmetry and the orbit equation of the invariants.
Outcome criterion3() {
    Outcome o;
    auto a = fx::adapted3();
    auto rep = check_sigma_symmetry(a.c.sys, a.c.fields, a.c.sigma, Mode::Orbital);
    o.require(rep.verdict == Verdict::Orbital, "verdict " + std::string(verdict_name(rep.verdict)));
    o.require(rep.orbital_residual < 1e-9, "orbital residual " + sci(rep.orbital_residual));
    double s0 = 0.0;
    for (double v : rep.sigma0.at(1)) s0 = std::max(s0, std::abs(v - 1.0));
    o.require(rep.sigma0.at(1).size() == 64 && s0 < 1e-9, "sigma20 = 1 at " + std::to_string(rep.sigma0.at(1).size()) +
                                                               " points, max dev " + sci(s0));

    auto t = transform_system(a.c.sys, a.change);
    auto r = extract_reduced(t, a.change, a.domain, Mode::Orbital);
    Expr expected = in(a, "(1/z1 - z2)/(1 - z2^2/z1)");
    auto cmp = equals_numeric(Expr(1) / r.ratios.at(0).rhs, expected, a.domain);
    o.require(cmp.residual < 1e-9, "z1'/z2' ratio residual " + sci(cmp.residual));
    Expr y = in(a, "z1*exp(nu)");
    auto c1 = equals_numeric(t.rhs_for("z1"), y * in(a, "1/z1 - z2"), a.domain);
    auto c2 = equals_numeric(t.rhs_for("z2"), y * in(a, "1 - z2^2/z1"), a.domain);
    o.require(c1.residual < 1e-9 && c2.residual < 1e-9, "rates y(1/z1 - z2), y(1 - z2^2/z1)");
    return o;
}

// Example 4: two commuting fields, 2 + 2 split and a constant of motion.
Outcome criterion4() {
    Outcome o;
    auto a = fx::adapted4();
    auto y = sigma_prolong(a.c.fields, a.c.sigma);
    double br = 0.0;
    for (const auto& e : lie_bracket(y[0], y[1]).coefficient_list()) br = std::max(br, is_zero_numeric(e).residual);
    o.require(br < 1e-9, "[Y1,Y2] = 0 residual " + sci(br));
    auto t = transform_system(a.c.sys, a.change);
    o.require(to_string(t.rhs_for("xi")) == "1" && to_string(t.rhs_for("eta")) == "1" &&
                  to_string(t.rhs_for("mu")) == "nu" && to_string(t.rhs_for("nu")) == "mu",
              "xi' = 1, eta' = 1, mu' = nu, nu' = mu");
    auto r = extract_reduced(t, a.change, a.domain);
    o.require(r.reduced.size() == 2 && r.reconstruction.size() == 2, "split " + std::to_string(r.reduced.size()) +
                                                                          " + " + std::to_string(r.reconstruction.size()));
    auto tr = integrate(a.c.sys, {0.3, 0.4, 0.5, 0.6}, 1.0, 1e-3);
    double drift = invariant_drift(a.c.e("x - y + z^2 + w^2"), tr);
    o.require(!tr.blow_up && drift < 1e-6, "drift of I " + sci(drift));
    return o;
}

// Example 6: exact σ̄ and a single reduced equation.
Outcome criterion5() {
    Outcome o;
    auto a = fx::adapted6();
    auto sol = solve_sigma(a.c.sys, a.c.fields);
    o.require(sol.exact, "exact solve");
    auto want = a.c.sigma.restricted(a.c.sys);
    bool eq = sol.exact;
    for (std::size_t i = 0; eq && i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) eq = eq && same(sol.sigma_bar(i, j), want(i, j));
    o.require(eq, "sigma = -diag(y' - 2ww', y' + z', w') on solutions");
    auto r = extract_reduced(transform_system(a.c.sys, a.change), a.change, a.domain);
    o.require(r.reduced.size() == 1 && to_string(r.reduced[0].rhs) == "-xi", "xi' = -xi");
    o.require(r.reconstruction.size() == 3, std::to_string(r.reconstruction.size()) + " reconstruction equations");
    return o;
}

// Example 7: completion by one vertical field.
Outcome criterion6() {
    Outcome o;
    auto a = fx::adapted7();
    auto res = complete_prolonged_set(sigma_prolong(a.c.fields, a.c.sigma));
    o.require(res.r0 == 2 && res.r == 3 && res.delta() == 1 && res.theta() == 1,
              "ranks r0 " + std::to_string(res.r0) + " r " + std::to_string(res.r) + " delta " +
                  std::to_string(res.delta()) + " theta " + std::to_string(res.theta()));
    o.require(res.added.size() == 1 && res.added[0].is_vertical(), std::to_string(res.added.size()) + " vertical field added");
    if (res.added.size() == 1) {
        const auto& c = a.c;
        VectorField y3(c.chart, Expr(0), {Expr(0), Expr(0), Expr(0)},
                       std::vector<Expr>{c.e("2*z*(x' - 2*z*z')"), c.e("(x + 2*z^2)*(2*z*z' - x')"), c.e("x' - 2*z*z'")});
        auto u = res.added[0].components();
        auto v = y3.components();
        std::vector<Expr> all = u;
        all.insert(all.end(), v.begin(), v.end());
        auto pts = sample_points(SampleDomain{}, all);
        double minor = 0.0, norm = 0.0;
        for (const auto& p : pts) {
            std::vector<double> uu, vv;
            for (const auto& e : u) uu.push_back(evaluate(e, p));
            for (const auto& e : v) vv.push_back(evaluate(e, p));
            double nu = 0.0, nv = 0.0;
            for (std::size_t k = 0; k < uu.size(); ++k) nu = std::max(nu, std::abs(uu[k])), nv = std::max(nv, std::abs(vv[k]));
            norm = std::max(norm, nv);
            for (std::size_t k = 0; k < uu.size(); ++k)
                for (std::size_t m = k + 1; m < uu.size(); ++m)
                    minor = std::max(minor, std::abs(uu[k] * vv[m] - uu[m] * vv[k]) / (1 + nu * nv));
        }
        o.require(norm > 1e-6 && minor < 1e-9, "added field spans Y3, minor residual " + sci(minor));
    }
    auto r = extract_reduced(transform_system(a.c.sys, a.change), a.change, a.domain);
    o.require(r.reduced.size() == 1 && to_string(r.reduced[0].rhs) == "-xi", "xi' = -xi");
    o.require(r.reconstruction.size() == 1, std::to_string(r.reconstruction.size()) + " reconstruction equation");
    return o;
}

// Example 8: σ from standard symmetries and the hyperbolic chart.
Outcome criterion7() {
    Outcome o;
    auto a = fx::adapted8();
    const auto& c = a.c;
    DynamicalSystem simple(c.chart, {c.e("x - y"), c.e("y - x"), c.e("2*z")});
    auto res = theorem4_sigma(simple, c.fields, {c.e("-x*y"), c.e("-z^2")});
    bool st = true;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) st = st && structural(res.sigma(i, j), c.sigma(i, j));
    o.require(st, "sigma structural match");
    o.require(res.identity_holds && res.identity_residual < 1e-9, "identity residual " + sci(res.identity_residual));
    auto r = extract_reduced(transform_system(c.sys, a.change), a.change, a.domain);
    o.require(r.reduced.size() == 1 && to_string(r.reduced[0].rhs) == "-2*xi", "xi' = -2 xi");
    auto f = beta_forms(c.sys, sigma_prolong(c.fields, c.sigma), a.change,
                        {c.e("((x^2 - y^2)*z^2 + (x*y' - y*x'))/(x^2 - y^2)"),
                         c.e("(x*y*(x^2 - y^2) + (x*x' - y*y'))/(x^2 - y^2)")},
                        a.domain);
    auto b1 = equals_numeric(f.at(0).value, Expr(-1), a.domain);
    auto b2 = equals_numeric(f.at(1).value, Expr(1), a.domain);
    o.require(f[0].invariant && f[1].invariant && b1.equal && b2.equal && b1.points == 64 && b2.points == 64,
              "beta values -1 and 1 at " + std::to_string(b1.points) + " points");
    return o;
}

double endpoint_error(double h, double t_end) {
    Chart ch = Chart::make("t", {"x", "y"}, {});
    DynamicalSystem rot(ch, {parse("-2*y", ch), parse("2*x", ch)});
    auto tr = integrate(rot, {1.0, 0.0}, t_end, h);
    return std::hypot(tr.rows.back()[0] - std::cos(2 * t_end), tr.rows.back()[1] - std::sin(2 * t_end));
}

std::vector<fx::Case> corpus() {
    return {fx::example1(), fx::example2(), fx::example3(), fx::example4(),
            fx::example5(), fx::example6(), fx::example7(), fx::example8()};
}

// Compact runs of the algebraic, prolongation and integrator properties.
Outcome criterion8() {
    Outcome o;
    Rng rng(8);
    Chart xyz = Chart::make("t", {"x", "y", "z"}, {});
    auto vars = xyz.base_coordinates();

    bool anti = true;
    double jac = 0.0, der = 0.0;
    for (int k = 0; k < 20; ++k) {
        auto x = gen::polynomial_field(rng, xyz, 2);
        auto y = gen::polynomial_field(rng, xyz, 2);
        auto z = gen::polynomial_field(rng, xyz, 2);
        anti = anti && combine({Expr(1), Expr(1)}, {lie_bracket(x, y), lie_bracket(y, x)}).is_zero();
        auto j = combine({Expr(1), Expr(1), Expr(1)}, {lie_bracket(x, lie_bracket(y, z)), lie_bracket(y, lie_bracket(z, x)),
                                                     lie_bracket(z, lie_bracket(x, y))});
        for (const auto& e : j.coefficient_list()) jac = std::max(jac, is_zero_numeric(e).residual);
        Expr g = gen::expression(rng, vars, 3), h = gen::expression(rng, vars, 3);
        der = std::max(der, equals_numeric(apply(x, g * h), apply(x, g) * h + g * apply(x, h)).residual);
    }
    o.require(anti, "antisymmetry");
    o.require(jac < 1e-9, "Jacobi " + sci(jac));
    o.require(der < 1e-9, "derivation law " + sci(der));

    bool lam = true;
    for (int k = 0; k < 20; ++k) {
        auto x = gen::polynomial_field(rng, xyz, 2);
        Expr l = gen::polynomial(rng, {"x", "y", "z", "x'", "y'"}, 2);
        auto y = sigma_prolong({x}, SigmaMatrix({{l}}));
        for (std::size_t a = 0; a < 3; ++a)
            lam = lam && structural(y[0].psi()[a], total_derivative(x.phi()[a], xyz) + l * x.phi()[a]);
    }
    o.require(lam, "lambda specialization");

    double ibdp = 0.0;
    bool proj = true;
    for (const auto& c : corpus()) {
        auto y = sigma_prolong(c.fields, c.sigma);
        for (std::size_t i = 0; i < y.size(); ++i) {
            proj = proj && y[i].xi() == c.fields[i].xi() && y[i].phi() == c.fields[i].phi();
            Expr g = gen::polynomial(rng, c.chart.base_coordinates(), 3);
            Expr lhs = apply(y[i], total_derivative(g, c.chart)) - total_derivative(apply(y[i], g), c.chart);
            for (std::size_t j = 0; j < y.size(); ++j) lhs = lhs - c.sigma(i, j) * apply(y[j], g);
            ibdp = std::max(ibdp, is_zero_numeric(lhs).residual);
        }
    }
    o.require(ibdp < 1e-9, "IBDP commutator " + sci(ibdp));
    o.require(proj, "projection");

    bool order = true;
    double lo = 1e9, hi = 0.0;
    for (double t_end : {1.0, 5.0}) {
        double f = endpoint_error(2e-3, t_end) / endpoint_error(1e-3, t_end);
        lo = std::min(lo, f), hi = std::max(hi, f);
        order = order && f >= 12 && f <= 20;
    }
    o.require(order, "order factor in [" + sci(lo) + ", " + sci(hi) + "]");

    bool det = true;
    auto cases = corpus();
    for (std::size_t k = 0; k < cases.size(); ++k) {
        const auto& c = cases[k];
        Mode m = k == 2 ? Mode::Orbital : Mode::Strict;  // Example 3 is orbital
        SampleDomain d = SampleDomain{}.with_seed(77);
        auto r1 = check_sigma_symmetry(c.sys, c.fields, c.sigma, m, d);
        auto r2 = check_sigma_symmetry(c.sys, c.fields, c.sigma, m, d);
        det = det && r1.verdict == r2.verdict && r1.residuals == r2.residuals && r1.residual == r2.residual;
    }
    o.require(det, "seeded verdicts deterministic");
    return o;
}

} // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                         criterion5, criterion6, criterion7, criterion8};
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k]();
        } catch (const std::exception& e) {
            o.pass = false;
            o.info(std::string("error: ") + e.what());
        }
        failed += o.pass ? 0 : 1;
        std::cout << "criterion " << k + 1 << ": " << (o.pass ? "PASS" : "FAIL");
        for (std::size_t i = 0; i < o.notes.size(); ++i) std::cout << (i ? "; " : " (") << o.notes[i];
        std::cout << (o.notes.empty() ? "" : ")") << "\n";
    }
    std::cout << "passed " << criteria.size() - failed << "/" << criteria.size() << "\n";
    return failed ? 1 : 0;
}
