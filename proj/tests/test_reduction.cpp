#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adapted.hpp"
#include "generators.hpp"

using namespace sigred;

namespace {

Expr in(const fx::Adapted& a, const std::string& s) { return parse(s, a.change.target_chart()); }

bool same(const Expr& a, const Expr& b, const SampleDomain& d = {}) { return equals_numeric(a, b, d).equal; }

std::vector<fx::Adapted> strict_cases() {
    return {fx::adapted2(), fx::adapted4(), fx::adapted5(), fx::adapted6(), fx::adapted7(), fx::adapted8()};
}

std::vector<fx::Adapted> all_cases() {
    auto out = strict_cases();
    out.push_back(fx::adapted3());
    return out;
}

} // namespace

TEST_SUITE("coordinate changes") {
    TEST_CASE("every adapted change is a valid diffeomorphism on its box") {
        for (const auto& a : all_cases()) {
            auto v = validate_change(a.change, {}, a.domain);
            CHECK_MESSAGE(v.ok, v.failure);
            CHECK(v.round_trip_source < 1e-9);
            CHECK(v.round_trip_target < 1e-9);
            CHECK(v.jacobian_full_rank);
        }
    }

    TEST_CASE("a wrong inverse fails validation") {
        auto a = fx::adapted4();
        a.change.inverse["w"] = in(a, "2*nu");
        CHECK_FALSE(validate_change(a.change, {}, a.domain).ok);
    }

    TEST_CASE("a missing inverse is reported") {
        auto a = fx::adapted4();
        a.change.inverse.erase("x");
        CHECK_THROWS_AS(transform_system(a.c.sys, a.change), InverseRequired);
    }

    TEST_CASE("the identity change leaves the system unchanged") {
        for (const auto& a : all_cases()) {
            auto id = identity_change(a.c.sys, {}, a.c.sys.chart().base_coordinates());
            auto t = transform_system(a.c.sys, id);
            for (const auto& s : a.c.sys.chart().states()) CHECK(same(t.rhs_for(s), a.c.sys.rhs_for(s)));
        }
    }

    TEST_CASE("transforming there and back recovers the system") {
        for (const auto& a : {fx::adapted4(), fx::adapted6(), fx::adapted7()}) {
            auto there = transform_system(a.c.sys, a.change);
            auto back = transform_system(there, reversed(a.change));
            for (const auto& s : a.c.sys.chart().states()) CHECK(same(back.rhs_for(s), a.c.sys.rhs_for(s)));
        }
    }

    TEST_CASE("transformed rates agree with the chain rule at random points") {
        Rng rng(77);
        for (const auto& a : strict_cases()) {
            auto t = transform_system(a.c.sys, a.change);
            auto base = a.c.sys.chart().base_coordinates();
            auto src = sample_points(SampleDomain{}, a.c.sys.rhs(), {base.begin(), base.end()});
            for (std::size_t k = 0; k < 8; ++k) {
                const Point& p = src[rng.index(src.size())];
                Point q;
                bool ok = true;
                for (const auto& u : a.change.target_symbols()) {
                    try {
                        q.set(u, evaluate(a.change.forward.at(u), p));
                    } catch (const DomainError&) {
                        ok = false;
                    }
                }
                if (!ok) continue;
                for (const auto& s : a.c.sys.chart().parameters()) q.set(Chart::jet_name(s), *p.find(Chart::jet_name(s)));
                for (const auto& u : t.chart().states()) {
                    double lhs;
                    try {
                        lhs = evaluate(t.rhs_for(u), q);
                    } catch (const DomainError&) {
                        continue;
                    }
                    double rhs = evaluate(total_derivative(a.change.forward.at(u), a.c.sys), p);
                    CHECK(std::abs(lhs - rhs) <= 1e-8 * (1 + std::abs(rhs)));
                }
            }
        }
    }
}

TEST_SUITE("reduced systems") {
    TEST_CASE("scaling example: rotation in the invariants") {
        auto a = fx::adapted2();
        auto t = transform_system(a.c.sys, a.change);
        CHECK(to_string(t.rhs_for("xi")) == "-2*eta");
        CHECK(to_string(t.rhs_for("eta")) == "2*xi");
        auto r = extract_reduced(t, a.change, a.domain);
        CHECK(r.reduced.size() == 2);
        CHECK(r.reconstruction.size() == 1);
        CHECK(r.reduced_system.has_value());
    }

    TEST_CASE("the complementary rate keeps a logarithm") {
        auto a = fx::adapted2();
        auto t = transform_system(a.c.sys, a.change);
        CHECK_FALSE(same(t.rhs_for("rho"), in(a, "2*(xi^2 + eta^2)"), a.domain));
        CHECK(same(t.rhs_for("rho"), in(a, "2*(rho - 1)*(xi^2 + eta^2) - 2*(rho - 1)*eta*log(rho - 1)"), a.domain));
    }

    TEST_CASE("two commuting fields: two plus two split") {
        auto a = fx::adapted4();
        auto t = transform_system(a.c.sys, a.change);
        CHECK(to_string(t.rhs_for("xi")) == "1");
        CHECK(to_string(t.rhs_for("eta")) == "1");
        CHECK(to_string(t.rhs_for("mu")) == "nu");
        CHECK(to_string(t.rhs_for("nu")) == "mu");
        auto r = extract_reduced(t, a.change, a.domain);
        CHECK(r.reduced.size() == 2);
        CHECK(r.reconstruction.size() == 2);
    }

    TEST_CASE("cubic reduced equation") {
        auto a = fx::adapted5();
        auto t = transform_system(a.c.sys, a.change);
        CHECK(same(t.rhs_for("xi"), in(a, "xi - xi^3"), a.domain));
        CHECK(same(t.rhs_for("mu"), in(a, "(xi - xi^3)*nu + xi"), a.domain));
        auto r = extract_reduced(t, a.change, a.domain);
        REQUIRE(r.reduced.size() == 1);
        CHECK(to_string(r.reduced[0].rhs) == "xi - xi^3");
        CHECK(r.reconstruction.size() == 2);
    }

    TEST_CASE("three fields leave one equation") {
        auto a = fx::adapted6();
        auto r = extract_reduced(transform_system(a.c.sys, a.change), a.change, a.domain);
        REQUIRE(r.reduced.size() == 1);
        CHECK(to_string(r.reduced[0].rhs) == "-xi");
        CHECK(r.reconstruction.size() == 3);
    }

    TEST_CASE("parameter chart: one reduced and one reconstruction equation") {
        auto a = fx::adapted7();
        auto t = transform_system(a.c.sys, a.change);
        CHECK(same(t.rhs_for("eta"), in(a, "xi^2 - eta*xi"), a.domain));
        auto r = extract_reduced(t, a.change, a.domain);
        REQUIRE(r.reduced.size() == 1);
        CHECK(to_string(r.reduced[0].rhs) == "-xi");
        CHECK(r.reconstruction.size() == 1);
    }

    TEST_CASE("hyperbolic chart") {
        auto a = fx::adapted8();
        auto t = transform_system(a.c.sys, a.change);
        CHECK(same(t.rhs_for("v"), in(a, "-exp(2*u) - 1"), a.domain));
        auto r = extract_reduced(t, a.change, a.domain);
        REQUIRE(r.reduced.size() == 1);
        CHECK(to_string(r.reduced[0].rhs) == "-2*xi");
    }

    TEST_CASE("orbital reduction: rates share a factor, ratios do not") {
        auto a = fx::adapted3();
        auto t = transform_system(a.c.sys, a.change);
        CHECK(same(t.rhs_for("z1"), in(a, "exp(nu)*(1 - z1*z2)"), a.domain));
        CHECK(same(t.rhs_for("z2"), in(a, "exp(nu)*(z1 - z2^2)"), a.domain));
        CHECK_THROWS_AS(extract_reduced(t, a.change, a.domain, Mode::Strict), LeakageDetected);
        auto r = extract_reduced(t, a.change, a.domain, Mode::Orbital);
        CHECK(r.orbital);
        CHECK(r.leakage < 1e-9);
        REQUIRE(r.ratios.size() == 1);
        CHECK(same(r.ratios[0].rhs, in(a, "(z1 - z2^2)/(1 - z1*z2)"), a.domain));
    }

    TEST_CASE("choosing a complementary coordinate as invariant leaks") {
        auto a = fx::adapted8();
        a.change.invariants = {"u"};
        a.change.complementary = {"xi", "v"};
        auto t = transform_system(a.c.sys, a.change);
        CHECK_THROWS_AS(extract_reduced(t, a.change, a.domain), LeakageDetected);
    }

    TEST_CASE("leakage verdicts are deterministic under a fixed seed") {
        auto a = fx::adapted3();
        auto t = transform_system(a.c.sys, a.change);
        auto r1 = extract_reduced(t, a.change, a.domain, Mode::Orbital);
        auto r2 = extract_reduced(t, a.change, a.domain, Mode::Orbital);
        CHECK(r1.leakage == r2.leakage);
    }
}

TEST_SUITE("rectified form") {
    TEST_CASE("adapted charts straighten the fields") {
        for (const auto& a : {fx::adapted4(), fx::adapted5(), fx::adapted6(), fx::adapted7(), fx::adapted8()}) {
            auto y = sigma_prolong(a.c.fields, a.c.sigma);
            CHECK(rectified_form_check(a.c.fields, y, a.change, a.c.sigma, a.domain));
        }
    }

    TEST_CASE("swapping the complementary roles is detected") {
        auto a = fx::adapted5();
        std::swap(a.change.complementary[0], a.change.complementary[1]);
        auto y = sigma_prolong(a.c.fields, a.c.sigma);
        CHECK_THROWS_AS(rectified_form_check(a.c.fields, y, a.change, a.c.sigma, a.domain), NotRectifying);
    }

    TEST_CASE("a scaling chart is not rectifying") {
        auto a = fx::adapted2();
        auto y = sigma_prolong(a.c.fields, a.c.sigma);
        CHECK_THROWS_AS(rectified_form_check(a.c.fields, y, a.change, a.c.sigma, a.domain), NotRectifying);
    }

    TEST_CASE("pushed forward fields keep their bracket") {
        auto a = fx::adapted8();
        auto x1 = push_forward(a.c.fields[0], a.change);
        auto x2 = push_forward(a.c.fields[1], a.change);
        auto lhs = lie_bracket(x1, x2);
        auto rhs = push_forward(lie_bracket(a.c.fields[0], a.c.fields[1]), a.change);
        for (std::size_t k = 0; k < lhs.phi().size(); ++k) CHECK(same(lhs.phi()[k], rhs.phi()[k], a.domain));
    }
}

TEST_SUITE("beta forms") {
    TEST_CASE("scaling example: the logarithmic invariant reduces") {
        auto a = fx::adapted2();
        auto y = sigma_prolong(a.c.fields, a.c.sigma);
        auto f = beta_forms(a.c.sys, y, a.change, {a.c.e("2*y'/y - (x'*y + x*y')*log(y^2)")}, a.domain);
        REQUIRE(f.size() == 1);
        CHECK(f[0].invariant);
        CHECK(f[0].reduced);
        CHECK(same(f[0].value, in(a, "2*(xi^2 + eta^2)"), a.domain));
    }

    TEST_CASE("hyperbolic chart: constant reconstruction targets") {
        auto a = fx::adapted8();
        auto y = sigma_prolong(a.c.fields, a.c.sigma);
        auto f = beta_forms(a.c.sys, y, a.change,
                            {a.c.e("((x^2 - y^2)*z^2 + (x*y' - y*x'))/(x^2 - y^2)"),
                             a.c.e("(x*y*(x^2 - y^2) + (x*x' - y*y'))/(x^2 - y^2)")},
                            a.domain);
        REQUIRE(f.size() == 2);
        CHECK(f[0].invariant);
        CHECK(f[1].invariant);
        CHECK(same(f[0].value, Expr(-1), a.domain));
        CHECK(same(f[1].value, Expr(1), a.domain));
    }

    TEST_CASE("a non-invariant beta is flagged") {
        auto a = fx::adapted8();
        auto y = sigma_prolong(a.c.fields, a.c.sigma);
        auto f = beta_forms(a.c.sys, y, a.change, {a.c.e("x'")}, a.domain);
        CHECK_FALSE(f[0].invariant);
        CHECK_FALSE(f[0].reduced);
    }
}

TEST_SUITE("constants of motion") {
    TEST_CASE("two commuting fields leave one constant") {
        auto c = fx::example4();
        auto rep = verify_constants_of_motion(c.sys, c.fields, {c.e("x - y + z^2 + w^2")});
        CHECK(rep.all_pass);
        CHECK(rep.bound == 1);
        CHECK(rep.independent == 1);
    }

    TEST_CASE("no candidates and a zero bound") {
        auto c = fx::example5();
        auto rep = verify_constants_of_motion(c.sys, c.fields, {});
        CHECK(rep.bound == 0);
        CHECK(rep.all_pass);
        CHECK(rep.note == "bound 0, nothing to verify");
    }

    TEST_CASE("variant system: the printed ratio is invariant but not constant") {
        auto c = fx::example2_variant();
        auto rep = verify_constants_of_motion(c.sys, c.fields, {c.e("x/z")});
        CHECK(rep.bound == 1);
        REQUIRE(rep.candidates.size() == 1);
        CHECK(rep.candidates[0].invariant);
        CHECK_FALSE(rep.candidates[0].constant);
        CHECK_FALSE(rep.all_pass);
    }

    TEST_CASE("variant system: the true constant passes") {
        auto c = fx::example2_variant();
        auto rep = verify_constants_of_motion(c.sys, c.fields, {c.e("x*y*exp(-y*z)")});
        CHECK(rep.all_pass);
        CHECK(rep.independent == 1);
    }

    TEST_CASE("dependent constants are counted once") {
        auto c = fx::example4();
        auto rep = verify_constants_of_motion(c.sys, c.fields, {c.e("x - y + z^2 + w^2"), c.e("2*(x - y + z^2 + w^2)")});
        CHECK(rep.independent == 1);
        CHECK_FALSE(rep.all_pass);
    }
}
