#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "adapted.hpp"
#include "sigred/integrate.hpp"

using namespace sigred;

namespace {

DynamicalSystem system(const std::vector<std::string>& states, const std::vector<std::string>& rhs) {
    Chart c = Chart::make("t", states);
    std::vector<Expr> f;
    for (const auto& s : rhs) f.push_back(parse(s, c));
    return DynamicalSystem(c, f);
}

DynamicalSystem rotation() { return system({"xi", "eta"}, {"-2*eta", "2*xi"}); }

double endpoint_error(double h, double t_end) {
    auto tr = integrate(rotation(), {1.0, 0.0}, t_end, h);
    const State& y = tr.rows.back();
    return std::hypot(y[0] - std::cos(2 * t_end), y[1] - std::sin(2 * t_end));
}

} // namespace

TEST_SUITE("integrate") {
    TEST_CASE("half turn of the rotation") {
        auto tr = integrate(rotation(), {1.0, 0.0}, std::numbers::pi / 2, 1e-3);
        CHECK_FALSE(tr.blow_up);
        CHECK(std::abs(tr.rows.back()[0] + 1) < 1e-8);
        CHECK(std::abs(tr.rows.back()[1]) < 1e-8);
        CHECK(tr.times.back() == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
        CHECK(tr.rows.size() == tr.times.size());
    }

    TEST_CASE("zero rate keeps the state") {
        auto tr = integrate(system({"x"}, {"0"}), {3.0}, 1.0, 0.1);
        for (const auto& r : tr.rows) CHECK(r[0] == 3.0);
    }

    TEST_CASE("finite-time escape") {
        auto tr = integrate(system({"x"}, {"x^2"}), {1.0}, 2.0, 1e-3);
        CHECK((tr.blow_up || std::abs(tr.rows.back()[0]) > 1e12));
    }

    TEST_CASE("step is adjusted to land on the end time") {
        auto tr = integrate(rotation(), {1.0, 0.0}, 1.0, 0.3);
        CHECK(tr.rows.size() == 5);
        CHECK(tr.step == doctest::Approx(0.25));
    }

    TEST_CASE("bad inputs") {
        CHECK_THROWS(integrate(rotation(), {1.0, 0.0}, 1.0, 0.0));
        CHECK_THROWS(integrate(rotation(), {1.0, 0.0}, -1.0, 0.1));
        CHECK_THROWS_AS(integrate(rotation(), {1.0}, 1.0, 0.1), SizeMismatch);
        CHECK_THROWS(integrate(system({"x"}, {"t"}), {0.0}, 1.0, 0.1));
    }

    TEST_CASE("fourth order: halving the step divides the error by about 16") {
        for (double t_end : {1.0, 5.0}) {
            double e4 = endpoint_error(4e-3, t_end);
            double e2 = endpoint_error(2e-3, t_end);
            double e1 = endpoint_error(1e-3, t_end);
            CHECK(e4 / e2 >= 12);
            CHECK(e4 / e2 <= 20);
            CHECK(e2 / e1 >= 12);
            CHECK(e2 / e1 <= 20);
        }
    }

    TEST_CASE("runs are bit-identical") {
        auto a = integrate(fx::example4().sys, {0.3, 0.4, 0.5, 0.6}, 1.0, 1e-2);
        auto b = integrate(fx::example4().sys, {0.3, 0.4, 0.5, 0.6}, 1.0, 1e-2);
        CHECK(a.rows == b.rows);
    }

    TEST_CASE("parameters are held fixed") {
        auto c = fx::example7();
        auto tr = integrate(c.sys, {0.5, 0.6, 0.7}, 1.0, 1e-2);
        for (const auto& r : tr.rows) CHECK(r[tr.column("z")] == 0.7);
    }
}

TEST_SUITE("flow consistency") {
    TEST_CASE("scaling example") {
        auto a = fx::adapted2();
        auto r = extract_reduced(transform_system(a.c.sys, a.change), a.change, a.domain);
        REQUIRE(r.reduced_system);
        CHECK(flow_consistency(a.c.sys, a.change, *r.reduced_system, {0.5, 0.7, 0.3}, 1.0, 1e-3) < 1e-6);
    }

    TEST_CASE("identity change against the full system") {
        auto c = fx::example8();
        auto id = identity_change(c.sys, c.sys.chart().states(), {});
        CHECK(flow_consistency(c.sys, id, c.sys, {0.8, 0.2, 0.3}, 0.5, 1e-3) < 1e-14);
    }

    TEST_CASE("a sign flip is caught") {
        auto a = fx::adapted2();
        Chart z = Chart::make("t", {"xi", "eta"});
        DynamicalSystem wrong(z, {parse("2*eta", z), parse("2*xi", z)});
        CHECK(flow_consistency(a.c.sys, a.change, wrong, {0.5, 0.7, 0.3}, 1.0, 1e-3) > 1e-2);
    }

    TEST_CASE("every strict example") {
        for (const auto& a : {fx::adapted4(), fx::adapted5(), fx::adapted6(), fx::adapted8()}) {
            auto r = extract_reduced(transform_system(a.c.sys, a.change), a.change, a.domain);
            REQUIRE(r.reduced_system);
            State x0(a.c.sys.chart().base_coordinates().size(), 0.0);
            for (std::size_t j = 0; j < x0.size(); ++j) x0[j] = 0.6 + 0.1 * static_cast<double>(j);
            CHECK(flow_consistency(a.c.sys, a.change, *r.reduced_system, x0, 0.5, 1e-3) < 1e-6);
        }
    }
}

TEST_SUITE("reconstruct_along") {
    TEST_CASE("linear growth on the circle") {
        // Half-step reduced grid: every RK4 stage time lands on a node.
        auto tr = integrate(rotation(), {0.6, 0.8}, 1.0, 5e-4);
        Chart c = Chart::make("t", {"xi", "eta", "rho"});
        auto rec = reconstruct_along(tr, {{"rho", parse("2*(xi^2 + eta^2)", c)}}, {1.5}, 1e-3);
        for (std::size_t i = 0; i < rec.rows.size(); ++i) {
            CHECK(std::abs(rec.rows[i][0] - (1.5 + 2 * rec.times[i])) < 1e-6);
        }
    }

    TEST_CASE("a same-step grid carries the chord error of linear interpolation") {
        auto tr = integrate(rotation(), {0.6, 0.8}, 1.0, 1e-3);
        Chart c = Chart::make("t", {"xi", "eta", "rho"});
        auto rec = reconstruct_along(tr, {{"rho", parse("2*(xi^2 + eta^2)", c)}}, {1.5}, 1e-3);
        double err = std::abs(rec.rows.back()[0] - 3.5);
        CHECK(err > 1e-7);
        CHECK(err < 1e-5);
    }

    TEST_CASE("zero rate") {
        auto tr = integrate(rotation(), {0.6, 0.8}, 1.0, 1e-2);
        auto rec = reconstruct_along(tr, {{"y", Expr(0)}}, {2.5}, 1e-2);
        for (const auto& r : rec.rows) CHECK(r[0] == 2.5);
    }

    TEST_CASE("hyperbolic growth of the complementary pair") {
        auto a = fx::adapted4();
        auto r = extract_reduced(transform_system(a.c.sys, a.change), a.change, a.domain);
        REQUIRE(r.reduced_system);
        auto z = integrate(*r.reduced_system, {0.1, 0.2}, 1.0, 5e-4);
        auto rec = reconstruct_along(z, r.reconstruction, {0.3, 0.5}, 1e-3);
        for (std::size_t i = 0; i < rec.rows.size(); ++i) {
            double t = rec.times[i];
            CHECK(std::abs(rec.rows[i][rec.column("mu")] - (0.3 * std::cosh(t) + 0.5 * std::sinh(t))) < 1e-6);
            CHECK(std::abs(rec.rows[i][rec.column("nu")] - (0.5 * std::cosh(t) + 0.3 * std::sinh(t))) < 1e-6);
        }
    }

    TEST_CASE("reduced plus reconstruction reproduces the full flow") {
        auto a = fx::adapted6();
        auto r = extract_reduced(transform_system(a.c.sys, a.change), a.change, a.domain);
        REQUIRE(r.reduced_system);
        State x0{0.7, 0.4, 0.5, 0.6};
        auto full = integrate(a.c.sys, x0, 0.5, 1e-3);
        Point p0;
        for (std::size_t j = 0; j < x0.size(); ++j) p0.set(full.symbols[j], x0[j]);
        auto z = integrate(*r.reduced_system, {evaluate(a.change.forward.at("xi"), p0)}, 0.5, 5e-4);
        State y0;
        for (const auto& e : r.reconstruction) y0.push_back(evaluate(a.change.forward.at(e.symbol), p0));
        auto rec = reconstruct_along(z, r.reconstruction, y0, 1e-3);
        Point pe;
        for (std::size_t j = 0; j < x0.size(); ++j) pe.set(full.symbols[j], full.rows.back()[j]);
        for (std::size_t j = 0; j < r.reconstruction.size(); ++j) {
            CHECK(std::abs(rec.rows.back()[j] - evaluate(a.change.forward.at(r.reconstruction[j].symbol), pe)) < 1e-6);
        }
    }
}

TEST_SUITE("invariant_drift") {
    TEST_CASE("constant of the commuting example") {
        auto c = fx::example4();
        auto tr = integrate(c.sys, {0.3, 0.4, 0.5, 0.6}, 1.0, 1e-3);
        CHECK(invariant_drift(c.e("x - y + z^2 + w^2"), tr) < 1e-6);
    }

    TEST_CASE("a constant expression does not drift") {
        auto tr = integrate(rotation(), {1.0, 0.0}, 1.0, 1e-2);
        CHECK(invariant_drift(Expr(4), tr) == 0.0);
    }

    TEST_CASE("a coordinate moving at unit speed drifts by the elapsed time") {
        auto tr = integrate(system({"x"}, {"1"}), {0.0}, 3.0, 1e-2);
        CHECK(invariant_drift(Expr::symbol("x"), tr) == doctest::Approx(3.0));
    }
}

TEST_SUITE("csv") {
    TEST_CASE("header and rows") {
        auto tr = integrate(rotation(), {1.0, 0.0}, 0.5, 0.25);
        std::ostringstream os;
        write_csv(tr, os);
        std::istringstream is(os.str());
        std::string line;
        std::getline(is, line);
        CHECK(line == "t,xi,eta");
        std::size_t n = 0;
        while (std::getline(is, line)) {
            ++n;
            CHECK(std::count(line.begin(), line.end(), ',') == 2);
        }
        CHECK(n == tr.rows.size());
    }
}
