// Symmetry-adapted coordinate changes for the worked examples.
#pragma once

#include "fixtures.hpp"
#include "sigred/reduction.hpp"

namespace fx {

struct Adapted {
    Case c;
    CoordinateChange change;
    SampleDomain domain;  // target-side sampling box
    Mode mode = Mode::Strict;
};

using Pairs = std::vector<std::pair<std::string, std::string>>;

inline CoordinateChange change(const Case& c, std::vector<std::string> inv, std::vector<std::string> comp,
                               std::vector<std::string> params, const Pairs& fwd, const Pairs& bwd) {
    CoordinateChange ch;
    ch.source = c.sys.chart();
    ch.invariants = std::move(inv);
    ch.complementary = std::move(comp);
    ch.parameters = std::move(params);
    Chart target = ch.target_chart();
    for (const auto& [k, v] : fwd) ch.forward[k] = parse(v, c.sys.chart());
    for (const auto& [k, v] : bwd) ch.inverse[k] = parse(v, target);
    return ch;
}

// ξ = xy, η = yz, ρ = 1 + y² with y > 0.
inline Adapted adapted2() {
    Adapted a{example2(), {}, {}, Mode::Strict};
    a.change = change(a.c, {"xi", "eta"}, {"rho"}, {}, {{"xi", "x*y"}, {"eta", "y*z"}, {"rho", "1 + y^2"}},
                      {{"x", "xi*(rho - 1)^(-1/2)"}, {"y", "(rho - 1)^(1/2)"}, {"z", "eta*(rho - 1)^(-1/2)"}});
    a.domain.bounds["rho"] = {1.2, 2.2};
    return a;
}

// ζ₁ = y/z, ζ₂ = w/z, μ = x, ν = log z with z > 0.
inline Adapted adapted3() {
    Adapted a{example3(), {}, {}, Mode::Orbital};
    a.change = change(a.c, {"z1", "z2"}, {"mu", "nu"}, {},
                      {{"z1", "y/z"}, {"z2", "w/z"}, {"mu", "x"}, {"nu", "log(z)"}},
                      {{"x", "mu"}, {"y", "z1*exp(nu)"}, {"z", "exp(nu)"}, {"w", "z2*exp(nu)"}});
    return a;
}

inline Adapted adapted4() {
    Adapted a{example4(), {}, {}, Mode::Strict};
    a.change = change(a.c, {"xi", "eta"}, {"mu", "nu"}, {},
                      {{"xi", "x + z^2"}, {"eta", "y - w^2"}, {"mu", "z + y^2"}, {"nu", "w"}},
                      {{"w", "nu"}, {"y", "eta + nu^2"}, {"z", "mu - (eta + nu^2)^2"},
                       {"x", "xi - (mu - (eta + nu^2)^2)^2"}});
    return a;
}

// The root of x² + x + μ − ξ = 0 with x > −1/2.
inline Adapted adapted5() {
    Adapted a{example5(), {}, {}, Mode::Strict};
    a.change = change(a.c, {"xi"}, {"mu", "nu"}, {}, {{"xi", "x + y"}, {"mu", "y - x^2"}, {"nu", "x + y + z"}},
                      {{"x", "(-1 + (1 - 4*(mu - xi))^(1/2))/2"},
                       {"y", "xi - (-1 + (1 - 4*(mu - xi))^(1/2))/2"},
                       {"z", "nu - xi"}});
    a.domain.bounds["mu"] = {-0.5, 0.5};
    a.domain.bounds["xi"] = {0.6, 1.6};
    return a;
}

inline Adapted adapted6() {
    Adapted a{example6(), {}, {}, Mode::Strict};
    a.change = change(a.c, {"xi"}, {"mu", "nu", "rho"}, {},
                      {{"xi", "x + z^2"}, {"mu", "y - w^2"}, {"nu", "y + z"}, {"rho", "w"}},
                      {{"w", "rho"}, {"y", "mu + rho^2"}, {"z", "nu - mu - rho^2"}, {"x", "xi - (nu - mu - rho^2)^2"}});
    return a;
}

// μ = z stays a parameter.
inline Adapted adapted7() {
    Adapted a{example7(), {}, {}, Mode::Strict};
    a.change = change(a.c, {"xi"}, {"eta", "mu"}, {"mu"}, {{"xi", "x - z^2"}, {"eta", "y + x*z"}, {"mu", "z"}},
                      {{"z", "mu"}, {"x", "xi + mu^2"}, {"y", "eta - (xi + mu^2)*mu"}});
    return a;
}

// ξ = (x² − y²)/z², u = log z, v = artanh(y/x) with x > |y|, z > 0.
inline Adapted adapted8() {
    Adapted a{example8(), {}, {}, Mode::Strict};
    a.change = change(a.c, {"xi"}, {"u", "v"}, {},
                      {{"xi", "(x^2 - y^2)/z^2"}, {"u", "log(z)"}, {"v", "log((x + y)/(x - y))/2"}},
                      {{"x", "xi^(1/2)*exp(u)*(exp(v) + exp(-v))/2"},
                       {"y", "xi^(1/2)*exp(u)*(exp(v) - exp(-v))/2"},
                       {"z", "exp(u)"}});
    return a;
}

} // namespace fx
