// Systems, fields and sigma matrices of the worked examples, built in code.
#pragma once

#include <string>
#include <vector>

#include "sigred/jet.hpp"
#include "sigred/parser.hpp"
#include "sigred/symmetry.hpp"

namespace fx {

using namespace sigred;

struct Case {
    Chart chart;
    DynamicalSystem sys;
    std::vector<VectorField> fields;
    SigmaMatrix sigma;

    Expr e(const std::string& s) const { return parse(s, chart); }
};

inline VectorField field(const Chart& chart, const std::vector<std::string>& phi, const std::string& label) {
    std::vector<Expr> coeffs;
    for (const auto& s : phi) coeffs.push_back(parse(s, chart));
    return VectorField(chart, Expr(0), coeffs, std::nullopt, label);
}

inline SigmaMatrix sigma(const Chart& chart, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::vector<Expr>> out;
    for (const auto& r : rows) {
        std::vector<Expr> row;
        for (const auto& s : r) row.push_back(parse(s, chart));
        out.push_back(row);
    }
    return SigmaMatrix(out);
}

inline Case make(const std::vector<std::string>& states, const std::vector<std::string>& params,
                 const std::vector<std::string>& rhs, const std::vector<std::vector<std::string>>& fields,
                 const std::vector<std::vector<std::string>>& sig) {
    Case c;
    c.chart = Chart::make("t", states, params);
    std::vector<Expr> f;
    for (const auto& s : rhs) f.push_back(parse(s, c.chart));
    c.sys = DynamicalSystem(c.chart, f);
    for (std::size_t i = 0; i < fields.size(); ++i) c.fields.push_back(field(c.chart, fields[i], "X" + std::to_string(i + 1)));
    c.sigma = sigma(c.chart, sig);
    return c;
}

// ẋ = f, ẏ = g, ż = h + f z with f = y, g = −x, h = x y.
inline Case example1() {
    return make({"x", "y", "z"}, {}, {"y", "-x", "x*y + y*z"}, {{"0", "0", "1"}}, {{"x'"}});
}

inline Case example2() {
    return make({"x", "y", "z"}, {},
                {"-2*z - x*y^2*(x^2 + z^2) + x*y*z*log(y^2)", "y^2*(y*(x^2 + z^2) - z*log(y^2))",
                 "2*x - y^2*z*(x^2 + z^2) + y*z^2*log(y^2)"},
                {{"x", "-y", "z"}}, {{"x'*y + x*y'"}});
}

inline Case example2_variant() {
    return make({"x", "y", "z"}, {},
                {"-x*(1 + y*(x - z) - x*y^2*z*log(x*z))", "y*(1 + y*(x + z) - x*y^2*z*log(x*z))",
                 "z*(1 - y*(x + z) + x*y^2*z*log(x*z))"},
                {{"x", "-y", "z"}}, {{"x'*y + x*y'"}});
}

inline Case example3() {
    return make({"x", "y", "z", "w"}, {}, {"y*z", "z*(z + x*y)", "z*(w + x*z)", "z*(y + x*w)"},
                {{"1", "0", "0", "0"}, {"0", "y", "z", "w"}}, {{"0", "z"}, {"y*z", "0"}});
}

// Concrete member of the family with f = g = 1, h = k = 0.
inline Case example4() {
    return make({"x", "y", "z", "w"}, {},
                {"1 + 4*y*z - 2*w*z*(1 - 4*y*z - 4*y^3)", "1 + 2*w*(z + y^2)", "w - 2*y - 4*y*w*(z + y^2)", "z + y^2"},
                {{"-2*z", "0", "1", "0"}, {"8*y*z*w", "2*w", "-4*y*w", "1"}},
                {{"0", "x' + 2*z*z'"}, {"y' - 2*w*w'", "0"}});
}

// f(ξ) = ξ − ξ³, g(ξ) = ξ, h(ξ) = ξ².
inline Case example5() {
    return make({"x", "y", "z"}, {},
                {"-((x + y)^3*(1 - x - y - z) + (x + y)*(x + y + z))/(1 + 2*x)",
                 "(x + y)*(1 - (3*x + y)*(x + y)^2 + 3*x + y + z*(1 - x - y)*(1 + x + y))/(1 + 2*x)",
                 "(x + y)*(y - 1 - x^2) + (x + y)^2 + (x + y)^3*(1 - y + x^2)"},
                {{"-1/(1 + 2*x)", "1/(1 + 2*x)", "0"}, {"0", "0", "1"}}, {{"0", "x' + y'"}, {"x' + y'", "0"}});
}

inline Case example6() {
    return make({"x", "y", "z", "w"}, {},
                {"-(x + z^2) + 2*z*exp(-y - z) + 2*z*(exp(-y + w^2) + 2*exp(-w)*w - 2*exp(-y - z))*(x + z^2)",
                 "(exp(-y + w^2) + 2*exp(-w)*w)*(x + z^2)",
                 "-(exp(-y + w^2) + 2*exp(-w)*w - 2*exp(-y - z))*(x + z^2) - exp(-y - z)", "exp(-w)*(x + z^2)"},
                {{"2*z", "1", "-1", "0"}, {"-2*z", "0", "1", "0"}, {"4*z*w", "2*w", "-2*w", "1"}},
                {{"-(y' - 2*w*w')", "0", "0"}, {"0", "-(y' + z')", "0"}, {"0", "0", "-w'"}});
}

// z is a parameter with free speed z'; f(ξ) = −ξ, g(ξ) = ξ².
inline Case example7() {
    return make({"x", "y"}, {"z"},
                {"-(x - z^2) + 2*z*z'", "z*(x - z^2) - (y + x*z)*(x - z^2) + (x - z^2)^2 - x*z' - 2*z^2*z'"},
                {{"0", "1", "0"}, {"2*z", "-(x + 2*z^2)", "1"}}, {{"x' - 2*z*z'", "0"}, {"0", "y' + x*z' + z*x'"}});
}

inline Case example8() {
    return make({"x", "y", "z"}, {}, {"x - y - x^2*y - y*z^2", "y - x - x*(y^2 + z^2)", "2*z - x*y*z"},
                {{"x", "y", "z"}, {"y", "x", "0"}}, {{"-2*x*y", "-2*z^2"}, {"-(x^2 + y^2)", "0"}});
}

} // namespace fx
