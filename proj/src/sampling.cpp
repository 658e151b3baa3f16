#include "sigred/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace sigred {

Interval SampleDomain::bounds_for(std::string_view name) const {
    auto it = bounds.find(name);
    return it == bounds.end() ? fallback : it->second;
}

void SampleDomain::validate() const {
    auto check = [](const std::string& name, const Interval& b) {
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) {
            throw Error("invalid sample interval for '" + name + "'");
        }
    };
    check("*", fallback);
    for (const auto& [name, b] : bounds) check(name, b);
    if (count < 8) throw Error("sample count must be at least 8");
    if (!(tolerance > 0)) throw Error("tolerance must be positive");
}

std::vector<Point> sample_points(const SampleDomain& domain, std::span<const Expr> exprs,
                                 const std::set<std::string>& extra) {
    domain.validate();
    std::set<std::string> names = extra;
    std::vector<Expr> guards;
    for (const auto& e : exprs) {
        auto fs = free_symbols(e);
        names.insert(fs.begin(), fs.end());
        auto g = singular_guards(e);
        guards.insert(guards.end(), g.begin(), g.end());
    }
    std::vector<std::pair<std::string, Interval>> axes;
    axes.reserve(names.size());
    for (const auto& n : names) axes.emplace_back(n, domain.bounds_for(n));

    Rng rng(domain.seed);
    std::vector<Point> out;
    out.reserve(domain.count);
    std::size_t draws = 0;
    while (out.size() < domain.count) {
        if (draws++ >= domain.max_draws()) {
            throw InsufficientSamples("only " + std::to_string(out.size()) + " of " + std::to_string(domain.count) +
                                      " sample points were admissible after " + std::to_string(domain.max_draws()) +
                                      " draws");
        }
        Point p;
        for (const auto& [name, b] : axes) p.set(name, rng.uniform(b.lo, b.hi));
        bool ok = true;
        try {
            for (const auto& g : guards) {
                double v = evaluate(g, p);
                if (!std::isfinite(v) || std::abs(v) < domain.guard) {
                    ok = false;
                    break;
                }
            }
            for (std::size_t i = 0; ok && i < exprs.size(); ++i) {
                if (!std::isfinite(evaluate(exprs[i], p))) ok = false;
            }
        } catch (const DomainError&) {
            ok = false;
        }
        if (ok) out.push_back(std::move(p));
    }
    return out;
}

Comparison equals_numeric(const Expr& a, const Expr& b, const SampleDomain& domain) {
    Comparison c;
    bool polynomial = is_polynomial(a) && is_polynomial(b);
    std::vector<Expr> both{a, b};
    auto points = sample_points(domain, both);
    c.points = points.size();
    for (const auto& p : points) {
        double va = evaluate(a, p);
        double vb = evaluate(b, p);
        c.residual = std::max(c.residual, std::abs(va - vb) / (1.0 + std::abs(va)));
    }
    if (polynomial) {
        c.exact = true;
        c.equal = expand(a - b).is_zero();
    } else {
        c.equal = c.residual < domain.tolerance;
    }
    return c;
}

Comparison is_zero_numeric(const Expr& e, const SampleDomain& domain) { return equals_numeric(Expr(0), e, domain); }

} // namespace sigred
