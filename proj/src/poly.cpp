// Sparse multivariate polynomials over the rationals, used by cancel().
#include <map>

#include "sigred/expr.hpp"

namespace sigred {

namespace {

using Monomial = std::vector<int>;  // exponent per variable slot
using Poly = std::map<Monomial, Rational>;

struct Vars {
    std::vector<std::string> names;

    std::size_t slot(const std::string& n) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == n) return i;
        }
        names.push_back(n);
        return names.size() - 1;
    }
};

void pad(Monomial& m, std::size_t n) {
    if (m.size() < n) m.resize(n, 0);
}

void normalize(Poly& p, std::size_t n) {
    Poly out;
    for (const auto& [m0, c] : p) {
        Monomial m = m0;
        pad(m, n);
        if (c != 0) out[m] += c;
    }
    std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
    p = std::move(out);
}

// Monomial factor of a term; false when a factor is not a variable power.
bool monomial_of(const Expr& f, Vars& vars, Monomial& m) {
    if (f.kind() == Kind::Variable) {
        std::size_t s = vars.slot(f.name());
        pad(m, s + 1);
        m[s] += 1;
        return true;
    }
    if (f.kind() == Kind::Power && f.base().kind() == Kind::Variable &&
        boost::multiprecision::denominator(f.exponent()) == 1 && f.exponent() > 0) {
        std::size_t s = vars.slot(f.base().name());
        pad(m, s + 1);
        m[s] += static_cast<int>(boost::multiprecision::numerator(f.exponent()));
        return true;
    }
    return false;
}

std::vector<Expr> factors_of(const Expr& t) {
    if (t.kind() == Kind::Product) return {t.operands().begin(), t.operands().end()};
    return {t};
}

std::vector<Expr> terms_of(const Expr& e) {
    if (e.kind() == Kind::Sum) return {e.operands().begin(), e.operands().end()};
    return {e};
}

bool to_poly(const Expr& e, Vars& vars, Poly& out) {
    out.clear();
    for (const auto& t : terms_of(e)) {
        Rational c = 1;
        Monomial m;
        for (const auto& f : factors_of(t)) {
            if (f.is_constant()) {
                c *= f.value();
            } else if (!monomial_of(f, vars, m)) {
                return false;
            }
        }
        out[m] += c;
    }
    return true;
}

Poly mul(const Poly& a, const Poly& b, std::size_t n) {
    Poly out;
    for (const auto& [ma, ca] : a) {
        for (const auto& [mb, cb] : b) {
            Monomial m(n, 0);
            for (std::size_t i = 0; i < n; ++i) m[i] = (i < ma.size() ? ma[i] : 0) + (i < mb.size() ? mb[i] : 0);
            out[m] += ca * cb;
        }
    }
    normalize(out, n);
    return out;
}

// Exact division; false when b does not divide a. Lexicographic leading
// terms make the remainder unique, so a zero remainder decides divisibility.
bool divide(Poly a, const Poly& b, std::size_t n, Poly& q) {
    q.clear();
    if (b.empty()) return false;
    normalize(a, n);
    const auto& [lb, cb] = *b.rbegin();
    while (!a.empty()) {
        const auto [la, ca] = *a.rbegin();
        Monomial m(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = la[i] - lb[i];
            if (m[i] < 0) return false;
        }
        Rational c = ca / cb;
        q[m] += c;
        for (const auto& [mb, cbb] : b) {
            Monomial t(n, 0);
            for (std::size_t i = 0; i < n; ++i) t[i] = m[i] + mb[i];
            a[t] -= c * cbb;
            if (a[t] == 0) a.erase(t);
        }
    }
    normalize(q, n);
    return true;
}

Expr to_expr(const Poly& p, const Vars& vars) {
    std::vector<Expr> terms;
    for (const auto& [m, c] : p) {
        std::vector<Expr> fs{Expr(c)};
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i]) fs.push_back(pow(Expr::symbol(vars.names[i]), Rational(m[i])));
        }
        terms.push_back(product(std::move(fs)));
    }
    return sum(std::move(terms));
}

struct Fraction {
    Expr opaque;                        // non-polynomial numerator factors
    std::vector<std::pair<Expr, int>> den;  // LCD as base, multiplicity
    std::vector<Expr> original;             // the terms this fraction came from
};

int multiplicity(const std::vector<std::pair<Expr, int>>& den, const Expr& base) {
    for (const auto& [b, k] : den) {
        if (b == base) return k;
    }
    return 0;
}

} // namespace

Expr cancel(const Expr& e) {
    Expr x = expand(e);
    if (x.kind() != Kind::Sum && x.kind() != Kind::Product) return x;
    Vars vars;
    // Group terms by their non-polynomial numerator part.
    std::vector<Fraction> groups;
    std::vector<Expr> untouched;
    for (const auto& t : terms_of(x)) {
        Monomial m;
        std::vector<Expr> opaque;
        std::vector<std::pair<Expr, int>> den;
        for (const auto& f : factors_of(t)) {
            if (f.is_constant() || monomial_of(f, vars, m)) {
                continue;
            } else if (f.kind() == Kind::Power && f.exponent() < 0 &&
                       boost::multiprecision::denominator(f.exponent()) == 1) {
                den.emplace_back(f.base(), static_cast<int>(-boost::multiprecision::numerator(f.exponent())));
            } else {
                opaque.push_back(f);
            }
        }
        if (den.empty()) {
            untouched.push_back(t);
            continue;
        }
        Expr op = product(opaque);
        Fraction* g = nullptr;
        for (auto& h : groups) {
            if (h.opaque == op) g = &h;
        }
        if (!g) {
            groups.push_back({op, {}, {}});
            g = &groups.back();
        }
        g->original.push_back(t);
        for (const auto& [b, k] : den) {
            bool found = false;
            for (auto& [gb, gk] : g->den) {
                if (gb == b) {
                    gk = std::max(gk, k);
                    found = true;
                }
            }
            if (!found) g->den.emplace_back(b, k);
        }
    }
    if (groups.empty()) return x;

    std::vector<Expr> out = untouched;
    for (auto& g : groups) {
        bool ok = true;
        std::vector<Poly> bases;
        for (const auto& [b, k] : g.den) {
            Poly p;
            if (!to_poly(b, vars, p)) {
                ok = false;
                break;
            }
            bases.push_back(std::move(p));
        }
        if (!ok) {
            out.insert(out.end(), g.original.begin(), g.original.end());
            continue;
        }
        const std::size_t n = vars.names.size();
        for (auto& b : bases) normalize(b, n);
        // Numerator over the LCD.
        Poly num;
        for (const auto& t : g.original) {
            Rational c = 1;
            Monomial m;
            std::vector<std::pair<Expr, int>> den;
            for (const auto& f : factors_of(t)) {
                if (f.is_constant()) {
                    c *= f.value();
                } else if (monomial_of(f, vars, m)) {
                    continue;
                } else if (f.kind() == Kind::Power && f.exponent() < 0 &&
                           boost::multiprecision::denominator(f.exponent()) == 1) {
                    den.emplace_back(f.base(), static_cast<int>(-boost::multiprecision::numerator(f.exponent())));
                }
            }
            Poly tp;
            pad(m, n);
            tp[m] = c;
            for (std::size_t i = 0; i < g.den.size(); ++i) {
                int missing = g.den[i].second - multiplicity(den, g.den[i].first);
                for (int r = 0; r < missing; ++r) tp = mul(tp, bases[i], n);
            }
            for (const auto& [mm, cc] : tp) num[mm] += cc;
        }
        normalize(num, n);
        int before = 0;
        int after = 0;
        std::vector<int> left;
        for (std::size_t i = 0; i < g.den.size(); ++i) {
            int k = g.den[i].second;
            before += k;
            Poly q;
            while (k > 0 && !num.empty() && divide(num, bases[i], n, q)) {
                num = q;
                --k;
            }
            if (num.empty()) k = 0;
            after += k;
            left.push_back(k);
        }
        if (after >= before && g.original.size() > 1) {
            // Nothing cancelled: keep the expanded terms.
            out.insert(out.end(), g.original.begin(), g.original.end());
            continue;
        }
        if (num.empty()) continue;
        std::vector<Expr> fs{g.opaque};
        for (std::size_t i = 0; i < g.den.size(); ++i) {
            if (left[i]) fs.push_back(pow(g.den[i].first, Rational(-left[i])));
        }
        Expr rest = product(std::move(fs));
        for (const auto& t : terms_of(to_expr(num, vars))) out.push_back(t * rest);
    }
    return sum(std::move(out));
}

} // namespace sigred
