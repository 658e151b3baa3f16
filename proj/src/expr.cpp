#include "sigred/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace sigred {

struct Node {
    Kind kind;
    Rational value;  // Constant value, or Power exponent
    std::string name;
    std::vector<Expr> ops;
    std::size_t hash;
};

namespace {

std::size_t hash_combine(std::size_t seed, std::size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t hash_rational(const Rational& r) {
    return std::hash<std::string>{}(r.str());
}

bool is_integer(const Rational& r) { return boost::multiprecision::denominator(r) == 1; }

int kind_rank(Kind k) { return static_cast<int>(k); }

const Expr& zero_expr() {
    static const Expr z{Rational(0)};
    return z;
}

const Expr& one_expr() {
    static const Expr o{Rational(1)};
    return o;
}

} // namespace

Expr make_node(Kind kind, Rational value, std::string name, std::vector<Expr> ops) {
    std::size_t h = static_cast<std::size_t>(kind) * 1000003u;
    switch (kind) {
    case Kind::Constant:
        h = hash_combine(h, hash_rational(value));
        break;
    case Kind::Variable:
        h = hash_combine(h, std::hash<std::string>{}(name));
        break;
    case Kind::Power:
        h = hash_combine(h, hash_rational(value));
        [[fallthrough]];
    default:
        for (const auto& op : ops) h = hash_combine(h, op.hash());
        break;
    }
    auto node = std::make_shared<Node>(Node{kind, std::move(value), std::move(name), std::move(ops), h});
    return Expr(std::shared_ptr<const Node>(std::move(node)));
}

namespace {

Expr raw_constant(Rational v) { return make_node(Kind::Constant, std::move(v), {}, {}); }
Expr raw_power(const Expr& b, const Rational& k) { return make_node(Kind::Power, k, {}, {b}); }
Expr raw_product(std::vector<Expr> ops) { return make_node(Kind::Product, 0, {}, std::move(ops)); }
Expr raw_sum(std::vector<Expr> ops) { return make_node(Kind::Sum, 0, {}, std::move(ops)); }

} // namespace

Expr::Expr() : Expr(zero_expr()) {}
Expr::Expr(int value) : Expr(raw_constant(Rational(value))) {}
Expr::Expr(Rational value) : Expr(raw_constant(std::move(value))) {}

Expr Expr::symbol(std::string name) { return make_node(Kind::Variable, 0, std::move(name), {}); }

Kind Expr::kind() const noexcept { return node_->kind; }
bool Expr::is_zero() const noexcept { return node_->kind == Kind::Constant && node_->value == 0; }
bool Expr::is_one() const noexcept { return node_->kind == Kind::Constant && node_->value == 1; }
const Rational& Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
const Rational& Expr::exponent() const { return node_->value; }
const Expr& Expr::base() const { return node_->ops.front(); }
const Expr& Expr::arg() const { return node_->ops.front(); }
std::span<const Expr> Expr::operands() const { return node_->ops; }
std::size_t Expr::hash() const noexcept { return node_->hash; }

std::strong_ordering operator<=>(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    const Node& x = *a.node_;
    const Node& y = *b.node_;
    if (x.kind != y.kind) return kind_rank(x.kind) <=> kind_rank(y.kind);
    switch (x.kind) {
    case Kind::Constant:
        if (x.value < y.value) return std::strong_ordering::less;
        if (x.value > y.value) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    case Kind::Variable:
        return x.name.compare(y.name) <=> 0;
    case Kind::Power: {
        auto c = x.ops.front() <=> y.ops.front();
        if (c != 0) return c;
        if (x.value < y.value) return std::strong_ordering::less;
        if (x.value > y.value) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }
    default: {
        // Compare from the most significant (last) operand, so that e.g.
        // x*y^2 and y^2 sort next to each other in a sum.
        auto ix = x.ops.rbegin();
        auto iy = y.ops.rbegin();
        for (; ix != x.ops.rend() && iy != y.ops.rend(); ++ix, ++iy) {
            auto c = *ix <=> *iy;
            if (c != 0) return c;
        }
        return x.ops.size() <=> y.ops.size();
    }
    }
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.node_->hash != b.node_->hash) return false;
    return (a <=> b) == 0;
}

// ---------------------------------------------------------------------------
// Canonical constructors

namespace {

std::pair<Rational, Expr> split_coefficient(const Expr& term) {
    if (term.kind() == Kind::Constant) return {term.value(), one_expr()};
    if (term.kind() == Kind::Product && term.operands().front().kind() == Kind::Constant) {
        auto ops = term.operands();
        if (ops.size() == 2) return {ops[0].value(), ops[1]};
        return {ops[0].value(), raw_product(std::vector<Expr>(ops.begin() + 1, ops.end()))};
    }
    return {Rational(1), term};
}

Expr attach_coefficient(const Rational& c, const Expr& rest) {
    if (c == 1) return rest;
    if (rest.kind() == Kind::Product) {
        std::vector<Expr> ops;
        ops.reserve(rest.operands().size() + 1);
        ops.push_back(raw_constant(c));
        ops.insert(ops.end(), rest.operands().begin(), rest.operands().end());
        return raw_product(std::move(ops));
    }
    return raw_product({raw_constant(c), rest});
}

void flatten_sum(const Expr& e, std::vector<Expr>& out) {
    if (e.kind() == Kind::Sum) {
        for (const auto& op : e.operands()) out.push_back(op);
    } else {
        out.push_back(e);
    }
}

// Integer q-th root of a non-negative integer, if exact.
bool exact_root(const boost::multiprecision::cpp_int& n, unsigned q, boost::multiprecision::cpp_int& root) {
    using boost::multiprecision::cpp_int;
    if (n < 0) return false;
    if (n == 0 || n == 1) {
        root = n;
        return true;
    }
    double approx = std::pow(static_cast<double>(n), 1.0 / q);
    if (!std::isfinite(approx)) return false;
    cpp_int guess = static_cast<cpp_int>(std::llround(approx));
    for (int delta = -2; delta <= 2; ++delta) {
        cpp_int candidate = guess + delta;
        if (candidate < 0) continue;
        if (boost::multiprecision::pow(candidate, q) == n) {
            root = candidate;
            return true;
        }
    }
    return false;
}

Rational rational_int_power(const Rational& b, const boost::multiprecision::cpp_int& k) {
    using boost::multiprecision::cpp_int;
    cpp_int num = boost::multiprecision::numerator(b);
    cpp_int den = boost::multiprecision::denominator(b);
    cpp_int mag = k < 0 ? cpp_int(-k) : k;
    unsigned e = static_cast<unsigned>(mag);
    cpp_int pn = boost::multiprecision::pow(num, e);
    cpp_int pd = boost::multiprecision::pow(den, e);
    if (k < 0) {
        if (pn < 0) return Rational(cpp_int(-pd), cpp_int(-pn));
        return Rational(pd, pn);
    }
    return Rational(pn, pd);
}

} // namespace

Expr sum(std::vector<Expr> terms) {
    std::vector<Expr> flat;
    flat.reserve(terms.size());
    for (const auto& t : terms) flatten_sum(t, flat);

    Rational constant = 0;
    std::vector<std::pair<Expr, Rational>> collected;
    collected.reserve(flat.size());
    for (const auto& t : flat) {
        auto [c, rest] = split_coefficient(t);
        if (rest.is_one()) {
            constant += c;
        } else {
            collected.emplace_back(rest, c);
        }
    }
    std::stable_sort(collected.begin(), collected.end(),
                     [](const auto& a, const auto& b) { return (a.first <=> b.first) < 0; });

    std::vector<Expr> out;
    out.reserve(collected.size() + 1);
    for (std::size_t i = 0; i < collected.size();) {
        Rational c = collected[i].second;
        std::size_t j = i + 1;
        while (j < collected.size() && collected[j].first == collected[i].first) {
            c += collected[j].second;
            ++j;
        }
        if (c != 0) out.push_back(attach_coefficient(c, collected[i].first));
        i = j;
    }
    if (constant != 0) out.push_back(raw_constant(constant));
    if (out.empty()) return zero_expr();
    if (out.size() == 1) return out.front();
    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return (a <=> b) < 0; });
    return raw_sum(std::move(out));
}

Expr product(std::vector<Expr> factors) {
    Rational c = 1;
    std::vector<std::pair<Expr, Rational>> powers;
    std::vector<Expr> exp_args;

    std::function<void(const Expr&)> absorb = [&](const Expr& f) {
        switch (f.kind()) {
        case Kind::Constant:
            c *= f.value();
            break;
        case Kind::Product:
            for (const auto& op : f.operands()) absorb(op);
            break;
        case Kind::Power:
            powers.emplace_back(f.base(), f.exponent());
            break;
        case Kind::Exp:
            exp_args.push_back(f.arg());
            break;
        default:
            powers.emplace_back(f, Rational(1));
            break;
        }
    };
    for (const auto& f : factors) absorb(f);
    if (c == 0) return zero_expr();

    std::stable_sort(powers.begin(), powers.end(),
                     [](const auto& a, const auto& b) { return (a.first <=> b.first) < 0; });

    std::vector<Expr> out;
    std::vector<Expr> pending;
    for (std::size_t i = 0; i < powers.size();) {
        Rational k = powers[i].second;
        std::size_t j = i + 1;
        while (j < powers.size() && powers[j].first == powers[i].first) {
            k += powers[j].second;
            ++j;
        }
        const Expr& b = powers[i].first;
        i = j;
        if (k == 0) continue;
        Expr p = (k == 1) ? b : pow(b, k);
        switch (p.kind()) {
        case Kind::Constant:
            c *= p.value();
            break;
        case Kind::Product:
            pending.push_back(p);
            break;
        case Kind::Exp:
            exp_args.push_back(p.arg());
            break;
        default:
            out.push_back(p);
            break;
        }
    }
    if (!exp_args.empty()) {
        Expr e = exp(sum(exp_args));
        if (e.kind() == Kind::Constant) {
            c *= e.value();
        } else if (e.kind() == Kind::Exp) {
            out.push_back(e);
        } else {
            pending.push_back(e);
        }
    }
    if (!pending.empty()) {
        pending.insert(pending.end(), out.begin(), out.end());
        pending.push_back(raw_constant(c));
        return product(std::move(pending));
    }
    if (c == 0) return zero_expr();
    if (out.empty()) return raw_constant(c);
    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return (a <=> b) < 0; });
    if (out.size() == 1) {
        if (c == 1) return out.front();
        if (out.front().kind() == Kind::Sum) {
            std::vector<Expr> terms;
            terms.reserve(out.front().operands().size());
            Expr coeff = raw_constant(c);
            for (const auto& t : out.front().operands()) terms.push_back(product({coeff, t}));
            return sum(std::move(terms));
        }
    }
    if (c != 1) out.insert(out.begin(), raw_constant(c));
    return raw_product(std::move(out));
}

Expr pow(const Expr& b, const Rational& k) {
    using boost::multiprecision::cpp_int;
    if (k == 0) return one_expr();
    if (k == 1) return b;
    switch (b.kind()) {
    case Kind::Constant: {
        const Rational& v = b.value();
        if (v == 1) return one_expr();
        if (v == 0) return k > 0 ? zero_expr() : raw_power(b, k);
        if (is_integer(k)) {
            cpp_int n = boost::multiprecision::numerator(k);
            if (boost::multiprecision::abs(n) > 4096) return raw_power(b, k);
            return raw_constant(rational_int_power(v, n));
        }
        if (v > 0) {
            cpp_int p = boost::multiprecision::numerator(k);
            cpp_int q = boost::multiprecision::denominator(k);
            if (q <= 64) {
                cpp_int rn, rd;
                unsigned qq = static_cast<unsigned>(q);
                if (exact_root(boost::multiprecision::numerator(v), qq, rn) &&
                    exact_root(boost::multiprecision::denominator(v), qq, rd)) {
                    return pow(raw_constant(Rational(rn, rd)), Rational(p));
                }
            }
        }
        return raw_power(b, k);
    }
    case Kind::Power:
        if (is_integer(k)) return pow(b.base(), b.exponent() * k);
        return raw_power(b, k);
    case Kind::Product:
        if (is_integer(k)) {
            std::vector<Expr> fs;
            fs.reserve(b.operands().size());
            for (const auto& f : b.operands()) fs.push_back(pow(f, k));
            return product(std::move(fs));
        }
        return raw_power(b, k);
    case Kind::Exp:
        return exp(product({raw_constant(k), b.arg()}));
    default:
        return raw_power(b, k);
    }
}

Expr exp(const Expr& arg) {
    if (arg.is_zero()) return one_expr();
    return make_node(Kind::Exp, 0, {}, {arg});
}

Expr log(const Expr& arg) {
    if (arg.is_one()) return zero_expr();
    if (arg.kind() == Kind::Exp) return arg.arg();
    return make_node(Kind::Log, 0, {}, {arg});
}

Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return sum({a, product({Expr(-1), b})}); }
Expr operator-(const Expr& a) { return product({Expr(-1), a}); }
Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return product({a, pow(b, Rational(-1))}); }
Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

// ---------------------------------------------------------------------------
// Calculus and rewriting

Expr differentiate(const Expr& e, std::string_view var) {
    switch (e.kind()) {
    case Kind::Constant:
        return zero_expr();
    case Kind::Variable:
        return e.name() == var ? one_expr() : zero_expr();
    case Kind::Sum: {
        std::vector<Expr> terms;
        for (const auto& op : e.operands()) {
            Expr d = differentiate(op, var);
            if (!d.is_zero()) terms.push_back(std::move(d));
        }
        return sum(std::move(terms));
    }
    case Kind::Product: {
        auto ops = e.operands();
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < ops.size(); ++i) {
            Expr d = differentiate(ops[i], var);
            if (d.is_zero()) continue;
            std::vector<Expr> fs;
            fs.reserve(ops.size());
            for (std::size_t j = 0; j < ops.size(); ++j) {
                if (j != i) fs.push_back(ops[j]);
            }
            fs.push_back(std::move(d));
            terms.push_back(product(std::move(fs)));
        }
        return sum(std::move(terms));
    }
    case Kind::Power: {
        Expr db = differentiate(e.base(), var);
        if (db.is_zero()) return zero_expr();
        return product({Expr(e.exponent()), pow(e.base(), e.exponent() - 1), db});
    }
    case Kind::Exp: {
        Expr da = differentiate(e.arg(), var);
        if (da.is_zero()) return zero_expr();
        return product({e, da});
    }
    case Kind::Log: {
        Expr da = differentiate(e.arg(), var);
        if (da.is_zero()) return zero_expr();
        return product({da, pow(e.arg(), Rational(-1))});
    }
    }
    return zero_expr();
}

namespace {

// Keyed by node address. The key expression is stored next to the result so
// the node stays alive and its address cannot be reused by a later
// temporary.
using Memo = std::unordered_map<const Node*, std::pair<Expr, Expr>>;

template <typename Leaf>
Expr rebuild(const Expr& e, const Leaf& leaf, Memo& memo) {
    if (auto it = memo.find(e.identity()); it != memo.end()) return it->second.second;
    Expr out;
    switch (e.kind()) {
    case Kind::Constant:
        out = e;
        break;
    case Kind::Variable:
        out = leaf(e);
        break;
    case Kind::Power:
        out = pow(rebuild(e.base(), leaf, memo), e.exponent());
        break;
    case Kind::Exp:
        out = exp(rebuild(e.arg(), leaf, memo));
        break;
    case Kind::Log:
        out = log(rebuild(e.arg(), leaf, memo));
        break;
    case Kind::Product:
    case Kind::Sum: {
        std::vector<Expr> ops;
        ops.reserve(e.operands().size());
        for (const auto& op : e.operands()) ops.push_back(rebuild(op, leaf, memo));
        out = e.kind() == Kind::Sum ? sum(std::move(ops)) : product(std::move(ops));
        break;
    }
    }
    memo.emplace(e.identity(), std::pair{e, out});
    return out;
}

} // namespace

Expr substitute(const Expr& e, const Substitution& bindings) {
    if (bindings.empty()) return e;
    Memo memo;
    return rebuild(
        e,
        [&](const Expr& v) {
            auto it = bindings.find(v.name());
            return it == bindings.end() ? v : it->second;
        },
        memo);
}

Expr canonical(const Expr& e) {
    Memo memo;
    return rebuild(e, [](const Expr& v) { return v; }, memo);
}

namespace {

Expr multiply_out(const std::vector<Expr>& a, const std::vector<Expr>& b) {
    std::vector<Expr> terms;
    terms.reserve(a.size() * b.size());
    for (const auto& x : a) {
        for (const auto& y : b) terms.push_back(product({x, y}));
    }
    return sum(std::move(terms));
}

std::vector<Expr> as_terms(const Expr& e) {
    if (e.kind() == Kind::Sum) return {e.operands().begin(), e.operands().end()};
    return {e};
}

Expr expand_impl(const Expr& e, Memo& memo);

// A product whose merged powers produced a sum factor, or a power of a sum
// with exponent above one, needs another pass.
bool unsettled(const Expr& t) {
    if (t.kind() != Kind::Product) return false;
    for (const auto& f : t.operands()) {
        if (f.kind() == Kind::Sum) return true;
        if (f.kind() == Kind::Power && f.base().kind() == Kind::Sum && f.exponent() >= 1) return true;
    }
    return false;
}

Expr settle(const Expr& t) {
    if (!unsettled(t)) return t;
    Memo memo;
    return expand_impl(t, memo);
}

Expr expand_product(const std::vector<Expr>& factors) {
    std::vector<Expr> acc{one_expr()};
    std::vector<Expr> scalars;
    for (const auto& f : factors) {
        if (f.kind() == Kind::Sum) {
            acc = as_terms(multiply_out(acc, as_terms(f)));
        } else {
            scalars.push_back(f);
        }
    }
    if (scalars.empty()) {
        for (auto& t : acc) t = settle(t);
        return sum(std::move(acc));
    }
    Expr s = product(scalars);
    std::vector<Expr> terms;
    if (s.kind() == Kind::Sum) {
        terms = as_terms(multiply_out(acc, as_terms(s)));
    } else {
        terms.reserve(acc.size());
        for (const auto& t : acc) terms.push_back(product({t, s}));
    }
    for (auto& t : terms) t = settle(t);
    return sum(std::move(terms));
}

Expr expand_impl(const Expr& e, Memo& memo) {
    if (auto it = memo.find(e.identity()); it != memo.end()) return it->second.second;
    Expr out;
    switch (e.kind()) {
    case Kind::Constant:
    case Kind::Variable:
        out = e;
        break;
    case Kind::Sum: {
        std::vector<Expr> ops;
        for (const auto& op : e.operands()) ops.push_back(expand_impl(op, memo));
        out = sum(std::move(ops));
        break;
    }
    case Kind::Product: {
        std::vector<Expr> ops;
        for (const auto& op : e.operands()) ops.push_back(expand_impl(op, memo));
        Expr p = product(ops);
        if (p.kind() != Kind::Product) {
            out = (p.kind() == Kind::Sum) ? expand_impl(p, memo) : p;
        } else {
            std::vector<Expr> fs(p.operands().begin(), p.operands().end());
            out = expand_product(fs);
        }
        break;
    }
    case Kind::Power: {
        Expr b = expand_impl(e.base(), memo);
        const Rational& k = e.exponent();
        if (b.kind() == Kind::Sum && is_integer(k) && k > 0 && k <= 64) {
            unsigned n = static_cast<unsigned>(boost::multiprecision::numerator(k));
            std::vector<Expr> base_terms = as_terms(b);
            std::vector<Expr> acc = base_terms;
            for (unsigned i = 1; i < n; ++i) acc = as_terms(multiply_out(acc, base_terms));
            out = sum(std::move(acc));
        } else if (b.kind() == Kind::Sum && !is_integer(k) && k > 1) {
            // s^(n+r) with 0 < r < 1 becomes the expanded s^n times s^r.
            Rational n(numerator(k) / denominator(k));
            Expr whole = expand_impl(pow(b, n), memo);
            out = expand_product({whole, raw_power(b, k - n)});
        } else {
            Expr p = pow(b, k);
            out = (p.kind() == Kind::Power || p.kind() == Kind::Constant || p.kind() == Kind::Variable)
                      ? p
                      : expand_impl(p, memo);
        }
        break;
    }
    case Kind::Exp:
        out = exp(expand_impl(e.arg(), memo));
        break;
    case Kind::Log:
        out = log(expand_impl(e.arg(), memo));
        break;
    }
    memo.emplace(e.identity(), std::pair{e, out});
    return out;
}

void collect_symbols(const Expr& e, std::set<std::string>& out) {
    if (e.kind() == Kind::Variable) {
        out.insert(e.name());
        return;
    }
    for (const auto& op : e.operands()) collect_symbols(op, out);
}

} // namespace

Expr expand(const Expr& e) {
    Memo memo;
    return expand_impl(e, memo);
}

std::set<std::string> free_symbols(const Expr& e) {
    std::set<std::string> out;
    collect_symbols(e, out);
    return out;
}

bool depends_on(const Expr& e, std::string_view var) {
    if (e.kind() == Kind::Variable) return e.name() == var;
    for (const auto& op : e.operands()) {
        if (depends_on(op, var)) return true;
    }
    return false;
}

bool is_rational_function(const Expr& e) {
    switch (e.kind()) {
    case Kind::Exp:
    case Kind::Log:
        return false;
    case Kind::Power:
        if (!is_integer(e.exponent())) return false;
        break;
    default:
        break;
    }
    for (const auto& op : e.operands()) {
        if (!is_rational_function(op)) return false;
    }
    return true;
}

bool is_polynomial(const Expr& e) {
    switch (e.kind()) {
    case Kind::Exp:
    case Kind::Log:
        return false;
    case Kind::Power:
        if (!is_integer(e.exponent()) || e.exponent() < 0) return false;
        break;
    default:
        break;
    }
    for (const auto& op : e.operands()) {
        if (!is_polynomial(op)) return false;
    }
    return true;
}

namespace {

void collect_guards(const Expr& e, std::vector<Expr>& out) {
    if (e.kind() == Kind::Power && (e.exponent() < 0 || !is_integer(e.exponent()))) out.push_back(e.base());
    if (e.kind() == Kind::Log) out.push_back(e.arg());
    for (const auto& op : e.operands()) collect_guards(op, out);
}

} // namespace

std::vector<Expr> singular_guards(const Expr& e) {
    std::vector<Expr> out;
    collect_guards(e, out);
    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return (a <=> b) < 0; });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

Point::Point(std::initializer_list<std::pair<std::string, double>> values) {
    for (const auto& [k, v] : values) set(k, v);
}

void Point::set(std::string_view name, double value) {
    auto it = std::lower_bound(values_.begin(), values_.end(), name,
                               [](const auto& entry, std::string_view n) { return entry.first < n; });
    if (it != values_.end() && it->first == name) {
        it->second = value;
    } else {
        values_.insert(it, {std::string(name), value});
    }
}

const double* Point::find(std::string_view name) const {
    auto it = std::lower_bound(values_.begin(), values_.end(), name,
                               [](const auto& entry, std::string_view n) { return entry.first < n; });
    if (it != values_.end() && it->first == name) return &it->second;
    return nullptr;
}

double Point::at(std::string_view name) const {
    if (const double* v = find(name)) return *v;
    throw UnboundSymbol(std::string(name));
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

double evaluate(const Expr& e, const Point& point) {
    switch (e.kind()) {
    case Kind::Constant:
        return to_double(e.value());
    case Kind::Variable:
        return point.at(e.name());
    case Kind::Sum: {
        double s = 0.0;
        for (const auto& op : e.operands()) s += evaluate(op, point);
        return s;
    }
    case Kind::Product: {
        double p = 1.0;
        for (const auto& op : e.operands()) p *= evaluate(op, point);
        return p;
    }
    case Kind::Power: {
        double b = evaluate(e.base(), point);
        const Rational& k = e.exponent();
        if (is_integer(k)) {
            if (b == 0.0 && k < 0) throw DomainError("zero raised to a negative power");
            long n = boost::multiprecision::numerator(k).convert_to<long>();
            if (n == -1) return 1.0 / b;
            if (n == 2) return b * b;
            return std::pow(b, static_cast<double>(n));
        }
        if (b < 0.0) throw DomainError("fractional power of a negative value");
        if (b == 0.0 && k < 0) throw DomainError("zero raised to a negative power");
        return std::pow(b, to_double(k));
    }
    case Kind::Exp:
        return std::exp(evaluate(e.arg(), point));
    case Kind::Log: {
        double a = evaluate(e.arg(), point);
        if (!(a > 0.0)) throw DomainError("log of a non-positive value");
        return std::log(a);
    }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Printing

std::string to_string(const Rational& r) {
    auto num = boost::multiprecision::numerator(r);
    auto den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

namespace {

enum Prec { kSum = 1, kProduct = 2, kUnary = 3, kPower = 4 };

std::string print(const Expr& e, int parent);

std::string print_exponent(const Rational& k) {
    if (is_integer(k) && k > 0) return to_string(k);
    return "(" + to_string(k) + ")";
}

std::string print_product(const Rational& coeff, std::span<const Expr> factors) {
    using boost::multiprecision::abs;
    std::vector<std::string> num;
    std::vector<std::string> den;
    boost::multiprecision::cpp_int cnum = abs(boost::multiprecision::numerator(coeff));
    auto cden = boost::multiprecision::denominator(coeff);
    bool den_complex = false;
    bool den_has_sum = false;
    for (const auto& f : factors) {
        if (f.kind() == Kind::Power && f.exponent() < 0) {
            Expr inv = pow(f.base(), -f.exponent());
            den.push_back(print(inv, kPower));
            if (inv.kind() == Kind::Power) den_complex = true;
            if (f.base().kind() == Kind::Sum) den_has_sum = true;
        } else {
            num.push_back(print(f, kProduct + 1));
        }
    }
    // A coefficient denominator is folded into the fraction only when that
    // reads back unchanged: 2*(x + 1) would distribute, and x^2/3 would
    // parse as x^(2/3). Otherwise it leads as a p/q factor.
    bool ends_with_power = !num.empty() && factors.size() > 0 && num.back().find('^') != std::string::npos;
    bool fold = cden != 1 && !den_has_sum && !(den.empty() && ends_with_power);
    if (cden != 1 && !fold) {
        num.insert(num.begin(), cnum.str() + "/" + cden.str());
    } else if (cnum != 1 || num.empty()) {
        num.insert(num.begin(), cnum.str());
    }
    if (fold) den.insert(den.begin(), cden.str());
    std::string out;
    for (std::size_t i = 0; i < num.size(); ++i) {
        if (i) out += "*";
        out += num[i];
    }
    if (!den.empty()) {
        out += "/";
        if (den.size() == 1 && !den_complex) {
            out += den.front();
        } else {
            out += "(";
            for (std::size_t i = 0; i < den.size(); ++i) {
                if (i) out += "*";
                out += den[i];
            }
            out += ")";
        }
    }
    return out;
}

std::string wrap(const std::string& s, bool parens) { return parens ? "(" + s + ")" : s; }

std::string print(const Expr& e, int parent) {
    switch (e.kind()) {
    case Kind::Constant: {
        const Rational& v = e.value();
        std::string s = to_string(v);
        bool compound = v < 0 || !is_integer(v);
        return wrap(s, compound && parent >= kProduct);
    }
    case Kind::Variable:
        return e.name();
    case Kind::Power: {
        std::string b = print(e.base(), kPower + 1);
        if (e.exponent() < 0) {
            // x^(-k) prints as 1/x^k
            std::string s = print_product(Rational(1), std::span<const Expr>(&e, 1));
            return wrap(s, parent >= kProduct + 1);
        }
        return b + "^" + print_exponent(e.exponent());
    }
    case Kind::Exp:
        return "exp(" + print(e.arg(), 0) + ")";
    case Kind::Log:
        return "log(" + print(e.arg(), 0) + ")";
    case Kind::Product: {
        auto ops = e.operands();
        Rational c = 1;
        std::span<const Expr> factors = ops;
        if (ops.front().kind() == Kind::Constant) {
            c = ops.front().value();
            factors = ops.subspan(1);
        }
        std::string s = print_product(c, factors);
        if (c < 0) return wrap("-" + s, parent >= kProduct);
        return wrap(s, parent > kProduct);
    }
    case Kind::Sum: {
        std::string s;
        bool first = true;
        // Print non-constant terms first, the constant last (canonical order
        // puts constants first, which reads oddly).
        std::vector<Expr> terms(e.operands().begin(), e.operands().end());
        std::stable_partition(terms.begin(), terms.end(), [](const Expr& t) { return !t.is_constant(); });
        for (const auto& t : terms) {
            auto [c, rest] = split_coefficient(t);
            if (first) {
                s += print(t, kSum);
                first = false;
            } else if (c < 0) {
                s += " - " + print(attach_coefficient(-c, rest), kSum);
            } else {
                s += " + " + print(t, kSum);
            }
        }
        return wrap(s, parent > kSum);
    }
    }
    return {};
}

} // namespace

std::string to_string(const Expr& e) { return print(e, 0); }

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

bool rationalize(double x, double tol, Rational& out, long max_den) {
    if (!std::isfinite(x)) return false;
    long best_den = 1;
    double best_err = std::numeric_limits<double>::infinity();
    long best_num = 0;
    for (long q = 1; q <= max_den; ++q) {
        double p = std::round(x * static_cast<double>(q));
        if (std::abs(p) > 9e15) return false;
        double err = std::abs(x - p / static_cast<double>(q));
        if (err < best_err) {
            best_err = err;
            best_num = static_cast<long>(p);
            best_den = q;
        }
        if (err <= tol) break;
    }
    if (best_err > tol) return false;
    out = Rational(best_num, best_den);
    return true;
}

} // namespace sigred
