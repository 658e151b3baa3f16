#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sigred/errors.hpp"

namespace sigred {

using Rational = boost::multiprecision::cpp_rational;

/// Node kinds, listed in canonical order: a Constant sorts before a Variable,
/// which sorts before a Power, and so on up to Sum.
enum class Kind : std::uint8_t { Constant, Variable, Power, Exp, Log, Product, Sum };

struct Node;

/// Immutable symbolic expression over exact rationals.
///
/// Every Expr is built through the canonicalizing constructors below, so two
/// structurally equal expressions always compare equal with ==. Subtraction is
/// a Sum containing a Product with coefficient -1; division is a Power with a
/// negative exponent.
class Expr {
public:
    Expr();  // the constant 0
    Expr(int value);  // NOLINT(google-explicit-constructor): literals read naturally in formulas
    explicit Expr(Rational value);

    static Expr symbol(std::string name);

    Kind kind() const noexcept;
    bool is_constant() const noexcept { return kind() == Kind::Constant; }
    bool is_zero() const noexcept;
    bool is_one() const noexcept;

    const Rational& value() const;      // Constant
    const std::string& name() const;    // Variable
    const Rational& exponent() const;   // Power
    const Expr& base() const;           // Power
    const Expr& arg() const;            // Exp, Log
    std::span<const Expr> operands() const;  // Sum, Product (single child for Power/Exp/Log)

    std::size_t hash() const noexcept;
    const Node* identity() const noexcept { return node_.get(); }

    friend bool operator==(const Expr& a, const Expr& b);
    friend std::strong_ordering operator<=>(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;

    friend Expr make_node(Kind, Rational, std::string, std::vector<Expr>);
};

// Canonicalizing constructors.
Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr pow(const Expr& base, const Rational& exponent);
Expr exp(const Expr& arg);
Expr log(const Expr& arg);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr& operator+=(Expr& a, const Expr& b);
Expr& operator*=(Expr& a, const Expr& b);

using Substitution = std::map<std::string, Expr, std::less<>>;

/// Exact partial derivative with respect to `var`, in canonical form.
Expr differentiate(const Expr& e, std::string_view var);

/// Simultaneous substitution of variables, followed by canonicalization.
Expr substitute(const Expr& e, const Substitution& bindings);

/// Distributes products and positive integer powers over sums. Exp and Log
/// arguments are expanded recursively but never rewritten.
Expr expand(const Expr& e);

/// Expands, puts terms over a common polynomial denominator and divides out
/// every denominator factor that divides the numerator exactly. Terms whose
/// denominators do not shrink are left as expand() produced them.
Expr cancel(const Expr& e);

/// Rebuilds `e` bottom-up through the canonical constructors.
Expr canonical(const Expr& e);

std::set<std::string> free_symbols(const Expr& e);
bool depends_on(const Expr& e, std::string_view var);

/// True when e contains no exp/log and only integer exponents.
bool is_rational_function(const Expr& e);
/// True when e is built from constants and variables with +, * and
/// non-negative integer powers only.
bool is_polynomial(const Expr& e);

/// Expressions that must stay away from zero for `e` to be evaluable:
/// bases of negative or fractional powers and arguments of log.
std::vector<Expr> singular_guards(const Expr& e);

/// Numeric binding of symbols to doubles, kept sorted by name.
class Point {
public:
    Point() = default;
    Point(std::initializer_list<std::pair<std::string, double>> values);

    void set(std::string_view name, double value);
    const double* find(std::string_view name) const;
    double at(std::string_view name) const;
    std::span<const std::pair<std::string, double>> entries() const { return values_; }

private:
    std::vector<std::pair<std::string, double>> values_;
};

/// Recursive IEEE evaluation. Throws DomainError for log of a non-positive
/// value, zero raised to a negative power, or a fractional power of a
/// negative value; throws UnboundSymbol for a missing binding.
double evaluate(const Expr& e, const Point& point);

std::string to_string(const Expr& e);
std::string to_string(const Rational& r);
std::ostream& operator<<(std::ostream& os, const Expr& e);

/// Nearest rational with denominator at most `max_den`, if it lies within
/// `tol` of `x`.
bool rationalize(double x, double tol, Rational& out, long max_den = 1000);

double to_double(const Rational& r);

} // namespace sigred

template <>
struct std::hash<sigred::Expr> {
    std::size_t operator()(const sigred::Expr& e) const noexcept { return e.hash(); }
};
