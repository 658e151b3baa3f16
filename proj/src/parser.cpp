#include "sigred/parser.hpp"

#include <cctype>

namespace sigred {

namespace {

class Parser {
public:
    Parser(std::string_view text, const Chart& chart) : text_(text), chart_(chart) {}

    Expr run() {
        Expr e = expr();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    std::string_view text_;
    const Chart& chart_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(pos_, what); }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' before end of input");
            fail(std::string("expected '") + c + "'");
        }
    }

    bool peek_digit() const { return pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])); }

    Expr expr() {
        std::vector<Expr> terms{term()};
        for (;;) {
            if (accept('+')) {
                terms.push_back(term());
            } else if (accept('-')) {
                terms.push_back(-term());
            } else {
                break;
            }
        }
        return sum(std::move(terms));
    }

    // A leading sign applies to the whole product: -a*b is -(a*b).
    Expr term() {
        bool negative = false;
        for (;;) {
            if (accept('-')) {
                negative = !negative;
            } else if (!accept('+')) {
                break;
            }
        }
        std::vector<Expr> factors;
        if (negative) factors.push_back(Expr(-1));
        factors.push_back(factor());
        for (;;) {
            if (accept('*')) {
                factors.push_back(unary());
            } else if (accept('/')) {
                factors.push_back(pow(unary(), Rational(-1)));
            } else {
                break;
            }
        }
        return product(std::move(factors));
    }

    Expr unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return factor();
    }

    Expr factor() {
        Expr base = atom();
        if (!accept('^')) return base;
        bool paren = accept('(');
        Rational k = signed_rational();
        if (paren) expect(')');
        return pow(base, k);
    }

    boost::multiprecision::cpp_int integer() {
        skip_space();
        if (!peek_digit()) fail("expected an integer");
        std::size_t start = pos_;
        while (peek_digit()) ++pos_;
        return boost::multiprecision::cpp_int(std::string(text_.substr(start, pos_ - start)));
    }

    Rational signed_rational() {
        bool negative = false;
        if (accept('-')) {
            negative = true;
        } else {
            accept('+');
        }
        Rational k(integer());
        // An exponent written as p/q is one rational token.
        std::size_t save = pos_;
        if (accept('/')) {
            skip_space();
            if (peek_digit()) {
                auto q = integer();
                if (q == 0) fail("zero denominator in exponent");
                k /= Rational(q);
            } else {
                pos_ = save;
            }
        }
        return negative ? Rational(-k) : k;
    }

    Expr number() {
        std::size_t start = pos_;
        while (peek_digit()) ++pos_;
        std::string digits(text_.substr(start, pos_ - start));
        Rational value{boost::multiprecision::cpp_int(digits)};
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            std::size_t fstart = pos_;
            while (peek_digit()) ++pos_;
            std::string frac(text_.substr(fstart, pos_ - fstart));
            if (!frac.empty()) {
                boost::multiprecision::cpp_int scale = boost::multiprecision::pow(boost::multiprecision::cpp_int(10),
                                                                                  static_cast<unsigned>(frac.size()));
                value += Rational(boost::multiprecision::cpp_int(frac), scale);
            }
        }
        return Expr(value);
    }

    Expr atom() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) return number();
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            std::string name(text_.substr(start, pos_ - start));
            if (name == "exp" || name == "log") {
                std::size_t save = pos_;
                if (accept('(')) {
                    Expr arg = expr();
                    expect(')');
                    return name == "exp" ? exp(arg) : log(arg);
                }
                pos_ = save;
            }
            if (pos_ < text_.size() && text_[pos_] == '\'') {
                ++pos_;
                name += '\'';
            }
            if (!chart_.has(name)) throw UnknownSymbol(name);
            return Expr::symbol(std::move(name));
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

} // namespace

Expr parse(std::string_view text, const Chart& chart) { return Parser(text, chart).run(); }

} // namespace sigred
