#pragma once

// Small arithmetic expression language for model files:
//   numbers, x, y, t, pi, + - * / ^, parentheses,
//   sin cos tan exp log sqrt abs.

#include "sphs/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>

namespace sphs {

struct ExprVars {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
};

class Expression {
public:
    using Fn = std::function<double(const ExprVars&)>;

    Expression()
        : text_("0")
        , fn_([](const ExprVars&) { return 0.0; })
    {
    }

    static Expression parse(const std::string& text)
    {
        Parser p{text, 0};
        Fn f = p.expr();
        p.skip();
        if (p.pos != text.size()) {
            throw Error("unexpected '" + text.substr(p.pos, 1) + "' at position " + std::to_string(p.pos) + " in '"
                        + text + "'");
        }
        Expression e;
        e.text_ = text;
        e.fn_ = std::move(f);
        return e;
    }

    double operator()(const ExprVars& v) const { return fn_(v); }
    double operator()(double x, double y, double t) const { return fn_(ExprVars{x, y, t}); }
    const std::string& text() const noexcept { return text_; }

private:
    struct Parser {
        const std::string& s;
        std::size_t pos;

        void skip()
        {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) {
                ++pos;
            }
        }

        bool eat(char c)
        {
            skip();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        [[noreturn]] void fail(const std::string& what) const
        {
            throw Error(what + " at position " + std::to_string(pos) + " in '" + s + "'");
        }

        Fn expr()
        {
            Fn lhs = term();
            for (;;) {
                if (eat('+')) {
                    Fn rhs = term();
                    lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) + rhs(v); };
                } else if (eat('-')) {
                    Fn rhs = term();
                    lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) - rhs(v); };
                } else {
                    return lhs;
                }
            }
        }

        Fn term()
        {
            Fn lhs = unary();
            for (;;) {
                if (eat('*')) {
                    Fn rhs = unary();
                    lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) * rhs(v); };
                } else if (eat('/')) {
                    Fn rhs = unary();
                    lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) / rhs(v); };
                } else {
                    return lhs;
                }
            }
        }

        Fn unary()
        {
            if (eat('-')) {
                Fn a = unary();
                return [a](const ExprVars& v) { return -a(v); };
            }
            if (eat('+')) {
                return unary();
            }
            return power();
        }

        Fn power()
        {
            Fn base = primary();
            if (eat('^')) {
                Fn ex = unary();
                return [base, ex](const ExprVars& v) { return std::pow(base(v), ex(v)); };
            }
            return base;
        }

        Fn primary()
        {
            skip();
            if (pos >= s.size()) {
                fail("unexpected end of expression");
            }
            if (eat('(')) {
                Fn e = expr();
                if (!eat(')')) {
                    fail("expected ')'");
                }
                return e;
            }
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = s.c_str() + pos;
                char* end = nullptr;
                const double value = std::strtod(begin, &end);
                if (end == begin) {
                    fail("bad number");
                }
                pos += static_cast<std::size_t>(end - begin);
                return [value](const ExprVars&) { return value; };
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::size_t start = pos;
                while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) {
                    ++pos;
                }
                const std::string name = s.substr(start, pos - start);
                if (name == "x") {
                    return [](const ExprVars& v) { return v.x; };
                }
                if (name == "y") {
                    return [](const ExprVars& v) { return v.y; };
                }
                if (name == "t") {
                    return [](const ExprVars& v) { return v.t; };
                }
                if (name == "pi") {
                    return [](const ExprVars&) { return std::numbers::pi; };
                }
                double (*fn)(double) = nullptr;
                if (name == "sin") {
                    fn = [](double a) { return std::sin(a); };
                } else if (name == "cos") {
                    fn = [](double a) { return std::cos(a); };
                } else if (name == "tan") {
                    fn = [](double a) { return std::tan(a); };
                } else if (name == "exp") {
                    fn = [](double a) { return std::exp(a); };
                } else if (name == "log") {
                    fn = [](double a) { return std::log(a); };
                } else if (name == "sqrt") {
                    fn = [](double a) { return std::sqrt(a); };
                } else if (name == "abs") {
                    fn = [](double a) { return std::abs(a); };
                } else {
                    pos = start;
                    fail("unknown name '" + name + "'");
                }
                if (!eat('(')) {
                    fail("expected '(' after " + name);
                }
                Fn arg = expr();
                if (!eat(')')) {
                    fail("expected ')'");
                }
                return [fn, arg](const ExprVars& v) { return fn(arg(v)); };
            }
            fail(std::string("unexpected '") + c + "'");
        }
    };

    std::string text_;
    Fn fn_;
};

} // namespace sphs
