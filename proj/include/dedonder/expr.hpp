#pragma once

#include "dedonder/scalar.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

// Small analytic-expression language for metric components, map components,
// scalar fields, and potentials.
//
//   expr   := term (('+'|'-') term)*          left associative
//   term   := factor (('*'|'/') factor)*      left associative
//   factor := '-' factor | power
//   power  := primary ('^' int)?              int in [-9, 9]
//   primary:= number | 'x1'..'x4' | 't' | fn '(' expr ')' | '(' expr ')'
//   fn     := sqrt | exp | ln | sin | cos
//
// '^' binds tighter than unary minus: -x1^2 is -(x1^2).

namespace dedonder {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Sqrt, Exp, Log, Sin, Cos };

// var slots 0..3 are the base coordinates x1..x4; slot 4 is the field value t.
inline constexpr int VAR_T = 4;

struct Expr {
    ExprKind kind;
    double num = 0.0;
    int var = -1;
    int exponent = 0;
    ExprPtr a, b;
};

inline ExprPtr make_num(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Num;
    e->num = v;
    return e;
}
inline ExprPtr make_var(int slot) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Var;
    e->var = slot;
    return e;
}
inline ExprPtr make_unary(ExprKind k, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(a);
    return e;
}
inline ExprPtr make_binary(ExprKind k, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}
inline ExprPtr make_pow(ExprPtr a, int n) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Pow;
    e->a = std::move(a);
    e->exponent = n;
    return e;
}

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(std::size_t off, const std::string& what)
        : std::runtime_error("parse error at byte " + std::to_string(off) + ": " + what), offset(off) {}
};

namespace detail {

struct Parser {
    std::string_view src;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t')) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos, msg); }

    ExprPtr parse_expr() {
        ExprPtr lhs = parse_term();
        for (;;) {
            skip_ws();
            if (eat('+')) lhs = make_binary(ExprKind::Add, lhs, parse_term());
            else if (eat('-')) lhs = make_binary(ExprKind::Sub, lhs, parse_term());
            else return lhs;
        }
    }
    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        for (;;) {
            skip_ws();
            if (eat('*')) lhs = make_binary(ExprKind::Mul, lhs, parse_factor());
            else if (eat('/')) lhs = make_binary(ExprKind::Div, lhs, parse_factor());
            else return lhs;
        }
    }
    ExprPtr parse_factor() {
        skip_ws();
        if (eat('-')) {
            ExprPtr f = parse_factor();
            // negated literals are literals, so printing round-trips structurally
            if (f->kind == ExprKind::Num) return make_num(-f->num);
            return make_unary(ExprKind::Neg, f);
        }
        return parse_power();
    }
    ExprPtr parse_power() {
        ExprPtr base = parse_primary();
        skip_ws();
        if (!eat('^')) return base;
        skip_ws();
        const std::size_t at = pos;
        bool neg = false;
        if (pos < src.size() && src[pos] == '-') {
            neg = true;
            ++pos;
        }
        if (pos >= src.size() || !std::isdigit(static_cast<unsigned char>(src[pos])))
            throw ParseError(at, "integer exponent expected after '^'");
        long v = 0;
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
            v = v * 10 + (src[pos] - '0');
            if (v > 99) break;
            ++pos;
        }
        if (neg) v = -v;
        if (v < -9 || v > 9) throw ParseError(at, "exponent out of range [-9, 9]");
        return make_pow(base, static_cast<int>(v));
    }
    ExprPtr parse_primary() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of expression");
        const char c = src[pos];
        if (c == '(') {
            ++pos;
            ExprPtr e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        fail(std::string("unexpected character '") + c + "'");
    }
    ExprPtr parse_number() {
        const char* begin = src.data() + pos;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos += static_cast<std::size_t>(end - begin);
        return make_num(v);
    }
    ExprPtr parse_ident() {
        const std::size_t at = pos;
        std::size_t n = pos;
        while (n < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[n])) || src[n] == '_'))
            ++n;
        const std::string_view id = src.substr(pos, n - pos);
        pos = n;
        if (id == "t") return make_var(VAR_T);
        if (id.size() == 2 && id[0] == 'x' && id[1] >= '1' && id[1] <= '4')
            return make_var(id[1] - '1');
        ExprKind k;
        if (id == "sqrt") k = ExprKind::Sqrt;
        else if (id == "exp") k = ExprKind::Exp;
        else if (id == "ln") k = ExprKind::Log;
        else if (id == "sin") k = ExprKind::Sin;
        else if (id == "cos") k = ExprKind::Cos;
        else throw ParseError(at, "unknown identifier '" + std::string(id) + "'");
        if (!eat('(')) fail("expected '(' after function name");
        ExprPtr arg = parse_expr();
        if (!eat(')')) fail("expected ')'");
        return make_unary(k, arg);
    }
};

} // namespace detail

inline ExprPtr parse_expr(std::string_view src) {
    detail::Parser p{src};
    ExprPtr e = p.parse_expr();
    p.skip_ws();
    if (p.pos != src.size()) p.fail("trailing input");
    return e;
}

// ---- generic evaluation --------------------------------------------------

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class S>
S eval_expr(const Expr& e, const std::array<S, 4>& x, const S* t = nullptr) {
    switch (e.kind) {
        case ExprKind::Num: return S(e.num);
        case ExprKind::Var:
            if (e.var == VAR_T) {
                if (!t) throw EvalError("expression uses 't' but no field value was supplied");
                return *t;
            }
            return x[e.var];
        case ExprKind::Neg: return -eval_expr(*e.a, x, t);
        case ExprKind::Add: return eval_expr(*e.a, x, t) + eval_expr(*e.b, x, t);
        case ExprKind::Sub: return eval_expr(*e.a, x, t) - eval_expr(*e.b, x, t);
        case ExprKind::Mul: return eval_expr(*e.a, x, t) * eval_expr(*e.b, x, t);
        case ExprKind::Div: return eval_expr(*e.a, x, t) / eval_expr(*e.b, x, t);
        case ExprKind::Pow: return ipow(eval_expr(*e.a, x, t), e.exponent);
        case ExprKind::Sqrt: return sqrt(eval_expr(*e.a, x, t));
        case ExprKind::Exp: return exp(eval_expr(*e.a, x, t));
        case ExprKind::Log: return log(eval_expr(*e.a, x, t));
        case ExprKind::Sin: return sin(eval_expr(*e.a, x, t));
        case ExprKind::Cos: return cos(eval_expr(*e.a, x, t));
    }
    throw EvalError("corrupt expression node");
}

// ---- canonical printing --------------------------------------------------
// parse(print(e)) reproduces e node for node; parentheses are emitted only
// where the grammar would otherwise rebind operands.

namespace detail {

inline int prec(ExprKind k) {
    switch (k) {
        case ExprKind::Add:
        case ExprKind::Sub: return 1;
        case ExprKind::Mul:
        case ExprKind::Div: return 2;
        case ExprKind::Neg: return 3;
        case ExprKind::Pow: return 4;
        default: return 5;
    }
}

inline void print_num(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // trim to the shortest representation that round-trips
    for (int prec17 = 1; prec17 <= 17; ++prec17) {
        char trial[40];
        std::snprintf(trial, sizeof trial, "%.*g", prec17, v);
        double back = 0.0;
        std::sscanf(trial, "%lf", &back);
        if (back == v) {
            out += trial;
            return;
        }
    }
    out += buf;
}

inline void print_fixed(std::string& out, const Expr& e, int min_prec) {
    // a negative literal prints with a leading '-', so it binds like unary minus
    const int p = (e.kind == ExprKind::Num && std::signbit(e.num)) ? prec(ExprKind::Neg)
                                                                   : prec(e.kind);
    const bool parens = p < min_prec;
    if (parens) out += '(';
    switch (e.kind) {
        case ExprKind::Num: print_num(out, e.num); break;
        case ExprKind::Var: out += (e.var == VAR_T) ? "t" : std::string("x") + char('1' + e.var); break;
        case ExprKind::Neg:
            out += '-';
            print_fixed(out, *e.a, 3);
            break;
        case ExprKind::Add:
        case ExprKind::Sub:
            print_fixed(out, *e.a, 1);
            out += (e.kind == ExprKind::Add) ? '+' : '-';
            print_fixed(out, *e.b, 2);
            break;
        case ExprKind::Mul:
        case ExprKind::Div:
            print_fixed(out, *e.a, 2);
            out += (e.kind == ExprKind::Mul) ? '*' : '/';
            print_fixed(out, *e.b, 3);
            break;
        case ExprKind::Pow:
            print_fixed(out, *e.a, 5);
            out += '^';
            out += std::to_string(e.exponent);
            break;
        default: {
            const char* name = e.kind == ExprKind::Sqrt ? "sqrt"
                               : e.kind == ExprKind::Exp ? "exp"
                               : e.kind == ExprKind::Log ? "ln"
                               : e.kind == ExprKind::Sin ? "sin"
                                                         : "cos";
            out += name;
            out += '(';
            print_fixed(out, *e.a, 0);
            out += ')';
            break;
        }
    }
    if (parens) out += ')';
}
} // namespace detail

inline std::string print_expr(const Expr& e) {
    std::string out;
    detail::print_fixed(out, e, 0);
    return out;
}

} // namespace dedonder
