#pragma once

#include "dedonder/expr.hpp"

#include <array>
#include <cstdint>
#include <random>

// Deterministic sampling utilities.  All randomness flows through Rng, whose
// mapping from engine words to values is pinned here so identical seeds give
// identical streams on every platform.

namespace dedonder {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}

    double unit() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * unit(); }
    int uniform_int(int a, int b) {  // inclusive bounds
        return a + static_cast<int>(g_() % static_cast<std::uint64_t>(b - a + 1));
    }
    std::uint64_t word() { return g_(); }

  private:
    std::mt19937_64 g_;
};

// Random analytic expression in x1..x4, shaped to stay tame on the sampling
// box: leaves are scaled coordinates or constants, ln/sqrt arguments are
// shifted positive, divisors are shifted away from zero.
inline ExprPtr random_expr(Rng& rng, int depth = 3) {
    if (depth <= 0 || rng.unit() < 0.2) {
        if (rng.unit() < 0.55) return make_var(rng.uniform_int(0, 3));
        return make_num(rng.uniform(-2.0, 2.0));
    }
    switch (rng.uniform_int(0, 8)) {
        case 0: return make_binary(ExprKind::Add, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 1: return make_binary(ExprKind::Sub, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 2: return make_binary(ExprKind::Mul, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 3: {  // divisor kept away from zero: d = 3 + s^2
            ExprPtr den = make_binary(
                ExprKind::Add, make_num(3.0),
                make_pow(random_expr(rng, depth - 2 < 0 ? 0 : depth - 2), 2));
            return make_binary(ExprKind::Div, random_expr(rng, depth - 1), den);
        }
        case 4: return make_pow(random_expr(rng, depth - 1), rng.uniform_int(1, 3));
        case 5: {  // positive argument: 2 + sin(s)
            ExprPtr arg = make_binary(ExprKind::Add, make_num(2.0),
                                      make_unary(ExprKind::Sin, random_expr(rng, depth - 1)));
            return make_unary(rng.unit() < 0.5 ? ExprKind::Sqrt : ExprKind::Log, arg);
        }
        case 6: return make_unary(ExprKind::Sin, random_expr(rng, depth - 1));
        case 7: return make_unary(ExprKind::Cos, random_expr(rng, depth - 1));
        default: {  // bounded exponential: exp(sin(s))
            return make_unary(ExprKind::Exp, make_unary(ExprKind::Sin, random_expr(rng, depth - 1)));
        }
    }
}

// Iterated central differences with two Richardson extrapolation levels.
// Error is O(h^6) truncation plus roundoff growing like eps / h^|m|.
template <class F>
double central_diff(F&& f, std::array<double, 4> x, std::array<int, 4> m, double h) {
    int ax = -1;
    for (int i = 0; i < 4; ++i)
        if (m[i] > 0) { ax = i; break; }
    if (ax < 0) return f(x);
    auto md = m;
    md[ax] -= 1;
    auto xp = x, xm = x;
    xp[ax] += h;
    xm[ax] -= h;
    return (central_diff(f, xp, md, h) - central_diff(f, xm, md, h)) / (2.0 * h);
}

template <class F>
double richardson_partial(F&& f, const std::array<double, 4>& x, const std::array<int, 4>& m,
                          double h = 0.08) {
    const double a0 = central_diff(f, x, m, h);
    const double a1 = central_diff(f, x, m, h / 2.0);
    const double a2 = central_diff(f, x, m, h / 4.0);
    const double b0 = (4.0 * a1 - a0) / 3.0;
    const double b1 = (4.0 * a2 - a1) / 3.0;
    return (16.0 * b1 - b0) / 15.0;
}

} // namespace dedonder
