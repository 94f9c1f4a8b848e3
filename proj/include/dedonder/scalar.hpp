#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <type_traits>

// Generic scalar layer.  Every geometric formula in this library is written
// once against this contract and reused for plain doubles, truncated Taylor
// series, and (nested) directional duals.
//
// Contract for a scalar type S:
//   - constructible from double, default-constructs to zero
//   - operators + - * / with S and with double, unary -
//   - free functions sqrt, exp, log, sin, cos, ipow(S, int) found by ADL
//   - value(s) -> double: the point value underneath all perturbations

namespace dedonder {

inline double value(double x) { return x; }

// re-export the std entry points so unqualified calls in generic code resolve
// for plain doubles as well as for the library's own scalar types
using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;

template <class S>
S ipow(const S& x, int n) {
    if (n < 0) return S(1.0) / ipow(x, -n);
    S r(1.0);
    S p = x;
    int k = n;
    while (k > 0) {
        if (k & 1) r = r * p;
        p = p * p;
        k >>= 1;
    }
    return r;
}
inline double ipow(double x, int n) {
    if (n < 0) return 1.0 / ipow(x, -n);
    double r = 1.0, p = x;
    int k = n;
    while (k > 0) {
        if (k & 1) r *= p;
        p *= p;
        k >>= 1;
    }
    return r;
}

template <class S>
concept ScalarLike = requires(S a, S b, double c) {
    S(c);
    { a + b } -> std::convertible_to<S>;
    { a - b } -> std::convertible_to<S>;
    { a * b } -> std::convertible_to<S>;
    { a / b } -> std::convertible_to<S>;
    { -a } -> std::convertible_to<S>;
    { a + c } -> std::convertible_to<S>;
    { c * a } -> std::convertible_to<S>;
    { value(a) } -> std::convertible_to<double>;
};

// First-order directional perturbation: v + eps*d with eps^2 = 0.  Nesting
// Dual<Dual<...>> yields higher mixed directional derivatives.
template <class S>
struct Dual {
    S v{};
    S d{};

    Dual() = default;
    Dual(double c) : v(c), d(0.0) {}
    template <class T = S>
        requires(!std::is_same_v<T, double>)
    Dual(const S& c) : v(c), d(0.0) {}
    Dual(const S& v_, const S& d_) : v(v_), d(d_) {}
};

template <class S> Dual<S> operator+(const Dual<S>& a, const Dual<S>& b) { return {a.v + b.v, a.d + b.d}; }
template <class S> Dual<S> operator-(const Dual<S>& a, const Dual<S>& b) { return {a.v - b.v, a.d - b.d}; }
template <class S> Dual<S> operator-(const Dual<S>& a) { return {-a.v, -a.d}; }
template <class S> Dual<S> operator*(const Dual<S>& a, const Dual<S>& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class S> Dual<S> operator/(const Dual<S>& a, const Dual<S>& b) {
    const S q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}

template <class S> Dual<S> operator+(const Dual<S>& a, double c) { return {a.v + c, a.d}; }
template <class S> Dual<S> operator+(double c, const Dual<S>& a) { return {a.v + c, a.d}; }
template <class S> Dual<S> operator-(const Dual<S>& a, double c) { return {a.v - c, a.d}; }
template <class S> Dual<S> operator-(double c, const Dual<S>& a) { return {c - a.v, -a.d}; }
template <class S> Dual<S> operator*(const Dual<S>& a, double c) { return {a.v * c, a.d * c}; }
template <class S> Dual<S> operator*(double c, const Dual<S>& a) { return {a.v * c, a.d * c}; }
template <class S> Dual<S> operator/(const Dual<S>& a, double c) { return {a.v / c, a.d / c}; }
template <class S> Dual<S> operator/(double c, const Dual<S>& a) { return Dual<S>(c) / a; }

// mixed Dual<S> (+) S for nested scalars; the double overloads above cover S = double
template <class S>
    requires(!std::is_same_v<S, double>)
Dual<S> operator+(const Dual<S>& a, const S& b) { return {a.v + b, a.d}; }
template <class S>
    requires(!std::is_same_v<S, double>)
Dual<S> operator+(const S& b, const Dual<S>& a) { return {a.v + b, a.d}; }
template <class S>
    requires(!std::is_same_v<S, double>)
Dual<S> operator-(const Dual<S>& a, const S& b) { return {a.v - b, a.d}; }
template <class S>
    requires(!std::is_same_v<S, double>)
Dual<S> operator-(const S& b, const Dual<S>& a) { return {b - a.v, -a.d}; }
template <class S>
    requires(!std::is_same_v<S, double>)
Dual<S> operator*(const Dual<S>& a, const S& b) { return {a.v * b, a.d * b}; }
template <class S>
    requires(!std::is_same_v<S, double>)
Dual<S> operator*(const S& b, const Dual<S>& a) { return {a.v * b, a.d * b}; }
template <class S>
    requires(!std::is_same_v<S, double>)
Dual<S> operator/(const Dual<S>& a, const S& b) { return {a.v / b, a.d / b}; }
template <class S>
    requires(!std::is_same_v<S, double>)
Dual<S> operator/(const S& b, const Dual<S>& a) { return Dual<S>(b) / a; }

template <class S> Dual<S>& operator+=(Dual<S>& a, const Dual<S>& b) { return a = a + b; }
template <class S> Dual<S>& operator-=(Dual<S>& a, const Dual<S>& b) { return a = a - b; }

template <class S> Dual<S> sqrt(const Dual<S>& a) {
    const S r = sqrt(a.v);
    return {r, a.d / (2.0 * r)};
}
template <class S> Dual<S> exp(const Dual<S>& a) {
    const S e = exp(a.v);
    return {e, a.d * e};
}
template <class S> Dual<S> log(const Dual<S>& a) { return {log(a.v), a.d / a.v}; }
template <class S> Dual<S> sin(const Dual<S>& a) { return {sin(a.v), a.d * cos(a.v)}; }
template <class S> Dual<S> cos(const Dual<S>& a) { return {cos(a.v), -a.d * sin(a.v)}; }

template <class S> double value(const Dual<S>& a) { return value(a.v); }

// Scaled discrepancy used by every comparison check: absolute near zero,
// relative once either operand leaves the unit ball.
inline double scaled_err(double a, double b) {
    const double m = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) / m;
}

} // namespace dedonder
