#pragma once

#include "dedonder/scalar.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>

// Dense truncated multivariate Taylor arithmetic in 4 base variables, graded
// ordering, maximum total degree 4 (70 coefficients).  The coefficient stored
// for multi-index m is the mixed partial divided by m!, so products are plain
// truncated polynomial products.  Each value carries its own truncation order;
// binary operations truncate to the smaller operand's order, and constants are
// created at full order so they never throttle a computation.

namespace dedonder {

inline constexpr int TMAX = 4;     // highest supported truncation order
inline constexpr int TTERMS = 70;  // multi-indices of degree <= 4 in 4 vars

struct TaylorTables {
    std::array<std::array<std::uint8_t, 4>, TTERMS> mi{};
    std::array<std::uint8_t, TTERMS> deg{};
    std::array<double, TTERMS> mfact{};           // m!
    std::array<int, TMAX + 2> nterms{};           // #terms of degree <= k
    std::array<std::int16_t, TTERMS * TTERMS> sum{};  // rank of mi[i]+mi[j], -1 past TMAX
    std::array<std::int16_t, 5 * 5 * 5 * 5> rank{};   // exponent tuple -> term rank
};

inline const TaylorTables& ttab() {
    static const TaylorTables t = [] {
        TaylorTables tt;
        int n = 0;
        for (int d = 0; d <= TMAX; ++d) {
            for (int m0 = d; m0 >= 0; --m0)
                for (int m1 = d - m0; m1 >= 0; --m1)
                    for (int m2 = d - m0 - m1; m2 >= 0; --m2) {
                        const int m3 = d - m0 - m1 - m2;
                        tt.mi[n] = {static_cast<std::uint8_t>(m0), static_cast<std::uint8_t>(m1),
                                    static_cast<std::uint8_t>(m2), static_cast<std::uint8_t>(m3)};
                        tt.deg[n] = static_cast<std::uint8_t>(d);
                        double f = 1.0;
                        for (int v : {m0, m1, m2, m3})
                            for (int k = 2; k <= v; ++k) f *= k;
                        tt.mfact[n] = f;
                        ++n;
                    }
            tt.nterms[d] = n;
        }
        tt.nterms[TMAX + 1] = n;
        for (auto& r : tt.rank) r = -1;
        for (int i = 0; i < TTERMS; ++i) {
            const auto& m = tt.mi[i];
            tt.rank[((m[0] * 5 + m[1]) * 5 + m[2]) * 5 + m[3]] = static_cast<std::int16_t>(i);
        }
        for (int i = 0; i < TTERMS; ++i)
            for (int j = 0; j < TTERMS; ++j) {
                const int s0 = tt.mi[i][0] + tt.mi[j][0], s1 = tt.mi[i][1] + tt.mi[j][1];
                const int s2 = tt.mi[i][2] + tt.mi[j][2], s3 = tt.mi[i][3] + tt.mi[j][3];
                tt.sum[i * TTERMS + j] =
                    (s0 + s1 + s2 + s3 > TMAX) ? std::int16_t(-1)
                                               : tt.rank[((s0 * 5 + s1) * 5 + s2) * 5 + s3];
            }
        return tt;
    }();
    return t;
}

struct Taylor {
    int ord = TMAX;
    std::array<double, TTERMS> c{};

    Taylor() = default;
    Taylor(double v) { c[0] = v; }

    double val() const { return c[0]; }
};

inline double value(const Taylor& a) { return a.c[0]; }

inline Taylor taylor_var(double v, int axis, int order) {
    Taylor t;
    t.ord = order;
    t.c[0] = v;
    if (order >= 1) t.c[1 + axis] = 1.0;
    return t;
}

inline Taylor truncated(const Taylor& a, int order) {
    Taylor r;
    r.ord = order < a.ord ? order : a.ord;
    const int n = ttab().nterms[r.ord];
    for (int i = 0; i < n; ++i) r.c[i] = a.c[i];
    return r;
}

inline Taylor operator+(const Taylor& a, const Taylor& b) {
    Taylor r;
    r.ord = a.ord < b.ord ? a.ord : b.ord;
    const int n = ttab().nterms[r.ord];
    for (int i = 0; i < n; ++i) r.c[i] = a.c[i] + b.c[i];
    return r;
}
inline Taylor operator-(const Taylor& a, const Taylor& b) {
    Taylor r;
    r.ord = a.ord < b.ord ? a.ord : b.ord;
    const int n = ttab().nterms[r.ord];
    for (int i = 0; i < n; ++i) r.c[i] = a.c[i] - b.c[i];
    return r;
}
inline Taylor operator-(const Taylor& a) {
    Taylor r;
    r.ord = a.ord;
    const int n = ttab().nterms[r.ord];
    for (int i = 0; i < n; ++i) r.c[i] = -a.c[i];
    return r;
}
inline Taylor operator*(const Taylor& a, const Taylor& b) {
    const auto& tt = ttab();
    Taylor r;
    r.ord = a.ord < b.ord ? a.ord : b.ord;
    const int na = tt.nterms[r.ord];
    for (int i = 0; i < na; ++i) {
        const double ai = a.c[i];
        if (ai == 0.0) continue;
        const int nb = tt.nterms[r.ord - tt.deg[i]];
        const std::int16_t* row = &tt.sum[i * TTERMS];
        for (int j = 0; j < nb; ++j) r.c[row[j]] += ai * b.c[j];
    }
    return r;
}

inline Taylor& operator+=(Taylor& a, const Taylor& b) { return a = a + b; }
inline Taylor& operator-=(Taylor& a, const Taylor& b) { return a = a - b; }

inline Taylor operator+(const Taylor& a, double s) { Taylor r = a; r.c[0] += s; return r; }
inline Taylor operator+(double s, const Taylor& a) { return a + s; }
inline Taylor operator-(const Taylor& a, double s) { Taylor r = a; r.c[0] -= s; return r; }
inline Taylor operator-(double s, const Taylor& a) { return -(a - s); }
inline Taylor operator*(const Taylor& a, double s) {
    Taylor r;
    r.ord = a.ord;
    const int n = ttab().nterms[r.ord];
    for (int i = 0; i < n; ++i) r.c[i] = a.c[i] * s;
    return r;
}
inline Taylor operator*(double s, const Taylor& a) { return a * s; }
inline Taylor operator/(const Taylor& a, double s) { return a * (1.0 / s); }

inline constexpr double kTinyConst = 1e-13;  // constant-part guard for / ln sqrt

// f(a) for analytic f given the scaled derivatives f^(k)(a0)/k!, via Horner on
// the zero-constant part of a.
inline Taylor taylor_compose(const double (&fc)[TMAX + 1], const Taylor& a) {
    Taylor h = a;
    h.c[0] = 0.0;
    Taylor r(fc[a.ord]);
    for (int k = a.ord - 1; k >= 0; --k) {
        r = r * h;
        r.c[0] += fc[k];
    }
    r.ord = a.ord;
    return r;
}

inline Taylor inverse(const Taylor& a) {
    const double a0 = a.c[0];
    if (a0 > -kTinyConst && a0 < kTinyConst)
        throw std::domain_error("taylor: reciprocal of series with vanishing constant part");
    double fc[TMAX + 1];
    fc[0] = 1.0 / a0;
    for (int k = 1; k <= TMAX; ++k) fc[k] = -fc[k - 1] / a0;
    return taylor_compose(fc, a);
}
inline Taylor operator/(const Taylor& a, const Taylor& b) { return a * inverse(b); }
inline Taylor operator/(double s, const Taylor& b) { return inverse(b) * s; }

inline Taylor sqrt(const Taylor& a) {
    const double a0 = a.c[0];
    if (a0 < kTinyConst)
        throw std::domain_error("taylor: sqrt needs a positive constant part");
    double fc[TMAX + 1];
    fc[0] = std::sqrt(a0);
    for (int k = 1; k <= TMAX; ++k) fc[k] = fc[k - 1] * (1.5 / k - 1.0) / a0;
    return taylor_compose(fc, a);
}
inline Taylor exp(const Taylor& a) {
    double fc[TMAX + 1];
    fc[0] = std::exp(a.c[0]);
    for (int k = 1; k <= TMAX; ++k) fc[k] = fc[k - 1] / k;
    return taylor_compose(fc, a);
}
inline Taylor log(const Taylor& a) {
    const double a0 = a.c[0];
    if (a0 < kTinyConst)
        throw std::domain_error("taylor: log needs a positive constant part");
    double fc[TMAX + 1];
    fc[0] = std::log(a0);
    double p = 1.0;
    for (int k = 1; k <= TMAX; ++k) {
        p /= a0;
        fc[k] = (k % 2 ? p : -p) / k;
    }
    return taylor_compose(fc, a);
}
inline Taylor sin(const Taylor& a) {
    const double s = std::sin(a.c[0]), co = std::cos(a.c[0]);
    const double cyc[4] = {s, co, -s, -co};
    double fc[TMAX + 1];
    double kf = 1.0;
    for (int k = 0; k <= TMAX; ++k) {
        if (k > 1) kf *= k;
        fc[k] = cyc[k % 4] / (k > 1 ? kf : 1.0);
    }
    return taylor_compose(fc, a);
}
inline Taylor cos(const Taylor& a) {
    const double s = std::sin(a.c[0]), co = std::cos(a.c[0]);
    const double cyc[4] = {co, -s, -co, s};
    double fc[TMAX + 1];
    double kf = 1.0;
    for (int k = 0; k <= TMAX; ++k) {
        if (k > 1) kf *= k;
        fc[k] = cyc[k % 4] / (k > 1 ? kf : 1.0);
    }
    return taylor_compose(fc, a);
}

// Formal partial derivative with respect to base variable `axis`; drops one order.
inline Taylor series_derivative(const Taylor& a, int axis) {
    if (a.ord < 1) throw std::domain_error("taylor: series_derivative needs order >= 1");
    const auto& tt = ttab();
    Taylor r;
    r.ord = a.ord - 1;
    const int n = tt.nterms[r.ord];
    for (int i = 0; i < n; ++i) {
        auto m = tt.mi[i];
        m[axis] += 1;
        const int src = tt.rank[((m[0] * 5 + m[1]) * 5 + m[2]) * 5 + m[3]];
        r.c[i] = a.c[src] * m[axis];
    }
    return r;
}

// Coefficient / mixed partial for a multi-index (exponents per axis).
inline double taylor_coeff(const Taylor& a, const std::array<int, 4>& m) {
    const int r = ttab().rank[((m[0] * 5 + m[1]) * 5 + m[2]) * 5 + m[3]];
    if (r < 0 || ttab().deg[r] > a.ord)
        throw std::domain_error("taylor: coefficient beyond truncation order");
    return a.c[r];
}
inline double taylor_partial(const Taylor& a, const std::array<int, 4>& m) {
    const int r = ttab().rank[((m[0] * 5 + m[1]) * 5 + m[2]) * 5 + m[3]];
    if (r < 0 || ttab().deg[r] > a.ord)
        throw std::domain_error("taylor: partial beyond truncation order");
    return a.c[r] * ttab().mfact[r];
}

// Evaluate f on identity seeds around x0; f maps 4 scalars to whatever it likes.
template <class F>
auto taylor_lift(F&& f, const std::array<double, 4>& x0, int order) {
    std::array<Taylor, 4> seeds;
    for (int i = 0; i < 4; ++i) seeds[i] = taylor_var(x0[i], i, order);
    return f(seeds);
}

} // namespace dedonder
