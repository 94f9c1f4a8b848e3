#pragma once

#include "dedonder/jet.hpp"
#include "dedonder/scalar.hpp"
#include "dedonder/sym.hpp"

#include <array>

// Pointwise pseudo-Riemannian geometry on jet coordinates: everything here is
// a polynomial/rational expression in (y, z1, z2) blocks and works for any
// ScalarLike S, so the same formulas run on numbers, dual layers, and
// truncated series.
//
// Index layout for Christoffel-type containers: [lambda * NPAIR + pair(mu,nu)]
// with the symmetric pair last; fully contravariant third-rank objects use a
// dense [l*16 + m*4 + n] layout.

namespace dedonder {

template <class S>
struct MetricPack {
    Sym2<S> g;
    Sym2<S> ginv;
    S det;
    S sqrtmg; // sqrt(-det g); Lorentzian signature keeps det negative
};

namespace detail {
inline constexpr int kOmit[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};

template <class S>
S minor3(const std::array<std::array<S, 4>, 4>& m, const int* r, const int* c) {
    return m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]]) -
           m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]]) +
           m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]]);
}
} // namespace detail

template <class S>
MetricPack<S> metric_pack(const Sym2<S>& y) {
    std::array<std::array<S, 4>, 4> m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m[i][j] = sym2_at(y, i, j);

    MetricPack<S> p;
    p.g = y;
    p.det = S(0.0);
    for (int j = 0; j < 4; ++j) {
        const S mnr = detail::minor3(m, detail::kOmit[0], detail::kOmit[j]);
        p.det += (j % 2 == 0 ? m[0][j] * mnr : -(m[0][j] * mnr));
    }
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            const S cof = detail::minor3(m, detail::kOmit[j], detail::kOmit[i]);
            sym2_at(p.ginv, i, j) = ((i + j) % 2 == 0 ? cof : -cof) / p.det;
        }
    p.sqrtmg = sqrt(-p.det);
    return p;
}

// ---- Christoffel symbols -------------------------------------------------

template <class S>
std::array<S, NZ1> christoffel_first(const Z1Block<S>& z1) {
    std::array<S, NZ1> G;
    for (int l = 0; l < 4; ++l)
        for (int p = 0; p < NPAIR; ++p) {
            const auto [mu, nu] = kPairs.unpack[p];
            G[l * NPAIR + p] = 0.5 * (z1_at(z1, mu, l, nu) + z1_at(z1, nu, l, mu) -
                                      z1_at(z1, mu, nu, l));
        }
    return G;
}

template <class S>
std::array<S, NZ1> christoffel_second(const Sym2<S>& ginv, const std::array<S, NZ1>& G1) {
    std::array<S, NZ1> G;
    for (int r = 0; r < 4; ++r)
        for (int p = 0; p < NPAIR; ++p) {
            S acc(0.0);
            for (int l = 0; l < 4; ++l) acc += sym2_at(ginv, r, l) * G1[l * NPAIR + p];
            G[r * NPAIR + p] = acc;
        }
    return G;
}

// Fully raised symbols, staged over the two remaining indices.
template <class S>
std::array<S, 64> christoffel_up3(const Sym2<S>& ginv, const std::array<S, NZ1>& G2) {
    std::array<S, 64> B{}; // [l][m][g] = g^{m b} G2[l][b g]
    for (int l = 0; l < 4; ++l)
        for (int m = 0; m < 4; ++m)
            for (int g = 0; g < 4; ++g) {
                S acc(0.0);
                for (int b = 0; b < 4; ++b)
                    acc += sym2_at(ginv, m, b) * G2[l * NPAIR + pair_index(b, g)];
                B[(l * 4 + m) * 4 + g] = acc;
            }
    std::array<S, 64> C{};
    for (int l = 0; l < 4; ++l)
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n) {
                S acc(0.0);
                for (int g = 0; g < 4; ++g) acc += sym2_at(ginv, n, g) * B[(l * 4 + m) * 4 + g];
                C[(l * 4 + m) * 4 + n] = acc;
            }
    return C;
}

// The four distinguished traces.  gamma_up is the inverse-weighted trace of
// the raised symbols, delta_dn the mixed trace; the lowered/raised partners
// follow by moving the free index with the metric.
template <class S>
struct GammaTraces {
    std::array<S, 4> gamma_up; // g^{mu nu} G^l_{mu nu}
    std::array<S, 4> gamma_dn; // g^{mu nu} G_{r mu nu}
    std::array<S, 4> delta_dn; // g^{l nu} G_{l mu nu}
    std::array<S, 4> delta_up; // g^{nu mu} delta_dn[mu]
};

template <class S>
GammaTraces<S> gamma_traces(const Sym2<S>& ginv, const std::array<S, NZ1>& G1,
                            const std::array<S, NZ1>& G2) {
    GammaTraces<S> t;
    for (int l = 0; l < 4; ++l) {
        S a(0.0), b(0.0);
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n) {
                const S& w = sym2_at(ginv, m, n);
                a += w * G2[l * NPAIR + pair_index(m, n)];
                b += w * G1[l * NPAIR + pair_index(m, n)];
            }
        t.gamma_up[l] = a;
        t.gamma_dn[l] = b;
    }
    for (int m = 0; m < 4; ++m) {
        S acc(0.0);
        for (int l = 0; l < 4; ++l)
            for (int n = 0; n < 4; ++n)
                acc += sym2_at(ginv, l, n) * G1[l * NPAIR + pair_index(m, n)];
        t.delta_dn[m] = acc;
    }
    for (int n = 0; n < 4; ++n) {
        S acc(0.0);
        for (int m = 0; m < 4; ++m) acc += sym2_at(ginv, n, m) * t.delta_dn[m];
        t.delta_up[n] = acc;
    }
    return t;
}

// Derivative of the inverse metric expressed through lowered symbols:
// d_c g^{ad} = -g^{am} g^{dn} (G_{m n c} + G_{n m c}).  Layout mirrors Z1.
template <class S>
std::array<S, NZ1> dginv_from_gamma(const Sym2<S>& ginv, const std::array<S, NZ1>& G1) {
    std::array<S, NZ1> D;
    for (int p = 0; p < NPAIR; ++p) {
        const auto [a, d] = kPairs.unpack[p];
        for (int c = 0; c < 4; ++c) {
            S acc(0.0);
            for (int m = 0; m < 4; ++m)
                for (int n = 0; n < 4; ++n)
                    acc += sym2_at(ginv, a, m) * sym2_at(ginv, d, n) *
                           (G1[m * NPAIR + pair_index(n, c)] + G1[n * NPAIR + pair_index(m, c)]);
            D[p * 4 + c] = -acc;
        }
    }
    return D;
}

// d_g of the raised symbols on a jet: chain rule through the inverse metric
// and through the lowered symbols (whose derivative reads z2).
// Layout: [r * NZ1 + pair * 4 + g].
template <class S>
std::array<S, 4 * NZ1> christoffel_second_deriv(const Sym2<S>& ginv,
                                                const std::array<S, NZ1>& dginv,
                                                const std::array<S, NZ1>& G1,
                                                const Z2Block<S>& z2) {
    std::array<S, 4 * NZ1> D;
    for (int r = 0; r < 4; ++r)
        for (int p = 0; p < NPAIR; ++p) {
            const auto [mu, nu] = kPairs.unpack[p];
            for (int g = 0; g < 4; ++g) {
                S acc(0.0);
                for (int l = 0; l < 4; ++l) {
                    const S dG1 = 0.5 * (z2_at(z2, mu, l, nu, g) + z2_at(z2, nu, l, mu, g) -
                                         z2_at(z2, mu, nu, l, g));
                    acc += dginv[pair_index(r, l) * 4 + g] * G1[l * NPAIR + p] +
                           sym2_at(ginv, r, l) * dG1;
                }
                D[r * NZ1 + p * 4 + g] = acc;
            }
        }
    return D;
}

// ---- curvature -----------------------------------------------------------

// R^a_{b c d} = d_c G^a_{b d} - d_d G^a_{b c} + G^a_{m c} G^m_{b d}
//             - G^a_{m d} G^m_{b c}, dense [a][b][c][d].
template <class S>
std::array<S, 256> riemann_up(const std::array<S, NZ1>& G2, const std::array<S, 4 * NZ1>& G2d) {
    std::array<S, 256> R;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    S acc = G2d[a * NZ1 + pair_index(b, d) * 4 + c] -
                            G2d[a * NZ1 + pair_index(b, c) * 4 + d];
                    for (int m = 0; m < 4; ++m)
                        acc += G2[a * NPAIR + pair_index(m, c)] * G2[m * NPAIR + pair_index(b, d)] -
                               G2[a * NPAIR + pair_index(m, d)] * G2[m * NPAIR + pair_index(b, c)];
                    R[((a * 4 + b) * 4 + c) * 4 + d] = acc;
                }
    return R;
}

template <class S>
std::array<S, 16> ricci_from_riemann(const std::array<S, 256>& R) {
    std::array<S, 16> ric{};
    for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 4; ++d) {
            S acc(0.0);
            for (int a = 0; a < 4; ++a) acc += R[((a * 4 + b) * 4 + a) * 4 + d];
            ric[b * 4 + d] = acc;
        }
    return ric;
}

template <class S>
S scalar_from_ricci(const Sym2<S>& ginv, const std::array<S, 16>& ric) {
    S acc(0.0);
    for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 4; ++d) acc += sym2_at(ginv, b, d) * ric[b * 4 + d];
    return acc;
}

struct CurvatureResult {
    template <class S>
    struct T {
        std::array<S, NZ1> dginv;
        std::array<S, 4 * NZ1> G2d;
        std::array<S, 256> riem;
        std::array<S, 16> ricci;
        S scal;
    };
};

template <class S>
typename CurvatureResult::template T<S> curvature(const MetricPack<S>& mp,
                                                  const std::array<S, NZ1>& G1,
                                                  const std::array<S, NZ1>& G2,
                                                  const Z2Block<S>& z2) {
    typename CurvatureResult::template T<S> c;
    c.dginv = dginv_from_gamma(mp.ginv, G1);
    c.G2d = christoffel_second_deriv(mp.ginv, c.dginv, G1, z2);
    c.riem = riemann_up(G2, c.G2d);
    c.ricci = ricci_from_riemann(c.riem);
    c.scal = scalar_from_ricci(mp.ginv, c.ricci);
    return c;
}

// ---- the two first-order scalar aggregates -------------------------------

// Literal six-fold sum: G_{m n l} G_{a b g} (-g^{ma} g^{nl} g^{bg}
//                                            + g^{ma} g^{ng} g^{lb}).
template <class S>
S quad_term_literal(const Sym2<S>& ginv, const std::array<S, NZ1>& G1) {
    S acc(0.0);
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
            for (int l = 0; l < 4; ++l)
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b)
                        for (int g = 0; g < 4; ++g) {
                            const S w = sym2_at(ginv, m, a) *
                                        (sym2_at(ginv, n, g) * sym2_at(ginv, l, b) -
                                         sym2_at(ginv, n, l) * sym2_at(ginv, b, g));
                            acc += G1[m * NPAIR + pair_index(n, l)] *
                                   G1[a * NPAIR + pair_index(b, g)] * w;
                        }
    return acc;
}

// Same aggregate through staged contractions: -G^l G_l + G_{abg} G^{agb}.
template <class S>
S quad_term_staged(const std::array<S, NZ1>& G1, const std::array<S, 64>& up3,
                   const GammaTraces<S>& tr) {
    S acc(0.0);
    for (int l = 0; l < 4; ++l) acc -= tr.gamma_up[l] * tr.gamma_dn[l];
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int g = 0; g < 4; ++g)
                acc += G1[a * NPAIR + pair_index(b, g)] * up3[(a * 4 + g) * 4 + b];
    return acc;
}

// Second-derivative aggregate:
// (1/2) z_{mn ab} (g^{ma} g^{nb} + g^{mb} g^{na} - 2 g^{mn} g^{ab}).
template <class S>
S second_order_term(const Sym2<S>& ginv, const Z2Block<S>& z2) {
    S acc(0.0);
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    acc += 0.5 * z2_at(z2, m, n, a, b) *
                           (sym2_at(ginv, m, a) * sym2_at(ginv, n, b) +
                            sym2_at(ginv, m, b) * sym2_at(ginv, n, a) -
                            2.0 * sym2_at(ginv, m, n) * sym2_at(ginv, a, b));
    return acc;
}

// ---- Einstein tensor density ---------------------------------------------

template <class S>
Sym2<S> einstein_density(const std::array<S, 4>& /*x*/, const Sym2<S>& y, const Z1Block<S>& z1,
                         const Z2Block<S>& z2) {
    const MetricPack<S> mp = metric_pack(y);
    const auto G1 = christoffel_first(z1);
    const auto G2 = christoffel_second(mp.ginv, G1);
    const auto cur = curvature(mp, G1, G2, z2);
    Sym2<S> E;
    for (int p = 0; p < NPAIR; ++p) {
        const auto [m, n] = kPairs.unpack[p];
        S ru(0.0);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                ru += sym2_at(mp.ginv, m, a) * sym2_at(mp.ginv, n, b) * cur.ricci[a * 4 + b];
        E[p] = mp.sqrtmg * (ru - 0.5 * sym2_at(mp.ginv, m, n) * cur.scal);
    }
    return E;
}

// Max over directions of the scaled mismatch between the derivative of the
// volume factor along the jet's derivative coordinates and sqrtmg * delta_b.
inline double grad_volume_residual(const SysJet& j) {
    const MetricPack<double> mp = metric_pack(j.y);
    const auto G1 = christoffel_first(j.z1);
    const auto G2 = christoffel_second(mp.ginv, G1);
    const auto tr = gamma_traces(mp.ginv, G1, G2);
    double worst = 0.0;
    for (int b = 0; b < 4; ++b) {
        Sym2<Dual<double>> y;
        for (int p = 0; p < NPAIR; ++p) y[p] = Dual<double>(j.y[p], j.z1[p * 4 + b]);
        const auto mpd = metric_pack(y);
        worst = std::max(worst, scaled_err(mpd.sqrtmg.d, mp.sqrtmg * tr.delta_dn[b]));
    }
    return worst;
}

} // namespace dedonder
