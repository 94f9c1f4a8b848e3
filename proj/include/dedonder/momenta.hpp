#pragma once

#include "dedonder/jet.hpp"
#include "dedonder/lagrangian.hpp"
#include "dedonder/geometry.hpp"
#include "dedonder/scalar.hpp"
#include "dedonder/sym.hpp"
#include "dedonder/taylor.hpp"

#include <array>

// Higher-order multimomenta of a second-order Lagrangian, three ways:
//   * on an arbitrary jet, by differentiating the density with nested dual
//     layers (the total divergence entering the lower momentum is the literal
//     four-term chain over the stored jet coordinates);
//   * in closed form for the gravity density;
//   * along a section, where every object becomes a truncated series in the
//     base coordinates and total derivatives become series derivatives.
//
// Index convention: stored slots always hold FULL-index tensor values (the
// symmetrized-derivative convention divides each plain partial by the orbit
// size of its stored coordinate).

namespace dedonder {

template <class S>
struct Momenta {
    Z1Block<S> p3{};        // p^{mu nu | a}
    Z2Block<S> p4{};        // p^{mu nu | a b}
    std::array<S, 4> q{};   // field momentum, when the system carries a field
};

// Wrap every component in a dual layer with zero derivative part.
template <class U>
SysJetT<Dual<U>> lift_jet(const SysJetT<U>& j) {
    SysJetT<Dual<U>> d;
    for (int i = 0; i < 4; ++i) d.x[i] = Dual<U>(j.x[i]);
    for (int p = 0; p < NPAIR; ++p) d.y[p] = Dual<U>(j.y[p]);
    for (int i = 0; i < NZ1; ++i) d.z1[i] = Dual<U>(j.z1[i]);
    for (int i = 0; i < NZ2; ++i) d.z2[i] = Dual<U>(j.z2[i]);
    for (int i = 0; i < NZ3; ++i) d.z3[i] = Dual<U>(j.z3[i]);
    d.order = j.order;
    d.has_field = j.has_field;
    d.t = Dual<U>(j.t);
    for (int i = 0; i < 4; ++i) d.tz[i] = Dual<U>(j.tz[i]);
    for (int p = 0; p < NPAIR; ++p) d.tz2[p] = Dual<U>(j.tz2[p]);
    return d;
}

// Dual lift whose derivative parts carry the total-derivative direction along
// x^b: each stored coordinate moves to its next derivative level.  Summing a
// function's dual derivative over these lifts realizes the total divergence.
template <class U>
SysJetT<Dual<U>> total_direction_lift(const SysJetT<U>& j, int b) {
    SysJetT<Dual<U>> d = lift_jet(j);
    d.x[b].d = U(1.0);
    for (int p = 0; p < NPAIR; ++p) {
        d.y[p].d = j.z1[p * DIM + b];
        for (int a = 0; a < 4; ++a) d.z1[p * DIM + a].d = j.z2[p * NPAIR + pair_index(a, b)];
        for (int q = 0; q < NPAIR; ++q) {
            const auto [s, t] = kPairs.unpack[q];
            d.z2[p * NPAIR + q].d = j.z3[p * NTRI + triple_index(s, t, b)];
        }
    }
    if (j.has_field) {
        d.t.d = j.tz[b];
        for (int m = 0; m < 4; ++m) d.tz[m].d = j.tz2[pair_index(m, b)];
    }
    return d;
}

// ---- plain symmetrized partials ------------------------------------------

template <class S>
Sym2<S> dL_dy(const Lagrangian& L, const SysJetT<S>& j) {
    Sym2<S> out;
    SysJetT<Dual<S>> d = lift_jet(j);
    for (int p = 0; p < NPAIR; ++p) {
        d.y[p].d = S(1.0);
        out[p] = L.eval(d).d / double(y_orbit(p));
        d.y[p].d = S(0.0);
    }
    return out;
}

template <class S>
Z1Block<S> dL_dz1(const Lagrangian& L, const SysJetT<S>& j) {
    Z1Block<S> out;
    SysJetT<Dual<S>> d = lift_jet(j);
    for (int i = 0; i < NZ1; ++i) {
        d.z1[i].d = S(1.0);
        out[i] = L.eval(d).d / double(z1_orbit(i));
        d.z1[i].d = S(0.0);
    }
    return out;
}

template <class S>
Z2Block<S> dL_dz2(const Lagrangian& L, const SysJetT<S>& j) {
    Z2Block<S> out;
    SysJetT<Dual<S>> d = lift_jet(j);
    for (int i = 0; i < NZ2; ++i) {
        d.z2[i].d = S(1.0);
        out[i] = L.eval(d).d / double(z2_orbit(i));
        d.z2[i].d = S(0.0);
    }
    return out;
}

template <class S>
std::array<S, 4> dL_dtz(const Lagrangian& L, const SysJetT<S>& j) {
    std::array<S, 4> out;
    SysJetT<Dual<S>> d = lift_jet(j);
    for (int m = 0; m < 4; ++m) {
        d.tz[m].d = S(1.0);
        out[m] = L.eval(d).d;
        d.tz[m].d = S(0.0);
    }
    return out;
}

template <class S>
S dL_dt(const Lagrangian& L, const SysJetT<S>& j) {
    SysJetT<Dual<S>> d = lift_jet(j);
    d.t.d = S(1.0);
    return L.eval(d).d;
}

// ---- divergence of the top momentum on a jet -----------------------------

// All directional pieces D_b p^{mu nu | a b} (no sum), laid out
// [(pair * 4 + a) * 4 + b].  Each entry is one density evaluation with an
// outer total-derivative layer and an inner coordinate seed.
template <class S>
std::array<S, NPAIR * 16> p4_divergence_terms(const Lagrangian& L, const SysJetT<S>& j) {
    std::array<S, NPAIR * 16> out;
    for (int b = 0; b < 4; ++b) {
        const SysJetT<Dual<S>> jb = total_direction_lift(j, b);
        SysJetT<Dual<Dual<S>>> dd = lift_jet(jb);
        for (int p = 0; p < NPAIR; ++p)
            for (int a = 0; a < 4; ++a) {
                const int c = p * NPAIR + pair_index(a, b);
                dd.z2[c].d = Dual<S>(S(1.0));
                out[(p * 4 + a) * 4 + b] = L.eval(dd).d.d / double(z2_orbit(c));
                dd.z2[c].d = Dual<S>(S(0.0));
            }
    }
    return out;
}

template <class S>
Momenta<S> momenta_on_jet(const Lagrangian& L, const SysJetT<S>& j) {
    Momenta<S> m;
    m.p4 = dL_dz2(L, j);
    const Z1Block<S> dz1 = dL_dz1(L, j);
    const auto div = p4_divergence_terms(L, j);
    for (int p = 0; p < NPAIR; ++p)
        for (int a = 0; a < 4; ++a) {
            S acc = dz1[p * DIM + a];
            for (int b = 0; b < 4; ++b) acc -= div[(p * 4 + a) * 4 + b];
            m.p3[p * DIM + a] = acc;
        }
    if (j.has_field && L.reads_field()) m.q = dL_dtz(L, j);
    return m;
}

// ---- closed forms for the gravity density --------------------------------

template <class S>
struct GravityFrame {
    MetricPack<S> mp;
    std::array<S, NZ1> G1, G2;
    std::array<S, 64> up3;
    GammaTraces<S> tr;
};

template <class S>
GravityFrame<S> gravity_frame(const SysJetT<S>& j) {
    GravityFrame<S> f;
    f.mp = metric_pack(j.y);
    f.G1 = christoffel_first(j.z1);
    f.G2 = christoffel_second(f.mp.ginv, f.G1);
    f.up3 = christoffel_up3(f.mp.ginv, f.G2);
    f.tr = gamma_traces(f.mp.ginv, f.G1, f.G2);
    return f;
}

// p^{mn ab} = 1/2 (g^{ma} g^{nb} + g^{mb} g^{na} - 2 g^{mn} g^{ab}) sqrtmg
template <class S>
Z2Block<S> p4_closed_gravity(const GravityFrame<S>& f) {
    Z2Block<S> out;
    const Sym2<S>& gi = f.mp.ginv;
    for (int p = 0; p < NPAIR; ++p) {
        const auto [m, n] = kPairs.unpack[p];
        for (int q = 0; q < NPAIR; ++q) {
            const auto [a, b] = kPairs.unpack[q];
            out[p * NPAIR + q] = 0.5 *
                                 (sym2_at(gi, m, a) * sym2_at(gi, n, b) +
                                  sym2_at(gi, m, b) * sym2_at(gi, n, a) -
                                  2.0 * sym2_at(gi, m, n) * sym2_at(gi, a, b)) *
                                 f.mp.sqrtmg;
        }
    }
    return out;
}

// p^{mn a} = 1/2 (-g^{ma} G^n - g^{na} G^m + G^{nma} + G^{mna}) sqrtmg
template <class S>
Z1Block<S> p3_closed_gravity(const GravityFrame<S>& f) {
    Z1Block<S> out;
    const Sym2<S>& gi = f.mp.ginv;
    for (int p = 0; p < NPAIR; ++p) {
        const auto [m, n] = kPairs.unpack[p];
        for (int a = 0; a < 4; ++a)
            out[p * DIM + a] = 0.5 *
                               (-(sym2_at(gi, m, a) * f.tr.gamma_up[n]) -
                                sym2_at(gi, n, a) * f.tr.gamma_up[m] +
                                f.up3[(n * 4 + m) * 4 + a] + f.up3[(m * 4 + n) * 4 + a]) *
                               f.mp.sqrtmg;
    }
    return out;
}

// Full divergence sum_b D_b p^{mn a b} in closed form:
// 1/2 (2 g^{mn} G^a - g^{ma} G^n - g^{na} G^m + G^{mna} + G^{nma} - 2 G^{amn}) sqrtmg
template <class S>
Z1Block<S> p4_divergence_closed_gravity(const GravityFrame<S>& f) {
    Z1Block<S> out;
    const Sym2<S>& gi = f.mp.ginv;
    for (int p = 0; p < NPAIR; ++p) {
        const auto [m, n] = kPairs.unpack[p];
        for (int a = 0; a < 4; ++a)
            out[p * DIM + a] = 0.5 *
                               (2.0 * sym2_at(gi, m, n) * f.tr.gamma_up[a] -
                                sym2_at(gi, m, a) * f.tr.gamma_up[n] -
                                sym2_at(gi, n, a) * f.tr.gamma_up[m] +
                                f.up3[(m * 4 + n) * 4 + a] + f.up3[(n * 4 + m) * 4 + a] -
                                2.0 * f.up3[(a * 4 + m) * 4 + n]) *
                               f.mp.sqrtmg;
    }
    return out;
}

template <class S>
Momenta<S> momenta_closed_gravity(const SysJetT<S>& j) {
    const GravityFrame<S> f = gravity_frame(j);
    Momenta<S> m;
    m.p4 = p4_closed_gravity(f);
    m.p3 = p3_closed_gravity(f);
    return m;
}

// Field momentum of the minimally coupled scalar: q^m = g^{mn} dphi_n sqrtmg.
template <class S>
std::array<S, 4> q_closed_scalar(const SysJetT<S>& j) {
    const MetricPack<S> mp = metric_pack(j.y);
    std::array<S, 4> q;
    for (int m = 0; m < 4; ++m) {
        S acc(0.0);
        for (int n = 0; n < 4; ++n) acc += sym2_at(mp.ginv, m, n) * j.tz[n];
        q[m] = acc * mp.sqrtmg;
    }
    return q;
}

// ---- section-level momenta ------------------------------------------------

// Second jet of a section as truncated series around x: the y block carries
// the component series, the z blocks their formal derivatives.  Evaluating
// any jet function on this object yields that function's series along the
// prolonged section.
inline SysJetT<Taylor> section_jet_series(const MetricFamily& fam, const ScalarField* phi,
                                          const std::array<double, 4>& x, int ord = 2) {
    const Sym2<Taylor> s = fam.series(x, ord + 2);
    SysJetT<Taylor> j;
    for (int i = 0; i < 4; ++i) j.x[i] = taylor_var(x[i], i, ord);
    for (int p = 0; p < NPAIR; ++p) {
        j.y[p] = truncated(s[p], ord);
        for (int a = 0; a < 4; ++a) {
            const Taylor d1 = series_derivative(s[p], a);
            j.z1[p * DIM + a] = truncated(d1, ord);
            for (int b = a; b < 4; ++b)
                j.z2[p * NPAIR + pair_index(a, b)] = truncated(series_derivative(d1, b), ord);
        }
        for (int tr = 0; tr < NTRI; ++tr) {
            const auto [a, b, c] = kTriples.unpack[tr];
            j.z3[p * NTRI + tr] =
                series_derivative(series_derivative(series_derivative(s[p], a), b), c);
        }
    }
    j.order = 3;
    if (phi != nullptr) {
        const Taylor fs = phi->series(x, ord + 2);
        j.has_field = true;
        j.t = truncated(fs, ord);
        for (int a = 0; a < 4; ++a) {
            const Taylor d1 = series_derivative(fs, a);
            j.tz[a] = truncated(d1, ord);
            for (int b = a; b < 4; ++b)
                j.tz2[pair_index(a, b)] = truncated(series_derivative(d1, b), ord);
        }
    }
    return j;
}

struct SectionMomenta {
    SysJetT<Taylor> jet;       // order-2 series of the section's jet coordinates
    Z2Block<Taylor> p4;        // order-2 series
    Z1Block<Taylor> p3;        // order-1 series
    Sym2<Taylor> dLdy;
    Z1Block<Taylor> dLdz1;
    std::array<Taylor, 4> q;
    Taylor dLdt;
};

// Momenta along a section: the top momentum is a plain symmetrized partial of
// the density series, and the divergence entering the lower momentum is a
// series derivative — no nested dual layers, which keeps this route
// independent of the jet-level construction above.
inline SectionMomenta momenta_on_section(const Lagrangian& L, const SysJetT<Taylor>& js) {
    SectionMomenta sm;
    sm.jet = js;
    sm.p4 = dL_dz2(L, js);
    sm.dLdz1 = dL_dz1(L, js);
    sm.dLdy = dL_dy(L, js);
    for (int p = 0; p < NPAIR; ++p)
        for (int a = 0; a < 4; ++a) {
            Taylor acc = sm.dLdz1[p * DIM + a];
            for (int b = 0; b < 4; ++b)
                acc -= series_derivative(sm.p4[p * NPAIR + pair_index(a, b)], b);
            sm.p3[p * DIM + a] = acc;
        }
    if (js.has_field && L.reads_field()) {
        sm.q = dL_dtz(L, js);
        sm.dLdt = dL_dt(L, js);
    }
    return sm;
}

} // namespace dedonder
