#pragma once

#include "dedonder/jet.hpp"
#include "dedonder/momenta.hpp"
#include "dedonder/sampling.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

// The canonical 4-form of a second-order density and its exterior derivative,
// evaluated numerically: a k-form term is a coefficient times a wedge of
// coordinate/contact 1-forms, and its value on k tangent vectors is the
// coefficient times the determinant of the pairing matrix.  Every evaluation
// also reports the largest individual term as a scale, so "equal to zero"
// can be judged relative to the size of what cancelled.

namespace dedonder {

struct FormValue {
    double value = 0.0;
    double scale = 0.0; // max |single wedge term| seen while accumulating
};

namespace detail {

template <int N>
double det_small(std::array<std::array<double, N>, N> m) {
    double det = 1.0;
    for (int k = 0; k < N; ++k) {
        int piv = k;
        for (int i = k + 1; i < N; ++i)
            if (std::abs(m[i][k]) > std::abs(m[piv][k])) piv = i;
        if (m[piv][k] == 0.0) return 0.0;
        if (piv != k) {
            std::swap(m[piv], m[k]);
            det = -det;
        }
        det *= m[k][k];
        for (int i = k + 1; i < N; ++i) {
            const double f = m[i][k] / m[k][k];
            for (int jj = k; jj < N; ++jj) m[i][jj] -= f * m[k][jj];
        }
    }
    return det;
}

struct Accum {
    double value = 0.0;
    double scale = 0.0;
    void add(double term) {
        value += term;
        scale = std::max(scale, std::abs(term));
    }
};

} // namespace detail

// ---- contact 1-forms -----------------------------------------------------

inline double contact_y_eval(const SysJet& j, int p, const SysVec& v) {
    double r = v.dy[p];
    for (int b = 0; b < 4; ++b) r -= j.z1[p * DIM + b] * v.dx[b];
    return r;
}

inline double contact_z1_eval(const SysJet& j, int p, int a, const SysVec& v) {
    double r = v.dz1[p * DIM + a];
    for (int g = 0; g < 4; ++g) r -= j.z2[p * NPAIR + pair_index(a, g)] * v.dx[g];
    return r;
}

inline double contact_t_eval(const SysJet& j, const SysVec& v) {
    double r = v.dt;
    for (int b = 0; b < 4; ++b) r -= j.tz[b] * v.dx[b];
    return r;
}

// ---- linear algebra on tangent vectors -----------------------------------

inline SysVec vec_combine(const std::array<SysVec, 4>& basis, const std::array<double, 4>& w) {
    SysVec r;
    for (int b = 0; b < 4; ++b) {
        const SysVec& v = basis[b];
        const double c = w[b];
        for (int i = 0; i < 4; ++i) r.dx[i] += c * v.dx[i];
        for (int i = 0; i < NPAIR; ++i) r.dy[i] += c * v.dy[i];
        for (int i = 0; i < NZ1; ++i) r.dz1[i] += c * v.dz1[i];
        for (int i = 0; i < NZ2; ++i) r.dz2[i] += c * v.dz2[i];
        for (int i = 0; i < NZ3; ++i) r.dz3[i] += c * v.dz3[i];
        r.dt += c * v.dt;
        for (int i = 0; i < 4; ++i) r.dtz[i] += c * v.dtz[i];
    }
    return r;
}

// ---- the canonical 4-form ------------------------------------------------

// Value of  L d4x + p^{mn a b} (dz_{mn a} - z_{mn a g} dx^g) ^ (i_b d4x)
//         + p^{mn a} (dy_{mn} - z_{mn b} dx^b) ^ (i_a d4x)
//         [+ q^m (dt - dphi_n dx^n) ^ (i_m d4x) when a field is coupled]
// on four tangent vectors.  Momenta are supplied so callers can reuse them;
// the convenience overload computes them from the density.
inline FormValue theta_eval_with(const Lagrangian& L, const SysJet& j, const Momenta<double>& m,
                                 const std::array<SysVec, 4>& vs) {
    detail::Accum acc;
    std::array<std::array<double, 4>, 4> dx;
    for (int a = 0; a < 4; ++a)
        for (int k = 0; k < 4; ++k) dx[a][k] = vs[k].dx[a];

    auto interior_rows = [&](int b, std::array<std::array<double, 4>, 4>& rows, int from) {
        int r = from;
        for (int a = 0; a < 4; ++a)
            if (a != b) rows[r++] = dx[a];
    };

    acc.add(L.eval(static_cast<const SysJetT<double>&>(j)) * detail::det_small<4>(dx));

    for (int p = 0; p < NPAIR; ++p) {
        const double mult = kPairs.mult[p];
        std::array<double, 4> cy;
        for (int k = 0; k < 4; ++k) cy[k] = contact_y_eval(j, p, vs[k]);
        for (int a = 0; a < 4; ++a) {
            std::array<std::array<double, 4>, 4> rows;
            rows[0] = cy;
            interior_rows(a, rows, 1);
            const double sign = (a % 2 == 0) ? 1.0 : -1.0;
            acc.add(mult * m.p3[p * DIM + a] * sign * detail::det_small<4>(rows));
        }
        for (int a = 0; a < 4; ++a) {
            std::array<double, 4> cz;
            for (int k = 0; k < 4; ++k) cz[k] = contact_z1_eval(j, p, a, vs[k]);
            for (int b = 0; b < 4; ++b) {
                std::array<std::array<double, 4>, 4> rows;
                rows[0] = cz;
                interior_rows(b, rows, 1);
                const double sign = (b % 2 == 0) ? 1.0 : -1.0;
                acc.add(mult * m.p4[p * NPAIR + pair_index(a, b)] * sign *
                        detail::det_small<4>(rows));
            }
        }
    }

    if (j.has_field && L.reads_field()) {
        std::array<double, 4> ct;
        for (int k = 0; k < 4; ++k) ct[k] = contact_t_eval(j, vs[k]);
        for (int mu = 0; mu < 4; ++mu) {
            std::array<std::array<double, 4>, 4> rows;
            rows[0] = ct;
            interior_rows(mu, rows, 1);
            const double sign = (mu % 2 == 0) ? 1.0 : -1.0;
            acc.add(m.q[mu] * sign * detail::det_small<4>(rows));
        }
    }
    return {acc.value, acc.scale};
}

inline FormValue theta_eval(const Lagrangian& L, const SysJet& j,
                            const std::array<SysVec, 4>& vs) {
    return theta_eval_with(L, j, momenta_on_jet(L, j), vs);
}

// Closed display for the gravity density: a quadratic first-kind contraction
// on the volume form, plus raw coordinate differentials dg and dg_{,n}
// weighted by the closed momenta patterns.
inline FormValue theta_closed_gravity(const SysJet& j, const std::array<SysVec, 4>& vs) {
    const GravityFrame<double> f = gravity_frame(j);
    const Sym2<double>& gi = f.mp.ginv;
    detail::Accum acc;
    std::array<std::array<double, 4>, 4> dx;
    for (int a = 0; a < 4; ++a)
        for (int k = 0; k < 4; ++k) dx[a][k] = vs[k].dx[a];
    auto interior_rows = [&](int b, std::array<std::array<double, 4>, 4>& rows, int from) {
        int r = from;
        for (int a = 0; a < 4; ++a)
            if (a != b) rows[r++] = dx[a];
    };

    double c1 = 0.0;
    for (int l = 0; l < 4; ++l)
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n)
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b)
                        for (int g = 0; g < 4; ++g)
                            c1 += f.G1[l * NPAIR + pair_index(m, n)] *
                                  f.G1[a * NPAIR + pair_index(b, g)] *
                                  (sym2_at(gi, a, g) * sym2_at(gi, m, n) * sym2_at(gi, b, l) -
                                   sym2_at(gi, b, l) * sym2_at(gi, a, m) * sym2_at(gi, g, n));
    acc.add(c1 * f.mp.sqrtmg * detail::det_small<4>(dx));

    for (int p = 0; p < NPAIR; ++p) {
        const auto [a, b] = kPairs.unpack[p];
        const double mult = kPairs.mult[p];
        std::array<double, 4> dyrow;
        for (int k = 0; k < 4; ++k) dyrow[k] = vs[k].dy[p];
        for (int mu = 0; mu < 4; ++mu) {
            const double coeff = 0.5 *
                                 (-(sym2_at(gi, a, mu) * f.tr.gamma_up[b]) -
                                  sym2_at(gi, b, mu) * f.tr.gamma_up[a] +
                                  f.up3[(b * 4 + a) * 4 + mu] + f.up3[(a * 4 + b) * 4 + mu]) *
                                 f.mp.sqrtmg;
            std::array<std::array<double, 4>, 4> rows;
            rows[0] = dyrow;
            interior_rows(mu, rows, 1);
            const double sign = (mu % 2 == 0) ? 1.0 : -1.0;
            acc.add(mult * coeff * sign * detail::det_small<4>(rows));
        }
        for (int n = 0; n < 4; ++n) {
            std::array<double, 4> dzrow;
            for (int k = 0; k < 4; ++k) dzrow[k] = vs[k].dz1[p * DIM + n];
            for (int mu = 0; mu < 4; ++mu) {
                const double coeff = 0.5 *
                                     (sym2_at(gi, a, mu) * sym2_at(gi, b, n) +
                                      sym2_at(gi, a, n) * sym2_at(gi, b, mu) -
                                      2.0 * sym2_at(gi, a, b) * sym2_at(gi, mu, n)) *
                                     f.mp.sqrtmg;
                std::array<std::array<double, 4>, 4> rows;
                rows[0] = dzrow;
                interior_rows(mu, rows, 1);
                const double sign = (mu % 2 == 0) ? 1.0 : -1.0;
                acc.add(mult * coeff * sign * detail::det_small<4>(rows));
            }
        }
    }
    return {acc.value, acc.scale};
}

// ---- exterior derivative -------------------------------------------------

// d Theta = dL ^ d4x
//         - p^{mn a b} dz_{mn a g} ^ dx^g ^ (i_b d4x)
//         - p^{mn a}   dz_{mn b}   ^ dx^b ^ (i_a d4x)
//         + dp^{mn a b} ^ (dz_{mn a} - z_{mn a g} dx^g) ^ (i_b d4x)
//         + dp^{mn a}   ^ (dy_{mn}  - z_{mn b} dx^b)    ^ (i_a d4x)
// evaluated on five tangent vectors.  Momentum gradients along each vector
// come from running the momenta construction over a dual-seeded jet.
inline FormValue dtheta_eval(const Lagrangian& L, const SysJet& j,
                             const std::array<SysVec, 5>& vs) {
    if (j.has_field && L.reads_field())
        throw std::invalid_argument("dtheta_eval: field-coupled densities not supported");

    const Momenta<double> m = momenta_on_jet(L, j);

    // Directional derivatives of L and of the momenta along each vector.
    std::array<double, 5> dL;
    std::array<Z1Block<double>, 5> dp3;
    std::array<Z2Block<double>, 5> dp4;
    for (int k = 0; k < 5; ++k) {
        const SysJetT<Dual<double>> d = seed_jet(j, vs[k]);
        dL[k] = L.eval(d).d;
        const Momenta<Dual<double>> md = momenta_on_jet(L, d);
        for (int i = 0; i < NZ1; ++i) dp3[k][i] = md.p3[i].d;
        for (int i = 0; i < NZ2; ++i) dp4[k][i] = md.p4[i].d;
    }

    std::array<std::array<double, 5>, 4> dx;
    for (int a = 0; a < 4; ++a)
        for (int k = 0; k < 5; ++k) dx[a][k] = vs[k].dx[a];
    auto interior_rows = [&](int b, std::array<std::array<double, 5>, 5>& rows, int from) {
        int r = from;
        for (int a = 0; a < 4; ++a)
            if (a != b) rows[r++] = dx[a];
    };

    detail::Accum acc;
    {
        std::array<std::array<double, 5>, 5> rows;
        rows[0] = dL;
        for (int a = 0; a < 4; ++a) rows[1 + a] = dx[a];
        acc.add(detail::det_small<5>(rows));
    }

    for (int p = 0; p < NPAIR; ++p) {
        const double mult = kPairs.mult[p];
        // -p4 dz2 ^ dx ^ interior
        for (int a = 0; a < 4; ++a)
            for (int g = 0; g < 4; ++g)
                for (int b = 0; b < 4; ++b) {
                    const double coeff = mult * m.p4[p * NPAIR + pair_index(a, b)];
                    std::array<std::array<double, 5>, 5> rows;
                    for (int k = 0; k < 5; ++k)
                        rows[0][k] = vs[k].dz2[p * NPAIR + pair_index(a, g)];
                    rows[1] = dx[g];
                    interior_rows(b, rows, 2);
                    const double sign = (b % 2 == 0) ? 1.0 : -1.0;
                    acc.add(-coeff * sign * detail::det_small<5>(rows));
                }
        // -p3 dz1 ^ dx ^ interior
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                const double coeff = mult * m.p3[p * DIM + a];
                std::array<std::array<double, 5>, 5> rows;
                for (int k = 0; k < 5; ++k) rows[0][k] = vs[k].dz1[p * DIM + b];
                rows[1] = dx[b];
                interior_rows(a, rows, 2);
                const double sign = (a % 2 == 0) ? 1.0 : -1.0;
                acc.add(-coeff * sign * detail::det_small<5>(rows));
            }
        // +dp4 ^ contact(z1) ^ interior
        for (int a = 0; a < 4; ++a) {
            std::array<double, 5> cz;
            for (int k = 0; k < 5; ++k) cz[k] = contact_z1_eval(j, p, a, vs[k]);
            for (int b = 0; b < 4; ++b) {
                std::array<std::array<double, 5>, 5> rows;
                for (int k = 0; k < 5; ++k) rows[0][k] = dp4[k][p * NPAIR + pair_index(a, b)];
                rows[1] = cz;
                interior_rows(b, rows, 2);
                const double sign = (b % 2 == 0) ? 1.0 : -1.0;
                acc.add(mult * sign * detail::det_small<5>(rows));
            }
        }
        // +dp3 ^ contact(y) ^ interior
        {
            std::array<double, 5> cy;
            for (int k = 0; k < 5; ++k) cy[k] = contact_y_eval(j, p, vs[k]);
            for (int a = 0; a < 4; ++a) {
                std::array<std::array<double, 5>, 5> rows;
                for (int k = 0; k < 5; ++k) rows[0][k] = dp3[k][p * DIM + a];
                rows[1] = cy;
                interior_rows(a, rows, 2);
                const double sign = (a % 2 == 0) ? 1.0 : -1.0;
                acc.add(mult * sign * detail::det_small<5>(rows));
            }
        }
    }
    return {acc.value, acc.scale};
}

// ---- section-level residuals ---------------------------------------------

// Pullback property: on tangents of a prolonged section, every contact row
// vanishes and Theta reduces to L times the base volume; random frames probe
// this through arbitrary linear combinations of the section tangents.
inline double theta_pullback_residual(const Lagrangian& L, const MetricFamily& fam,
                                      const ScalarField* phi, const std::array<double, 4>& x,
                                      Rng& rng) {
    SysJet j = prolong(fam, x, 3);
    std::array<SysVec, 4> T = section_tangents(fam, x);
    if (phi != nullptr) {
        attach_field(j, *phi);
        attach_field_tangents(T, *phi, x);
    }
    std::array<std::array<double, 4>, 4> A;
    std::array<SysVec, 4> vsv;
    for (int k = 0; k < 4; ++k) {
        for (int b = 0; b < 4; ++b) A[b][k] = rng.uniform(-1.0, 1.0);
        vsv[k] = vec_combine(T, {A[0][k], A[1][k], A[2][k], A[3][k]});
    }
    const FormValue th = theta_eval(L, j, vsv);
    const double lhs = th.value;
    const double rhs = L.eval(static_cast<const SysJetT<double>&>(j)) * detail::det_small<4>(A);
    return std::abs(lhs - rhs) / std::max({1.0, th.scale, std::abs(rhs)});
}

// Vertical-contraction property of the exterior derivative: contracting with
// a vector touching only derivative coordinates, then pulling back along the
// prolonged section, gives zero.
inline double dtheta_vertical_residual(const Lagrangian& L, const MetricFamily& fam,
                                       const std::array<double, 4>& x, Rng& rng) {
    const SysJet j = prolong(fam, x, 3);
    const std::array<SysVec, 4> T = section_tangents(fam, x);
    SysVec X;
    for (int i = 0; i < NZ1; ++i) X.dz1[i] = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < NZ2; ++i) X.dz2[i] = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < NZ3; ++i) X.dz3[i] = rng.uniform(-1.0, 1.0);
    const std::array<SysVec, 5> vs{X, T[0], T[1], T[2], T[3]};
    const FormValue dv = dtheta_eval(L, j, vs);
    return std::abs(dv.value) / std::max(1.0, dv.scale);
}

} // namespace dedonder
