#pragma once

#include "dedonder/diffeo.hpp"
#include "dedonder/forms.hpp"
#include "dedonder/momenta.hpp"

#include <algorithm>
#include <array>
#include <cmath>

// Coordinate-change checks: scalar-density behaviour of the Lagrangian, the
// two momentum transformation laws, the field momentum law, and invariance of
// the canonical form under pushforward.  Every function samples one
// (family, diffeo, point) combination and returns a scaled residual; the
// caller aggregates.  A deliberately non-covariant density is expected to
// make these residuals large — that negative control lives with the callers.

namespace dedonder {

// Matched jets of the same geometry in both charts, plus the chart
// derivative blocks at the matched points.
struct ChartPair {
    SysJet j;             // unprimed jet at x
    SysJet jp;            // primed jet at x' = fwd(x)
    MapJetsT<double> A;   // forward-map derivatives at x
    MapJetsT<double> B;   // inverse-map derivatives at x'
    std::array<double, 4> x{}, xp{};
};

inline ChartPair chart_pair(const FamilyPtr& fam, const FieldPtr& phi, const Diffeo& d,
                            const std::array<double, 4>& x, int order = 3) {
    ChartPair c;
    c.x = x;
    c.xp = d.fwd->eval(x);
    c.j = prolong(*fam, x, order);
    c.jp = prolong(*transported_family(fam, d), c.xp, order);
    if (phi != nullptr) {
        attach_field(c.j, *phi);
        attach_field(c.jp, *transported_field(phi, d));
    }
    c.A = map_jets(*d.fwd, x);
    c.B = map_jets(*d.inv, c.xp);
    return c;
}

// |L(j) - L(j') det(dx'/dx)| / max(1, |L(j)|)
inline double density_law_residual(const Lagrangian& L, const ChartPair& c) {
    const double lu = L.eval(static_cast<const SysJetT<double>&>(c.j));
    const double lp = L.eval(static_cast<const SysJetT<double>&>(c.jp));
    return std::abs(lu - lp * c.A.det1) / std::max(1.0, std::abs(lu));
}

struct MomentaLawResiduals {
    double p4 = 0.0;
    double p3 = 0.0;
    double q = 0.0;
};

// Transform the primed momenta back through the printed laws and compare
// against the momenta computed directly in the unprimed chart.
inline MomentaLawResiduals momenta_law_residuals(const Lagrangian& L, const ChartPair& c) {
    const Momenta<double> m = momenta_on_jet(L, c.j);
    const Momenta<double> mp = momenta_on_jet(L, c.jp);
    const auto& B1 = c.B.j1;
    const auto& B2 = c.B.j2;
    const double det = c.A.det1;

    MomentaLawResiduals r;
    double s4 = 1.0, s3 = 1.0, sq = 1.0;
    for (int i = 0; i < NZ2; ++i) s4 = std::max(s4, std::abs(m.p4[i]));
    for (int i = 0; i < NZ1; ++i) s3 = std::max(s3, std::abs(m.p3[i]));
    for (int i = 0; i < 4; ++i) sq = std::max(sq, std::abs(m.q[i]));

    for (int p = 0; p < NPAIR; ++p) {
        const auto [mu, nu] = kPairs.unpack[p];
        for (int q2 = 0; q2 < NPAIR; ++q2) {
            const auto [a, b] = kPairs.unpack[q2];
            double acc = 0.0;
            for (int mp_ = 0; mp_ < 4; ++mp_)
                for (int np_ = 0; np_ < 4; ++np_)
                    for (int ap_ = 0; ap_ < 4; ++ap_)
                        for (int bp_ = 0; bp_ < 4; ++bp_)
                            acc += z2_at(mp.p4, mp_, np_, ap_, bp_) * B1[mu * 4 + mp_] *
                                   B1[nu * 4 + np_] * B1[a * 4 + ap_] * B1[b * 4 + bp_];
            acc *= det;
            r.p4 = std::max(r.p4, std::abs(acc - m.p4[p * NPAIR + q2]) / s4);
        }
        for (int a = 0; a < 4; ++a) {
            double acc = 0.0;
            for (int mp_ = 0; mp_ < 4; ++mp_)
                for (int np_ = 0; np_ < 4; ++np_) {
                    for (int ap_ = 0; ap_ < 4; ++ap_)
                        acc += z1_at(mp.p3, mp_, np_, ap_) * B1[mu * 4 + mp_] *
                               B1[nu * 4 + np_] * B1[a * 4 + ap_];
                    for (int ap_ = 0; ap_ < 4; ++ap_)
                        for (int bp_ = 0; bp_ < 4; ++bp_)
                            acc += z2_at(mp.p4, mp_, np_, ap_, bp_) * B1[a * 4 + bp_] *
                                   (B2[(mu * 4 + mp_) * 4 + ap_] * B1[nu * 4 + np_] +
                                    B1[mu * 4 + mp_] * B2[(nu * 4 + np_) * 4 + ap_]);
                }
            acc *= det;
            r.p3 = std::max(r.p3, std::abs(acc - m.p3[p * DIM + a]) / s3);
        }
    }
    if (c.j.has_field && L.reads_field())
        for (int mu = 0; mu < 4; ++mu) {
            double acc = 0.0;
            for (int mp_ = 0; mp_ < 4; ++mp_) acc += mp.q[mp_] * B1[mu * 4 + mp_];
            acc *= det;
            r.q = std::max(r.q, std::abs(acc - m.q[mu]) / sq);
        }
    return r;
}

// Evaluate the canonical form on random vectors in the unprimed chart and on
// their pushforwards in the primed chart; a covariant construction gives the
// same numbers.
inline double theta_invariance_residual(const Lagrangian& L, const Diffeo& d,
                                        const ChartPair& c, Rng& rng, int nsets = 5) {
    const bool with_field = c.j.has_field && L.reads_field();
    auto sample_vec = [&rng, with_field]() {
        SysVec v;
        for (auto& e : v.dx) e = rng.uniform(-1.0, 1.0);
        for (auto& e : v.dy) e = rng.uniform(-1.0, 1.0);
        for (auto& e : v.dz1) e = rng.uniform(-1.0, 1.0);
        for (auto& e : v.dz2) e = rng.uniform(-1.0, 1.0);
        for (auto& e : v.dz3) e = rng.uniform(-1.0, 1.0);
        if (with_field) {
            v.dt = rng.uniform(-1.0, 1.0);
            for (auto& e : v.dtz) e = rng.uniform(-1.0, 1.0);
        }
        return v;
    };
    const Momenta<double> m = momenta_on_jet(L, c.j);
    const Momenta<double> mp = momenta_on_jet(L, c.jp);
    double worst = 0.0;
    for (int set = 0; set < nsets; ++set) {
        std::array<SysVec, 4> vs, vp;
        for (int k = 0; k < 4; ++k) {
            vs[k] = sample_vec();
            vp[k] = pushforward_vector(d, c.j, vs[k]);
        }
        const FormValue tu = theta_eval_with(L, c.j, m, vs);
        const FormValue tp = theta_eval_with(L, c.jp, mp, vp);
        worst = std::max(worst, std::abs(tu.value - tp.value) /
                                    std::max({1.0, tu.scale, tp.scale}));
    }
    return worst;
}

} // namespace dedonder
