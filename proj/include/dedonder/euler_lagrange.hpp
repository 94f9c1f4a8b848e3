#pragma once

#include "dedonder/geometry.hpp"
#include "dedonder/momenta.hpp"

#include <algorithm>
#include <array>
#include <cmath>

// Euler-Lagrange residuals of second-order densities along sections, the
// De Donder equation decomposition, and the first-order field equation.  The
// derivatives of momenta by base coordinates are series derivatives of their
// section pullbacks; nothing here stores jets beyond order 3 — the order-4
// information lives transiently inside the Taylor series.

namespace dedonder {

struct ELResidual {
    Sym2<double> value{}; // full-index E^{mu nu}
    double scale = 1.0;   // max |contributing term| for relative-zero tests
};

// E^{mn} = dL/dy_{mn} - sum_a d_a p3^{mn a}, all pulled back along the
// section.
inline ELResidual el_residual_from_section(const SectionMomenta& sm) {
    ELResidual r;
    for (int p = 0; p < NPAIR; ++p) {
        double acc = sm.dLdy[p].val();
        double s = std::abs(acc);
        for (int a = 0; a < 4; ++a) {
            const double term = series_derivative(sm.p3[p * DIM + a], a).val();
            acc -= term;
            s = std::max(s, std::abs(term));
        }
        r.value[p] = acc;
        r.scale = std::max(r.scale, s);
    }
    return r;
}

inline ELResidual el_residual(const Lagrangian& L, const MetricFamily& fam,
                              const ScalarField* phi, const std::array<double, 4>& x) {
    const SysJetT<Taylor> js = section_jet_series(fam, phi, x, 2);
    return el_residual_from_section(momenta_on_section(L, js));
}

// Fully expanded route: E^{mn} = dL/dy - sum_a d_a(dL/dz1) + sum_{a,b}
// d_a d_b(dL/dz2); agrees with the route above once the lower momentum is
// expanded through its divergence definition.
inline ELResidual el_residual_expanded(const Lagrangian& L, const MetricFamily& fam,
                                       const ScalarField* phi, const std::array<double, 4>& x) {
    const SysJetT<Taylor> js = section_jet_series(fam, phi, x, 2);
    const Sym2<Taylor> dLdy = dL_dy(L, js);
    const Z1Block<Taylor> dLdz1 = dL_dz1(L, js);
    const Z2Block<Taylor> dLdz2 = dL_dz2(L, js);
    ELResidual r;
    for (int p = 0; p < NPAIR; ++p) {
        double acc = dLdy[p].val();
        double s = std::abs(acc);
        for (int a = 0; a < 4; ++a) {
            const double t1 = series_derivative(dLdz1[p * DIM + a], a).val();
            acc -= t1;
            s = std::max(s, std::abs(t1));
            for (int b = 0; b < 4; ++b) {
                const double t2 =
                    series_derivative(series_derivative(dLdz2[p * NPAIR + pair_index(a, b)], a),
                                      b)
                        .val();
                acc += t2;
                s = std::max(s, std::abs(t2));
            }
        }
        r.value[p] = acc;
        r.scale = std::max(r.scale, s);
    }
    return r;
}

// The De Donder system at a point: the top equation (dL/dz2 minus the top
// momentum), the middle equation (dL/dz1 minus the lower momentum minus the
// top momentum's divergence), and the bottom equation (the Euler-Lagrange
// residual).  The momenta entering the first two come from the jet-level
// dual-number route while the derivative terms come from section series, so
// near-zero residuals certify that two independent constructions meet.
struct DeDonderResiduals {
    double top = 0.0;
    double mid = 0.0;
    ELResidual el;
};

inline DeDonderResiduals de_donder_equations(const Lagrangian& L, const MetricFamily& fam,
                                             const ScalarField* phi,
                                             const std::array<double, 4>& x) {
    const SysJetT<Taylor> js = section_jet_series(fam, phi, x, 2);
    const SectionMomenta sm = momenta_on_section(L, js);

    SysJet j = prolong(fam, x, 3);
    if (phi != nullptr) attach_field(j, *phi);
    const Momenta<double> mj = momenta_on_jet(L, j);

    DeDonderResiduals r;
    for (int i = 0; i < NZ2; ++i) r.top = std::max(r.top, std::abs(sm.p4[i].val() - mj.p4[i]));
    for (int p = 0; p < NPAIR; ++p)
        for (int a = 0; a < 4; ++a) {
            double acc = sm.dLdz1[p * DIM + a].val() - mj.p3[p * DIM + a];
            for (int b = 0; b < 4; ++b)
                acc -= series_derivative(sm.p4[p * NPAIR + pair_index(a, b)], b).val();
            r.mid = std::max(r.mid, std::abs(acc));
        }
    r.el = el_residual_from_section(sm);
    return r;
}

// Independent oracle for the gravity field equations, assembled from the
// curvature chain only (no momenta, no variational machinery).
inline Sym2<double> einstein_tensor_density(const MetricFamily& fam,
                                            const std::array<double, 4>& x) {
    const SysJet j = prolong(fam, x, 2);
    return einstein_density(j.x, j.y, j.z1, j.z2);
}

// Empirical global sign relating the variational residual to the Einstein
// density: measured once on a reference sample, then asserted everywhere.
inline int measure_einstein_sign(const Lagrangian& Lg, const MetricFamily& fam,
                                 const std::array<double, 4>& x) {
    const ELResidual e = el_residual(Lg, fam, nullptr, x);
    const Sym2<double> g = einstein_tensor_density(fam, x);
    int best = 0;
    for (int p = 1; p < NPAIR; ++p)
        if (std::abs(g[p]) > std::abs(g[best])) best = p;
    return (e.value[best] / g[best] > 0.0) ? 1 : -1;
}

// First-order field equation along (section, field): dL/dt - sum_m d_m q^m.
inline double scalar_field_el_residual(const Lagrangian& Lmatter, const MetricFamily& fam,
                                       const ScalarField& phi, const std::array<double, 4>& x) {
    const SysJetT<Taylor> js = section_jet_series(fam, &phi, x, 2);
    const SectionMomenta sm = momenta_on_section(Lmatter, js);
    double acc = sm.dLdt.val();
    for (int m = 0; m < 4; ++m) acc -= series_derivative(sm.q[m], m).val();
    return acc;
}

} // namespace dedonder
