#pragma once

#include "dedonder/scalar.hpp"
#include "dedonder/sym.hpp"
#include "dedonder/taylor.hpp"

#include <array>
#include <memory>
#include <stdexcept>
#include <string>

// Points and tangent vectors of the second/third jet space of Lorentzian
// metrics over a 4-dimensional base, together with an optional scalar-field
// block so matter couplings live on the fibred product.  Derivative
// coordinates are stored symmetry-reduced (see sym.hpp); the y block holds the
// metric components, z1/z2/z3 its first three derivative levels, t/tz/tz2 the
// field value and its first two derivative levels.

namespace dedonder {

template <class S>
struct SysJetT {
    std::array<S, 4> x{};
    Sym2<S> y{};
    Z1Block<S> z1{};
    Z2Block<S> z2{};
    Z3Block<S> z3{};
    int order = 3;        // highest filled z level

    bool has_field = false;
    S t{};
    std::array<S, 4> tz{};
    Sym2<S> tz2{};
};

using SysJet = SysJetT<double>;

// Tangent vector; blocks mirror SysJetT.  dz3 is carried because exterior
// derivative checks contract against section tangents, whose dz3 components
// come from transient fourth-order lifts (jet points themselves stop at z3).
struct SysVec {
    std::array<double, 4> dx{};
    std::array<double, NPAIR> dy{};
    std::array<double, NZ1> dz1{};
    std::array<double, NZ2> dz2{};
    std::array<double, NZ3> dz3{};
    double dt = 0.0;
    std::array<double, 4> dtz{};
};

// Jet with a first-order perturbation along v riding in the dual slot.  The
// second field-derivative level has no vector slot and stays unperturbed.
inline SysJetT<Dual<double>> seed_jet(const SysJet& j, const SysVec& v) {
    SysJetT<Dual<double>> d;
    d.order = j.order;
    d.has_field = j.has_field;
    for (int i = 0; i < 4; ++i) d.x[i] = Dual<double>(j.x[i], v.dx[i]);
    for (int i = 0; i < NPAIR; ++i) d.y[i] = Dual<double>(j.y[i], v.dy[i]);
    for (int i = 0; i < NZ1; ++i) d.z1[i] = Dual<double>(j.z1[i], v.dz1[i]);
    for (int i = 0; i < NZ2; ++i) d.z2[i] = Dual<double>(j.z2[i], v.dz2[i]);
    for (int i = 0; i < NZ3; ++i) d.z3[i] = Dual<double>(j.z3[i], v.dz3[i]);
    if (j.has_field) {
        d.t = Dual<double>(j.t, v.dt);
        for (int i = 0; i < 4; ++i) d.tz[i] = Dual<double>(j.tz[i], v.dtz[i]);
        for (int i = 0; i < NPAIR; ++i) d.tz2[i] = Dual<double>(j.tz2[i], 0.0);
    }
    return d;
}

// ---- metric families -----------------------------------------------------

class MetricFamily {
  public:
    virtual ~MetricFamily() = default;
    virtual const std::string& name() const = 0;

    // Components at Taylor-valued coordinates with arbitrary coefficients.
    // Families defined by composition through a coordinate change cannot
    // support this and throw; everything else must implement it.
    virtual Sym2<Taylor> eval_taylor(const std::array<Taylor, 4>& x) const = 0;

    // Component series around x0 on identity seeds.  This is the only entry
    // point the rest of the engine uses.
    virtual Sym2<Taylor> series(const std::array<double, 4>& x0, int order) const {
        std::array<Taylor, 4> seeds;
        for (int i = 0; i < 4; ++i) seeds[i] = taylor_var(x0[i], i, order);
        return eval_taylor(seeds);
    }

    virtual Sym2<double> values(const std::array<double, 4>& x0) const {
        const Sym2<Taylor> s = series(x0, 0);
        Sym2<double> v;
        for (int p = 0; p < NPAIR; ++p) v[p] = s[p].val();
        return v;
    }
};

using FamilyPtr = std::shared_ptr<const MetricFamily>;

template <class F>
class ClosureFamily final : public MetricFamily {
  public:
    ClosureFamily(std::string name, F f) : name_(std::move(name)), f_(std::move(f)) {}
    const std::string& name() const override { return name_; }
    Sym2<Taylor> eval_taylor(const std::array<Taylor, 4>& x) const override { return f_(x); }
    Sym2<double> values(const std::array<double, 4>& x) const override { return f_(x); }

  private:
    std::string name_;
    F f_;
};

template <class F>
FamilyPtr make_family(std::string name, F f) {
    return std::make_shared<ClosureFamily<F>>(std::move(name), std::move(f));
}

// ---- scalar fields -------------------------------------------------------

class ScalarField {
  public:
    virtual ~ScalarField() = default;
    virtual const std::string& name() const = 0;
    virtual Taylor eval_taylor(const std::array<Taylor, 4>& x) const = 0;
    virtual Taylor series(const std::array<double, 4>& x0, int order) const {
        std::array<Taylor, 4> seeds;
        for (int i = 0; i < 4; ++i) seeds[i] = taylor_var(x0[i], i, order);
        return eval_taylor(seeds);
    }
};

using FieldPtr = std::shared_ptr<const ScalarField>;

template <class F>
class ClosureField final : public ScalarField {
  public:
    ClosureField(std::string name, F f) : name_(std::move(name)), f_(std::move(f)) {}
    const std::string& name() const override { return name_; }
    Taylor eval_taylor(const std::array<Taylor, 4>& x) const override { return f_(x); }

  private:
    std::string name_;
    F f_;
};

template <class F>
FieldPtr make_field(std::string name, F f) {
    return std::make_shared<ClosureField<F>>(std::move(name), std::move(f));
}

// ---- prolongation --------------------------------------------------------

// Holonomic jet of a family at x: every z level is the corresponding mixed
// partial of the components, read off a single truncated lift.
inline SysJet prolong(const MetricFamily& fam, const std::array<double, 4>& x, int order = 3) {
    if (order < 2 || order > 3) throw std::invalid_argument("prolong: order must be 2 or 3");
    const Sym2<Taylor> s = fam.series(x, order);
    SysJet j;
    j.x = x;
    j.order = order;
    for (int p = 0; p < NPAIR; ++p) {
        const auto [mu, nu] = kPairs.unpack[p];
        (void)mu;
        j.y[p] = s[p].val();
        for (int a = 0; a < 4; ++a) {
            std::array<int, 4> m{};
            m[a] = 1;
            j.z1[p * DIM + a] = taylor_partial(s[p], m);
        }
        for (int q = 0; q < NPAIR; ++q) {
            const auto [a, b] = kPairs.unpack[q];
            std::array<int, 4> m{};
            m[a] += 1;
            m[b] += 1;
            j.z2[p * NPAIR + q] = taylor_partial(s[p], m);
        }
        if (order >= 3)
            for (int tr = 0; tr < NTRI; ++tr) {
                const auto [a, b, c] = kTriples.unpack[tr];
                std::array<int, 4> m{};
                m[a] += 1;
                m[b] += 1;
                m[c] += 1;
                j.z3[p * NTRI + tr] = taylor_partial(s[p], m);
            }
    }
    return j;
}

// Adjoin a field section's value and first two derivative levels.
inline void attach_field(SysJet& j, const ScalarField& phi) {
    const Taylor s = phi.series(j.x, 2);
    j.has_field = true;
    j.t = s.val();
    for (int a = 0; a < 4; ++a) {
        std::array<int, 4> m{};
        m[a] = 1;
        j.tz[a] = taylor_partial(s, m);
    }
    for (int q = 0; q < NPAIR; ++q) {
        const auto [a, b] = kPairs.unpack[q];
        std::array<int, 4> m{};
        m[a] += 1;
        m[b] += 1;
        j.tz2[q] = taylor_partial(s, m);
    }
}

// Residual of the contact structure: for each derivative pairing
// d(level k) - (level k+1) dx, pulled back along the family's prolongation
// and compared against the jet's stored coordinates.  Zero exactly on
// holonomic jets of the same family.
inline double contact_residual(const MetricFamily& fam, const SysJet& j) {
    const SysJet p = prolong(fam, j.x, j.order);
    double r = 0.0;
    for (int i = 0; i < NZ1; ++i) r = std::max(r, std::abs(p.z1[i] - j.z1[i]));
    for (int i = 0; i < NZ2; ++i) r = std::max(r, std::abs(p.z2[i] - j.z2[i]));
    if (j.order >= 3)
        for (int i = 0; i < NZ3; ++i) r = std::max(r, std::abs(p.z3[i] - j.z3[i]));
    return r;
}

// Tangents of the prolonged section along the coordinate directions; the dz3
// block needs fourth derivatives of the family, taken from a transient
// order-4 lift and never stored on a jet point.
inline std::array<SysVec, 4> section_tangents(const MetricFamily& fam,
                                              const std::array<double, 4>& x) {
    const Sym2<Taylor> s = fam.series(x, 4);
    std::array<SysVec, 4> vs;
    for (int b = 0; b < 4; ++b) {
        SysVec& v = vs[b];
        v.dx[b] = 1.0;
        for (int p = 0; p < NPAIR; ++p) {
            {
                std::array<int, 4> m{};
                m[b] += 1;
                v.dy[p] = taylor_partial(s[p], m);
            }
            for (int a = 0; a < 4; ++a) {
                std::array<int, 4> m{};
                m[a] += 1;
                m[b] += 1;
                v.dz1[p * DIM + a] = taylor_partial(s[p], m);
            }
            for (int q = 0; q < NPAIR; ++q) {
                const auto [a, c] = kPairs.unpack[q];
                std::array<int, 4> m{};
                m[a] += 1;
                m[c] += 1;
                m[b] += 1;
                v.dz2[p * NPAIR + q] = taylor_partial(s[p], m);
            }
            for (int tr = 0; tr < NTRI; ++tr) {
                const auto [a, c, d] = kTriples.unpack[tr];
                std::array<int, 4> m{};
                m[a] += 1;
                m[c] += 1;
                m[d] += 1;
                m[b] += 1;
                v.dz3[p * NTRI + tr] = taylor_partial(s[p], m);
            }
        }
    }
    return vs;
}

inline void attach_field_tangents(std::array<SysVec, 4>& vs, const ScalarField& phi,
                                  const std::array<double, 4>& x) {
    const Taylor s = phi.series(x, 3);
    for (int b = 0; b < 4; ++b) {
        {
            std::array<int, 4> m{};
            m[b] += 1;
            vs[b].dt = taylor_partial(s, m);
        }
        for (int a = 0; a < 4; ++a) {
            std::array<int, 4> m{};
            m[a] += 1;
            m[b] += 1;
            vs[b].dtz[a] = taylor_partial(s, m);
        }
    }
}

} // namespace dedonder
