#pragma once

#include "dedonder/jet.hpp"
#include "dedonder/sampling.hpp"
#include "dedonder/scalar.hpp"
#include "dedonder/sym.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

// Built-in metric families and the random samplers used by the test batteries.
// Signature convention is (-,+,+,+) with the timelike direction first.

namespace dedonder {

inline FamilyPtr minkowski_family() {
    return make_family("minkowski", [](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        Sym2<S> g{};
        g[pair_index(0, 0)] = S(-1.0);
        for (int i = 1; i < 4; ++i) g[pair_index(i, i)] = S(1.0);
        return g;
    });
}

// Exterior region r > 2M in static polar coordinates (t, r, theta, phi).
inline FamilyPtr schwarzschild_family(double mass) {
    return make_family("schwarzschild", [mass](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        const S& r = x[1];
        const S& th = x[2];
        const S f = S(1.0) - (2.0 * mass) / r;
        Sym2<S> g{};
        g[pair_index(0, 0)] = -f;
        g[pair_index(1, 1)] = S(1.0) / f;
        g[pair_index(2, 2)] = r * r;
        const S sth = sin(th);
        g[pair_index(3, 3)] = r * r * sth * sth;
        return g;
    });
}

// Homogeneous vacuum cosmology diag(-1, t^{2p1}, t^{2p2}, t^{2p3}) on t > 0;
// the default exponents satisfy both exponent sum conditions.
inline FamilyPtr kasner_family(double p1 = 2.0 / 3.0, double p2 = 2.0 / 3.0,
                               double p3 = -1.0 / 3.0) {
    const std::array<double, 3> ps{p1, p2, p3};
    return make_family("kasner", [ps](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        const S& t = x[0];
        Sym2<S> g{};
        g[pair_index(0, 0)] = S(-1.0);
        for (int i = 0; i < 3; ++i)
            g[pair_index(i + 1, i + 1)] = exp(log(t) * (2.0 * ps[i]));
        return g;
    });
}

// ---- random polynomial perturbations of the flat metric ------------------

struct Monomial {
    double coeff;
    std::array<int, 4> exps;
};

// g = eta + amplitude * (symmetric matrix of degree<=3 polynomials).  The
// construction rejection-samples until the signature stays Lorentzian on the
// sampling box [-1,1]^4, checked through leading principal minors on a grid.
class PolyFamily final : public MetricFamily {
  public:
    PolyFamily(std::string name, std::array<std::vector<Monomial>, NPAIR> comps)
        : name_(std::move(name)), comps_(std::move(comps)) {}

    const std::string& name() const override { return name_; }

    Sym2<Taylor> eval_taylor(const std::array<Taylor, 4>& x) const override {
        return eval_impl(x);
    }
    Sym2<double> values(const std::array<double, 4>& x) const override { return eval_impl(x); }

  private:
    template <class S>
    Sym2<S> eval_impl(const std::array<S, 4>& x) const {
        Sym2<S> g{};
        g[pair_index(0, 0)] = S(-1.0);
        for (int i = 1; i < 4; ++i) g[pair_index(i, i)] = S(1.0);
        for (int p = 0; p < NPAIR; ++p)
            for (const Monomial& m : comps_[p]) {
                S term(m.coeff);
                for (int a = 0; a < 4; ++a)
                    if (m.exps[a] > 0) term = term * ipow(x[a], m.exps[a]);
                g[p] += term;
            }
        return g;
    }

    std::string name_;
    std::array<std::vector<Monomial>, NPAIR> comps_;
};

// Leading principal minors alternating as for diag(-1,1,1,1): every minor
// negative.  Sufficient for signature (-,+,+,+) when all minors are nonzero.
inline bool lorentzian_minors(const Sym2<double>& g) {
    double m[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m[i][j] = sym2_at(g, i, j);
    double det = 1.0;
    double a[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a[i][j] = m[i][j];
    // Gaussian elimination without pivoting; the running product of pivots is
    // the k-th leading minor, which must stay negative throughout.
    for (int k = 0; k < 4; ++k) {
        det *= a[k][k];
        if (!(det < 0.0)) return false;
        for (int i = k + 1; i < 4; ++i) {
            if (a[k][k] == 0.0) return false;
            const double f = a[i][k] / a[k][k];
            for (int j = k; j < 4; ++j) a[i][j] -= f * a[k][j];
        }
    }
    return true;
}

inline FamilyPtr random_poly_family(Rng& rng, double amplitude = 0.05) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::array<std::vector<Monomial>, NPAIR> comps;
        for (int p = 0; p < NPAIR; ++p) {
            const int nterm = rng.uniform_int(2, 4);
            for (int k = 0; k < nterm; ++k) {
                Monomial m;
                m.coeff = amplitude * rng.uniform(-1.0, 1.0);
                m.exps = {0, 0, 0, 0};
                const int deg = rng.uniform_int(0, 3);
                for (int d = 0; d < deg; ++d) m.exps[rng.uniform_int(0, 3)] += 1;
                comps[p].push_back(m);
            }
        }
        auto fam = std::make_shared<PolyFamily>("poly" + std::to_string(rng.word() % 100000),
                                                std::move(comps));
        bool ok = true;
        for (double u = -0.9; ok && u <= 0.91; u += 0.9)
            for (double v = -0.9; ok && v <= 0.91; v += 0.9)
                for (double w = -0.9; ok && w <= 0.91; w += 0.9)
                    for (double s = -0.9; ok && s <= 0.91; s += 0.9)
                        ok = lorentzian_minors(fam->values({u, v, w, s}));
        if (ok) return fam;
    }
    throw std::runtime_error("random_poly_family: rejection sampling failed");
}

// ---- scalar fields -------------------------------------------------------

inline FieldPtr quadratic_field() {
    return make_field("x2sq", [](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        return S(x[1] * x[1]);
    });
}

inline FieldPtr random_poly_field(Rng& rng, double amplitude = 0.5) {
    std::vector<Monomial> terms;
    const int nterm = rng.uniform_int(3, 6);
    for (int k = 0; k < nterm; ++k) {
        Monomial m;
        m.coeff = amplitude * rng.uniform(-1.0, 1.0);
        m.exps = {0, 0, 0, 0};
        const int deg = rng.uniform_int(0, 3);
        for (int d = 0; d < deg; ++d) m.exps[rng.uniform_int(0, 3)] += 1;
        terms.push_back(m);
    }
    return make_field("polyfield", [terms](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        S acc(0.0);
        for (const Monomial& m : terms) {
            S term(m.coeff);
            for (int a = 0; a < 4; ++a)
                if (m.exps[a] > 0) term = term * ipow(x[a], m.exps[a]);
            acc += term;
        }
        return acc;
    });
}

// ---- raw jet sampler -----------------------------------------------------

// Jets that are NOT prolongations of any section: y stays a bounded
// perturbation of eta (Frobenius distance <= 0.5 keeps the signature
// Lorentzian), all z levels independent and bounded.
struct JetSampler {
    double ybound = 0.12;
    double z1bound = 0.3;
    double z2bound = 0.25;
    double z3bound = 0.2;

    SysJet sample(Rng& rng, bool with_field = false) const {
        SysJet j;
        for (int i = 0; i < 4; ++i) j.x[i] = rng.uniform(-1.0, 1.0);
        j.y[pair_index(0, 0)] = -1.0;
        for (int i = 1; i < 4; ++i) j.y[pair_index(i, i)] = 1.0;
        for (int p = 0; p < NPAIR; ++p) j.y[p] += rng.uniform(-ybound, ybound);
        for (int i = 0; i < NZ1; ++i) j.z1[i] = rng.uniform(-z1bound, z1bound);
        for (int i = 0; i < NZ2; ++i) j.z2[i] = rng.uniform(-z2bound, z2bound);
        for (int i = 0; i < NZ3; ++i) j.z3[i] = rng.uniform(-z3bound, z3bound);
        j.order = 3;
        if (with_field) {
            j.has_field = true;
            j.t = rng.uniform(-1.0, 1.0);
            for (int i = 0; i < 4; ++i) j.tz[i] = rng.uniform(-1.0, 1.0);
            for (int p = 0; p < NPAIR; ++p) j.tz2[p] = rng.uniform(-1.0, 1.0);
        }
        return j;
    }

    SysVec sample_vector(Rng& rng, bool with_field = false) const {
        SysVec v;
        for (int i = 0; i < 4; ++i) v.dx[i] = rng.uniform(-1.0, 1.0);
        for (int i = 0; i < NPAIR; ++i) v.dy[i] = rng.uniform(-1.0, 1.0);
        for (int i = 0; i < NZ1; ++i) v.dz1[i] = rng.uniform(-1.0, 1.0);
        for (int i = 0; i < NZ2; ++i) v.dz2[i] = rng.uniform(-1.0, 1.0);
        for (int i = 0; i < NZ3; ++i) v.dz3[i] = rng.uniform(-1.0, 1.0);
        if (with_field) {
            v.dt = rng.uniform(-1.0, 1.0);
            for (int i = 0; i < 4; ++i) v.dtz[i] = rng.uniform(-1.0, 1.0);
        }
        return v;
    }
};

} // namespace dedonder
