#pragma once

#include "dedonder/expr.hpp"
#include "dedonder/jet.hpp"
#include "dedonder/lagrangian.hpp"
#include "dedonder/sampling.hpp"

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

// Coordinate changes of the base manifold and their induced action on jets.
// A diffeomorphism carries both directions as closed-form maps (the built-ins
// are triangular shears and integer unimodular affine maps, so the inverse is
// exact and no power series ever gets inverted).  Chart derivatives to third
// order come out of truncated series evaluation; jets transform by the
// iterated chain rule on the metric law, with the third level always left to
// re-prolongation.

namespace dedonder {

// ---- polymorphic coordinate maps ----------------------------------------

class CoordinateMap {
  public:
    virtual ~CoordinateMap() = default;
#define DEDONDER_MAP_DECL(S_) \
    virtual std::array<S_, 4> eval(const std::array<S_, 4>& x) const = 0;
    DEDONDER_SCALAR_TYPES(DEDONDER_MAP_DECL)
#undef DEDONDER_MAP_DECL
};

using MapPtr = std::shared_ptr<const CoordinateMap>;

template <class F>
class MapImpl final : public CoordinateMap {
  public:
    explicit MapImpl(F f) : f_(std::move(f)) {}
#define DEDONDER_MAP_IMPL(S_)                                          \
    std::array<S_, 4> eval(const std::array<S_, 4>& x) const override { \
        return f_(x);                                                   \
    }
    DEDONDER_SCALAR_TYPES(DEDONDER_MAP_IMPL)
#undef DEDONDER_MAP_IMPL
  private:
    F f_;
};

template <class F>
MapPtr make_map(F f) {
    return std::make_shared<MapImpl<F>>(std::move(f));
}

struct Diffeo {
    std::string name;
    MapPtr fwd; // x -> x'
    MapPtr inv; // x' -> x
};

// ---- chart derivatives at a point ---------------------------------------

// Derivatives of one direction of a map at a point: j1[o*4+a] is the first
// derivative of output o by input a, j2 and j3 append further input slots
// (symmetric under their exchange).
template <class S>
struct MapJetsT {
    std::array<S, 16> j1{};
    std::array<S, 64> j2{};
    std::array<S, 256> j3{};
    S det1{};
};

namespace detail {

inline double t_partial(const Taylor& s, const std::array<int, 4>& m) {
    return taylor_partial(s, m);
}
inline Dual<double> t_partial(const Dual<Taylor>& s, const std::array<int, 4>& m) {
    return Dual<double>(taylor_partial(s.v, m), taylor_partial(s.d, m));
}

template <class S>
S det3_generic(const S& a, const S& b, const S& c, const S& d, const S& e, const S& f,
               const S& g, const S& h, const S& i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

template <class S>
S det4_generic(const std::array<S, 16>& m) {
    S det(0.0);
    for (int c = 0; c < 4; ++c) {
        std::array<S, 9> sub;
        int w = 0;
        for (int r = 1; r < 4; ++r)
            for (int cc = 0; cc < 4; ++cc)
                if (cc != c) sub[w++] = m[r * 4 + cc];
        const S minor = det3_generic(sub[0], sub[1], sub[2], sub[3], sub[4], sub[5], sub[6],
                                     sub[7], sub[8]);
        const double sign = (c % 2 == 0) ? 1.0 : -1.0;
        det += sign * m[c] * minor;
    }
    return det;
}

template <class TS, class S>
void fill_map_jets(const std::array<TS, 4>& out, MapJetsT<S>& mj) {
    for (int o = 0; o < 4; ++o)
        for (int a = 0; a < 4; ++a) {
            std::array<int, 4> m1{};
            m1[a] += 1;
            mj.j1[o * 4 + a] = t_partial(out[o], m1);
            for (int b = 0; b < 4; ++b) {
                auto m2 = m1;
                m2[b] += 1;
                mj.j2[(o * 4 + a) * 4 + b] = t_partial(out[o], m2);
                for (int c = 0; c < 4; ++c) {
                    auto m3 = m2;
                    m3[c] += 1;
                    mj.j3[((o * 4 + a) * 4 + b) * 4 + c] = t_partial(out[o], m3);
                }
            }
        }
    mj.det1 = det4_generic(mj.j1);
}

} // namespace detail

inline MapJetsT<double> map_jets(const CoordinateMap& map, const std::array<double, 4>& x) {
    std::array<Taylor, 4> args;
    for (int i = 0; i < 4; ++i) args[i] = taylor_var(x[i], i, 3);
    const std::array<Taylor, 4> out = map.eval(args);
    MapJetsT<double> mj;
    detail::fill_map_jets(out, mj);
    return mj;
}

// Same derivatives with a first-order perturbation of the base point riding
// along in the dual slot.
inline MapJetsT<Dual<double>> map_jets(const CoordinateMap& map, const std::array<double, 4>& x,
                                       const std::array<double, 4>& u) {
    std::array<Dual<Taylor>, 4> args;
    for (int i = 0; i < 4; ++i)
        args[i] = Dual<Taylor>(taylor_var(x[i], i, 3), Taylor(u[i]));
    const std::array<Dual<Taylor>, 4> out = map.eval(args);
    MapJetsT<Dual<double>> mj;
    detail::fill_map_jets(out, mj);
    return mj;
}

// ---- jet transformation --------------------------------------------------

// src is a jet in the source chart; D holds the derivatives of the map from
// the target chart to the source chart at target_x.  The metric level is the
// two-Jacobian law, the next two levels are its first and second derivative
// by target coordinates, and the third level is deliberately absent (order
// drops to 2): a third-level jet in the target chart comes from prolonging
// the transformed family, never from a formula.
template <class S>
SysJetT<S> transform_jet(const SysJetT<S>& src, const MapJetsT<S>& D,
                         const std::array<S, 4>& target_x) {
    SysJetT<S> out;
    out.order = 2;
    out.x = target_x;
    out.has_field = src.has_field;
    const auto& J1 = D.j1;
    const auto& J2 = D.j2;
    const auto& J3 = D.j3;

    for (int p = 0; p < NPAIR; ++p) {
        const auto [m, n] = kPairs.unpack[p];
        S acc(0.0);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                acc += J1[a * 4 + m] * J1[b * 4 + n] * sym2_at(src.y, a, b);
        out.y[p] = acc;
    }

    for (int p = 0; p < NPAIR; ++p) {
        const auto [m, n] = kPairs.unpack[p];
        for (int a = 0; a < 4; ++a) {
            S acc(0.0);
            for (int u = 0; u < 4; ++u)
                for (int v = 0; v < 4; ++v) {
                    const S yv = sym2_at(src.y, u, v);
                    acc += J2[(u * 4 + m) * 4 + a] * J1[v * 4 + n] * yv;
                    acc += J1[u * 4 + m] * J2[(v * 4 + n) * 4 + a] * yv;
                    for (int r = 0; r < 4; ++r)
                        acc += J1[u * 4 + m] * J1[v * 4 + n] * J1[r * 4 + a] *
                               z1_at(src.z1, u, v, r);
                }
            out.z1[p * DIM + a] = acc;
        }
    }

    for (int p = 0; p < NPAIR; ++p) {
        const auto [m, n] = kPairs.unpack[p];
        for (int q = 0; q < NPAIR; ++q) {
            const auto [a, b] = kPairs.unpack[q];
            S acc(0.0);
            for (int u = 0; u < 4; ++u)
                for (int v = 0; v < 4; ++v) {
                    const S yv = sym2_at(src.y, u, v);
                    acc += J3[((u * 4 + m) * 4 + a) * 4 + b] * J1[v * 4 + n] * yv;
                    acc += J2[(u * 4 + m) * 4 + a] * J2[(v * 4 + n) * 4 + b] * yv;
                    acc += J2[(u * 4 + m) * 4 + b] * J2[(v * 4 + n) * 4 + a] * yv;
                    acc += J1[u * 4 + m] * J3[((v * 4 + n) * 4 + a) * 4 + b] * yv;
                    for (int r = 0; r < 4; ++r) {
                        const S zv = z1_at(src.z1, u, v, r);
                        acc += J2[(u * 4 + m) * 4 + a] * J1[v * 4 + n] * J1[r * 4 + b] * zv;
                        acc += J1[u * 4 + m] * J2[(v * 4 + n) * 4 + a] * J1[r * 4 + b] * zv;
                        acc += J2[(u * 4 + m) * 4 + b] * J1[v * 4 + n] * J1[r * 4 + a] * zv;
                        acc += J1[u * 4 + m] * J2[(v * 4 + n) * 4 + b] * J1[r * 4 + a] * zv;
                        acc += J1[u * 4 + m] * J1[v * 4 + n] * J2[(r * 4 + a) * 4 + b] * zv;
                        for (int s = 0; s < 4; ++s)
                            acc += J1[u * 4 + m] * J1[v * 4 + n] * J1[r * 4 + a] *
                                   J1[s * 4 + b] * z2_at(src.z2, u, v, r, s);
                    }
                }
            out.z2[p * NPAIR + q] = acc;
        }
    }

    if (src.has_field) {
        out.t = src.t;
        for (int m = 0; m < 4; ++m) {
            S acc(0.0);
            for (int u = 0; u < 4; ++u) acc += J1[u * 4 + m] * src.tz[u];
            out.tz[m] = acc;
        }
        for (int p = 0; p < NPAIR; ++p) {
            const auto [m, n] = kPairs.unpack[p];
            S acc(0.0);
            for (int u = 0; u < 4; ++u) {
                acc += J2[(u * 4 + m) * 4 + n] * src.tz[u];
                for (int v = 0; v < 4; ++v)
                    acc += J1[u * 4 + m] * J1[v * 4 + n] * sym2_at(src.tz2, u, v);
            }
            out.tz2[p] = acc;
        }
    }
    return out;
}

// Jet in the unprimed chart -> jet at the image point in the primed chart.
inline SysJet transform_jet_forward(const SysJet& j, const Diffeo& d) {
    const std::array<double, 4> xp = d.fwd->eval(j.x);
    return transform_jet(j, map_jets(*d.inv, xp), xp);
}

// Jet in the primed chart -> jet at the preimage point in the unprimed chart.
inline SysJet transform_jet_backward(const SysJet& jp, const Diffeo& d) {
    const std::array<double, 4> x = d.inv->eval(jp.x);
    return transform_jet(jp, map_jets(*d.fwd, x), x);
}

// Differential of the induced jet-space map along a tangent vector, by
// running the whole transformation in dual arithmetic.  Third-level and
// second-field-level slots of the result are zero, matching the order-2 scope
// of the coordinate transformation.
inline SysVec pushforward_vector(const Diffeo& d, const SysJet& j, const SysVec& v) {
    std::array<Dual<double>, 4> xd;
    for (int i = 0; i < 4; ++i) xd[i] = Dual<double>(j.x[i], v.dx[i]);
    const std::array<Dual<double>, 4> xpd = d.fwd->eval(xd);
    std::array<double, 4> xp, u;
    for (int i = 0; i < 4; ++i) {
        xp[i] = xpd[i].v;
        u[i] = xpd[i].d;
    }
    const MapJetsT<Dual<double>> D = map_jets(*d.inv, xp, u);
    const SysJetT<Dual<double>> jd = seed_jet(j, v);
    const SysJetT<Dual<double>> out = transform_jet(jd, D, xpd);
    SysVec r;
    for (int i = 0; i < 4; ++i) r.dx[i] = out.x[i].d;
    for (int i = 0; i < NPAIR; ++i) r.dy[i] = out.y[i].d;
    for (int i = 0; i < NZ1; ++i) r.dz1[i] = out.z1[i].d;
    for (int i = 0; i < NZ2; ++i) r.dz2[i] = out.z2[i].d;
    if (j.has_field) {
        r.dt = out.t.d;
        for (int i = 0; i < 4; ++i) r.dtz[i] = out.tz[i].d;
    }
    return r;
}

// ---- transported families ------------------------------------------------

// Metric family in a target chart, defined by composing a source-chart family
// with the target->source map and attaching the two chart Jacobians.  Series
// are built by composition (the map is evaluated one order higher to supply
// the Jacobian series); arbitrary-coefficient Taylor arguments are not
// supported, so transporting an already-transported family is rejected.
class TransportedFamily final : public MetricFamily {
  public:
    TransportedFamily(FamilyPtr base, MapPtr to_source, std::string name)
        : base_(std::move(base)), to_source_(std::move(to_source)), name_(std::move(name)) {}

    const std::string& name() const override { return name_; }

    Sym2<Taylor> eval_taylor(const std::array<Taylor, 4>&) const override {
        throw std::logic_error("transported family supports point series only");
    }

    Sym2<Taylor> series(const std::array<double, 4>& x0, int order) const override {
        if (order > 3) throw std::invalid_argument("transported family: series order > 3");
        std::array<Taylor, 4> targs;
        for (int i = 0; i < 4; ++i) targs[i] = taylor_var(x0[i], i, order + 1);
        const std::array<Taylor, 4> s = to_source_->eval(targs);
        std::array<Taylor, 4> strunc;
        for (int i = 0; i < 4; ++i) strunc[i] = truncated(s[i], order);
        const Sym2<Taylor> gs = base_->eval_taylor(strunc);
        std::array<std::array<Taylor, 4>, 4> J;
        for (int p = 0; p < 4; ++p)
            for (int m = 0; m < 4; ++m) J[p][m] = series_derivative(s[p], m);
        Sym2<Taylor> out;
        for (int pr = 0; pr < NPAIR; ++pr) {
            const auto [m, n] = kPairs.unpack[pr];
            Taylor acc(0.0);
            acc.ord = order;
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q) acc = acc + J[p][m] * J[q][n] * sym2_at(gs, p, q);
            out[pr] = acc;
        }
        return out;
    }

    Sym2<double> values(const std::array<double, 4>& x0) const override {
        const MapJetsT<double> D = map_jets(*to_source_, x0);
        const Sym2<double> gs = base_->values(to_source_->eval(x0));
        Sym2<double> out;
        for (int pr = 0; pr < NPAIR; ++pr) {
            const auto [m, n] = kPairs.unpack[pr];
            double acc = 0.0;
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q)
                    acc += D.j1[p * 4 + m] * D.j1[q * 4 + n] * sym2_at(gs, p, q);
            out[pr] = acc;
        }
        return out;
    }

  private:
    FamilyPtr base_;
    MapPtr to_source_;
    std::string name_;
};

inline FamilyPtr transported_family(FamilyPtr base, const Diffeo& d) {
    return std::make_shared<TransportedFamily>(base, d.inv, base->name() + "@" + d.name);
}

class TransportedField final : public ScalarField {
  public:
    TransportedField(FieldPtr base, MapPtr to_source, std::string name)
        : base_(std::move(base)), to_source_(std::move(to_source)), name_(std::move(name)) {}

    const std::string& name() const override { return name_; }

    Taylor eval_taylor(const std::array<Taylor, 4>&) const override {
        throw std::logic_error("transported field supports point series only");
    }

    Taylor series(const std::array<double, 4>& x0, int order) const override {
        std::array<Taylor, 4> targs;
        for (int i = 0; i < 4; ++i) targs[i] = taylor_var(x0[i], i, order);
        return base_->eval_taylor(to_source_->eval(targs));
    }

  private:
    FieldPtr base_;
    MapPtr to_source_;
    std::string name_;
};

inline FieldPtr transported_field(FieldPtr base, const Diffeo& d) {
    return std::make_shared<TransportedField>(base, d.inv, base->name() + "@" + d.name);
}

// ---- built-in diffeomorphisms -------------------------------------------

inline Diffeo identity_diffeo() {
    auto id = [](const auto& x) { return x; };
    return {"identity", make_map(id), make_map(id)};
}

// Integer unimodular linear part plus a translation; the inverse matrix is
// exact.
inline Diffeo linear_diffeo() {
    [[maybe_unused]] static constexpr double M[16] = {1, 1, 0, 0, 1, 2, 1, 0,
                                                      0, 1, 2, 1, 0, 0, 1, 2};
    [[maybe_unused]] static constexpr double W[16] = {4,  -3, 2, -1, -3, 3, -2, 1,
                                                      2,  -2, 2, -1, -1, 1, -1, 1};
    [[maybe_unused]] static constexpr double c[4] = {0.1, -0.2, 0.05, 0.3};
    auto fwd = [](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        std::array<S, 4> r;
        for (int i = 0; i < 4; ++i) {
            S acc(c[i]);
            for (int j = 0; j < 4; ++j) acc += M[i * 4 + j] * x[j];
            r[i] = acc;
        }
        return r;
    };
    auto inv = [](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        std::array<S, 4> r;
        for (int i = 0; i < 4; ++i) {
            S acc(0.0);
            for (int j = 0; j < 4; ++j) acc += W[i * 4 + j] * (x[j] - c[j]);
            r[i] = acc;
        }
        return r;
    };
    return {"linear", make_map(fwd), make_map(inv)};
}

// Triangular shears: coordinate i is displaced by a polynomial in the later
// coordinates only, so the inverse is exact back-substitution.
inline Diffeo quadratic_shear_diffeo(double eps = 0.01) {
    auto fwd = [eps](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        std::array<S, 4> r = x;
        r[2] = x[2] + eps * x[3] * x[3];
        r[1] = x[1] + eps * (x[2] * x[2] - x[3] * x[3]);
        r[0] = x[0] + eps * (x[1] * x[1] + 2.0 * x[2] * x[3]);
        return r;
    };
    auto inv = [eps](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        std::array<S, 4> r = x;
        r[2] = x[2] - eps * x[3] * x[3];
        r[1] = x[1] - eps * (r[2] * r[2] - x[3] * x[3]);
        r[0] = x[0] - eps * (r[1] * r[1] + 2.0 * r[2] * x[3]);
        return r;
    };
    return {"quad_shear", make_map(fwd), make_map(inv)};
}

inline Diffeo cubic_shear_diffeo(double eps = 0.01) {
    auto fwd = [eps](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        std::array<S, 4> r = x;
        r[2] = x[2] + eps * x[3] * x[3] * x[3];
        r[1] = x[1] + eps * (x[2] * x[2] * x[2] + x[2] * x[3] * x[3]);
        r[0] = x[0] + eps * (x[1] * x[1] * x[1] + x[2] * x[2] * x[3]);
        return r;
    };
    auto inv = [eps](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        std::array<S, 4> r = x;
        r[2] = x[2] - eps * x[3] * x[3] * x[3];
        r[1] = x[1] - eps * (r[2] * r[2] * r[2] + r[2] * x[3] * x[3]);
        r[0] = x[0] - eps * (r[1] * r[1] * r[1] + r[2] * r[2] * x[3]);
        return r;
    };
    return {"cubic_shear", make_map(fwd), make_map(inv)};
}

// Seeded triangular shear with random quadratic and cubic terms.
inline Diffeo random_shear_diffeo(Rng& rng, double eps = 0.01) {
    std::array<double, 9> a0;
    std::array<double, 6> a1;
    std::array<double, 2> a2;
    for (auto& c : a0) c = rng.uniform(-1.0, 1.0);
    for (auto& c : a1) c = rng.uniform(-1.0, 1.0);
    for (auto& c : a2) c = rng.uniform(-1.0, 1.0);
    const double c3 = rng.uniform(-0.2, 0.2);
    auto q0 = [a0](const auto& u1, const auto& u2, const auto& u3) {
        return a0[0] * u1 * u1 + a0[1] * u2 * u2 + a0[2] * u3 * u3 + a0[3] * u1 * u2 +
               a0[4] * u1 * u3 + a0[5] * u2 * u3 + a0[6] * u1 * u1 * u1 +
               a0[7] * u2 * u2 * u2 + a0[8] * u3 * u3 * u3;
    };
    auto q1 = [a1](const auto& u2, const auto& u3) {
        return a1[0] * u2 * u2 + a1[1] * u3 * u3 + a1[2] * u2 * u3 + a1[3] * u2 * u2 * u2 +
               a1[4] * u3 * u3 * u3 + a1[5] * u2 * u2 * u3;
    };
    auto q2 = [a2](const auto& u3) { return a2[0] * u3 * u3 + a2[1] * u3 * u3 * u3; };
    auto fwd = [=](const auto& x) {
        std::array<std::decay_t<decltype(x[0])>, 4> r = x;
        r[3] = x[3] + c3;
        r[2] = x[2] + eps * q2(x[3]);
        r[1] = x[1] + eps * q1(x[2], x[3]);
        r[0] = x[0] + eps * q0(x[1], x[2], x[3]);
        return r;
    };
    auto inv = [=](const auto& x) {
        std::array<std::decay_t<decltype(x[0])>, 4> r = x;
        r[3] = x[3] - c3;
        r[2] = x[2] - eps * q2(r[3]);
        r[1] = x[1] - eps * q1(r[2], r[3]);
        r[0] = x[0] - eps * q0(r[1], r[2], r[3]);
        return r;
    };
    return {"random_shear", make_map(fwd), make_map(inv)};
}

// User-supplied diffeo from expression quadruples for both directions.
inline Diffeo expr_diffeo(std::string name, const std::array<ExprPtr, 4>& fwd,
                          const std::array<ExprPtr, 4>& inv) {
    auto mk = [](std::array<ExprPtr, 4> comps) {
        return make_map([comps](const auto& x) {
            using S = std::decay_t<decltype(x[0])>;
            std::array<S, 4> r;
            for (int i = 0; i < 4; ++i) r[i] = eval_expr<S>(*comps[i], x, nullptr);
            return r;
        });
    };
    return {std::move(name), mk(fwd), mk(inv)};
}

inline double diffeo_roundtrip_residual(const Diffeo& d, const std::array<double, 4>& x) {
    const std::array<double, 4> back = d.inv->eval(d.fwd->eval(x));
    double r = 0.0;
    for (int i = 0; i < 4; ++i) r = std::max(r, std::abs(back[i] - x[i]));
    return r;
}

} // namespace dedonder
