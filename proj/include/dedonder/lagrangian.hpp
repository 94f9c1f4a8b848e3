#pragma once

#include "dedonder/expr.hpp"
#include "dedonder/geometry.hpp"
#include "dedonder/jet.hpp"
#include "dedonder/scalar.hpp"

#include <memory>
#include <string>
#include <utility>

// Lagrangian densities as functions on the (second) jet coordinates.  The
// polymorphic wrapper exposes one virtual evaluation per scalar kind the
// engine differentiates through: plain numbers, up to three nested dual
// layers for momenta and their derivatives, and truncated series (with one
// dual layer) for section-level work.

namespace dedonder {

#define DEDONDER_SCALAR_TYPES(X) \
    X(double)                    \
    X(Dual<double>)              \
    X(Dual<Dual<double>>)        \
    X(Dual<Dual<Dual<double>>>)  \
    X(Taylor)                    \
    X(Dual<Taylor>)

class Lagrangian {
  public:
    virtual ~Lagrangian() = default;
    virtual const std::string& name() const = 0;
    virtual bool reads_field() const = 0;
#define DEDONDER_DECL(S_) virtual S_ eval(const SysJetT<S_>& j) const = 0;
    DEDONDER_SCALAR_TYPES(DEDONDER_DECL)
#undef DEDONDER_DECL
};

using LagrangianPtr = std::shared_ptr<const Lagrangian>;

template <class Impl>
class LagrangianT final : public Lagrangian {
  public:
    LagrangianT(std::string name, bool reads_field, Impl f)
        : name_(std::move(name)), reads_field_(reads_field), f_(std::move(f)) {}
    const std::string& name() const override { return name_; }
    bool reads_field() const override { return reads_field_; }
#define DEDONDER_IMPL(S_) \
    S_ eval(const SysJetT<S_>& j) const override { return f_(j); }
    DEDONDER_SCALAR_TYPES(DEDONDER_IMPL)
#undef DEDONDER_IMPL

  private:
    std::string name_;
    bool reads_field_;
    Impl f_;
};

template <class Impl>
LagrangianPtr make_lagrangian(std::string name, bool reads_field, Impl f) {
    return std::make_shared<LagrangianT<Impl>>(std::move(name), reads_field, std::move(f));
}

// ---- gravity: scalar curvature split into first- and second-order parts ---

template <class S>
S gravity_density(const SysJetT<S>& j) {
    const MetricPack<S> mp = metric_pack(j.y);
    const auto G1 = christoffel_first(j.z1);
    const auto G2 = christoffel_second(mp.ginv, G1);
    const auto up3 = christoffel_up3(mp.ginv, G2);
    const auto tr = gamma_traces(mp.ginv, G1, G2);
    return (quad_term_staged(G1, up3, tr) + second_order_term(mp.ginv, j.z2)) * mp.sqrtmg;
}

inline LagrangianPtr gravity_lagrangian() {
    return make_lagrangian("gravity", false,
                           [](const auto& j) { return gravity_density(j); });
}

// ---- minimally coupled scalar field --------------------------------------

// (1/2 g^{mn} dphi_m dphi_n + V(phi)) sqrt(-det g); the potential is an
// expression in the field value (bound to t), with the base point available.
template <class S>
S scalar_matter_density(const SysJetT<S>& j, const Expr* V) {
    const MetricPack<S> mp = metric_pack(j.y);
    S kin(0.0);
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) kin += sym2_at(mp.ginv, m, n) * j.tz[m] * j.tz[n];
    S pot(0.0);
    if (V != nullptr) pot = eval_expr(*V, j.x, &j.t);
    return (0.5 * kin + pot) * mp.sqrtmg;
}

// A null potential means V == 0.
inline LagrangianPtr scalar_matter_lagrangian(ExprPtr V) {
    return make_lagrangian("scalar_matter", true, [V](const auto& j) {
        return scalar_matter_density(j, V.get());
    });
}

inline LagrangianPtr total_lagrangian(ExprPtr V) {
    return make_lagrangian("total", true, [V](const auto& j) {
        return gravity_density(j) + scalar_matter_density(j, V.get());
    });
}

// Deliberately non-covariant density used as the negative control: a bare
// coordinate component transforms with Jacobian factors no scalar density
// matches, so every invariance check must reject it.
inline LagrangianPtr broken_control_lagrangian() {
    return make_lagrangian("broken_control", false, [](const auto& j) {
        return j.y[pair_index(0, 0)];
    });
}

} // namespace dedonder
