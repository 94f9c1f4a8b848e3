#include "dedonder/euler_lagrange.hpp"
#include "dedonder/families.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

using namespace dedonder;

namespace {

double el_max_rel(const ELResidual& r) {
    double m = 0.0;
    for (int p = 0; p < NPAIR; ++p) m = std::max(m, std::abs(r.value[p]));
    return m / std::max(1.0, r.scale);
}

} // namespace

TEST_CASE("flat space gives an exactly zero gravity field equation") {
    auto L = gravity_lagrangian();
    auto fam = minkowski_family();
    const std::array<double, 4> x{0.3, -0.7, 0.2, 1.1};
    const ELResidual a = el_residual(*L, *fam, nullptr, x);
    const ELResidual b = el_residual_expanded(*L, *fam, nullptr, x);
    for (int p = 0; p < NPAIR; ++p) {
        REQUIRE(a.value[p] == 0.0);
        REQUIRE(b.value[p] == 0.0);
    }
}

TEST_CASE("vacuum solutions satisfy the gravity field equations") {
    auto L = gravity_lagrangian();
    SECTION("schwarzschild") {
        auto fam = schwarzschild_family(1.0);
        Rng rng(7701);
        for (int i = 0; i < 20; ++i) {
            const std::array<double, 4> x{rng.uniform(-1.0, 1.0), rng.uniform(2.5, 10.0),
                                          rng.uniform(0.5, 2.6), rng.uniform(-1.0, 1.0)};
            REQUIRE(el_max_rel(el_residual(*L, *fam, nullptr, x)) < 1e-7);
        }
    }
    SECTION("kasner") {
        auto fam = kasner_family();
        Rng rng(7702);
        for (int i = 0; i < 10; ++i) {
            const std::array<double, 4> x{rng.uniform(0.5, 3.0), rng.uniform(-1.0, 1.0),
                                          rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            REQUIRE(el_max_rel(el_residual(*L, *fam, nullptr, x)) < 1e-7);
        }
    }
}

TEST_CASE("the two printed field-equation routes agree off-shell") {
    auto L = gravity_lagrangian();
    Rng rng(7703);
    for (int rep = 0; rep < 8; ++rep) {
        auto fam = random_poly_family(rng);
        std::array<double, 4> x{};
        for (auto& c : x) c = rng.uniform(-0.5, 0.5);
        const ELResidual a = el_residual(*L, *fam, nullptr, x);
        const ELResidual b = el_residual_expanded(*L, *fam, nullptr, x);
        double diff = 0.0;
        for (int p = 0; p < NPAIR; ++p) diff = std::max(diff, std::abs(a.value[p] - b.value[p]));
        REQUIRE(diff / std::max(1.0, std::max(a.scale, b.scale)) < 1e-9);
    }
}

TEST_CASE("gravity field equation is proportional to the einstein density with one global "
          "sign") {
    auto L = gravity_lagrangian();
    Rng rng(7704);
    auto first = random_poly_family(rng);
    const std::array<double, 4> x0{0.1, -0.2, 0.3, 0.05};
    const int s = measure_einstein_sign(*L, *first, x0);
    REQUIRE((s == 1 || s == -1));
    for (int rep = 0; rep < 6; ++rep) {
        auto fam = random_poly_family(rng);
        for (int pt = 0; pt < 2; ++pt) {
            std::array<double, 4> x{};
            for (auto& c : x) c = rng.uniform(-0.5, 0.5);
            const ELResidual e = el_residual(*L, *fam, nullptr, x);
            const Sym2<double> g = einstein_tensor_density(*fam, x);
            double diff = 0.0, mag = 0.0;
            for (int p = 0; p < NPAIR; ++p) {
                diff = std::max(diff, std::abs(e.value[p] - s * g[p]));
                mag = std::max(mag, std::abs(g[p]));
            }
            REQUIRE(mag > 1e-4); // non-vacuum sample, the comparison is non-trivial
            REQUIRE(diff / std::max(1.0, e.scale) < 1e-7);
        }
    }
}

TEST_CASE("einstein density vanishes on vacuum solutions") {
    auto fam = schwarzschild_family(1.0);
    const Sym2<double> g = einstein_tensor_density(*fam, {0.0, 4.0, 1.3, 0.2});
    for (int p = 0; p < NPAIR; ++p) REQUIRE(std::abs(g[p]) < 1e-8);
}

TEST_CASE("the de donder equation system closes") {
    auto L = gravity_lagrangian();
    Rng rng(7705);
    for (int rep = 0; rep < 5; ++rep) {
        auto fam = random_poly_family(rng);
        std::array<double, 4> x{};
        for (auto& c : x) c = rng.uniform(-0.5, 0.5);
        const DeDonderResiduals r = de_donder_equations(*L, *fam, nullptr, x);
        REQUIRE(r.top < 1e-12);
        REQUIRE(r.mid < 1e-10);
        const ELResidual direct = el_residual(*L, *fam, nullptr, x);
        for (int p = 0; p < NPAIR; ++p)
            REQUIRE(std::abs(r.el.value[p] - direct.value[p]) < 1e-12);
    }
    SECTION("vacuum bottom equation") {
        auto fam = schwarzschild_family(1.0);
        const DeDonderResiduals r = de_donder_equations(*L, *fam, nullptr, {0.2, 6.0, 1.0, 0.5});
        REQUIRE(el_max_rel(r.el) < 1e-7);
    }
}

TEST_CASE("scalar field equation on flat space") {
    auto Lm = scalar_matter_lagrangian(nullptr);
    auto fam = minkowski_family();
    const std::array<double, 4> x{0.4, 0.7, -0.3, 0.9};

    SECTION("constant and linear fields are solutions") {
        auto c = make_field("const_field", [](const auto& xx) {
            using S = std::decay_t<decltype(xx[0])>;
            (void)xx;
            return S(2.5);
        });
        REQUIRE(std::abs(scalar_field_el_residual(*Lm, *fam, *c, x)) < 1e-12);
        auto lin = make_field("linear_field", [](const auto& xx) { return xx[1]; });
        REQUIRE(std::abs(scalar_field_el_residual(*Lm, *fam, *lin, x)) < 1e-12);
    }

    SECTION("quadratic field has constant residual minus two") {
        auto q = quadratic_field();
        for (double shift : {0.0, 0.7, -1.3}) {
            std::array<double, 4> xs = x;
            xs[1] += shift;
            REQUIRE(std::abs(scalar_field_el_residual(*Lm, *fam, *q, xs) - (-2.0)) < 1e-9);
        }
    }

    SECTION("finite differences confirm the divergence term") {
        auto q = quadratic_field();
        auto qcomp = [&](const std::array<double, 4>& p) {
            const SysJetT<Taylor> js = section_jet_series(*fam, q.get(), p, 2);
            return momenta_on_section(*Lm, js).q[1].val();
        };
        std::array<int, 4> m{};
        m[1] = 1;
        const double divq = richardson_partial(qcomp, x, m);
        REQUIRE(std::abs(divq - 2.0) < 1e-9);
    }
}

TEST_CASE("scalar field equation on a curved background stays consistent across routes") {
    Rng rng(7706);
    auto V = parse_expr("0.5 * t^2");
    auto Lm = scalar_matter_lagrangian(V);
    for (int rep = 0; rep < 3; ++rep) {
        auto fam = random_poly_family(rng);
        auto phi = random_poly_field(rng);
        std::array<double, 4> x{};
        for (auto& c : x) c = rng.uniform(-0.4, 0.4);
        const double r = scalar_field_el_residual(*Lm, *fam, *phi, x);
        // independent: finite differences of the section-pulled-back momentum
        double divq = 0.0;
        for (int mu = 0; mu < 4; ++mu) {
            auto qcomp = [&](const std::array<double, 4>& p) {
                const SysJetT<Taylor> js = section_jet_series(*fam, phi.get(), p, 2);
                return momenta_on_section(*Lm, js).q[mu].val();
            };
            std::array<int, 4> m{};
            m[mu] = 1;
            divq += richardson_partial(qcomp, x, m, 0.04);
        }
        const SysJetT<Taylor> js = section_jet_series(*fam, phi.get(), x, 2);
        const double dldt = momenta_on_section(*Lm, js).dLdt.val();
        REQUIRE(std::abs(r - (dldt - divq)) < 1e-6);
    }
}
