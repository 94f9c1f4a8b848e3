#include "dedonder/families.hpp"
#include "dedonder/geometry.hpp"
#include "dedonder/jet.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace dedonder;

namespace {

double max_abs(double a, double b) { return std::max(std::abs(a), std::abs(b)); }

struct GeoBundle {
    MetricPack<double> mp;
    std::array<double, NZ1> G1, G2;
    std::array<double, 64> up3;
    GammaTraces<double> tr;
};

GeoBundle bundle(const SysJet& j) {
    GeoBundle b;
    b.mp = metric_pack(j.y);
    b.G1 = christoffel_first(j.z1);
    b.G2 = christoffel_second(b.mp.ginv, b.G1);
    b.up3 = christoffel_up3(b.mp.ginv, b.G2);
    b.tr = gamma_traces(b.mp.ginv, b.G1, b.G2);
    return b;
}

} // namespace

TEST_CASE("flat space has trivial geometry") {
    auto fam = minkowski_family();
    const SysJet j = prolong(*fam, {0.1, 0.2, 0.3, 0.4});
    const auto b = bundle(j);
    CHECK(b.mp.det == -1.0);
    CHECK(b.mp.sqrtmg == 1.0);
    for (int p = 0; p < NPAIR; ++p) CHECK(b.mp.ginv[p] == j.y[p]);
    for (int i = 0; i < NZ1; ++i) {
        CHECK(b.G1[i] == 0.0);
        CHECK(b.G2[i] == 0.0);
    }
    const auto cur = curvature(b.mp, b.G1, b.G2, j.z2);
    CHECK(cur.scal == 0.0);
    for (int i = 0; i < 256; ++i) CHECK(cur.riem[i] == 0.0);
}

TEST_CASE("inverse and determinant satisfy the defining identities on raw jets") {
    Rng rng(31u);
    JetSampler sampler;
    for (int rep = 0; rep < 50; ++rep) {
        const SysJet j = sampler.sample(rng);
        const auto mp = metric_pack(j.y);
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) {
                double acc = 0.0;
                for (int l = 0; l < 4; ++l) acc += sym2_at(mp.ginv, i, l) * sym2_at(j.y, l, k);
                CHECK(std::abs(acc - (i == k ? 1.0 : 0.0)) < 1e-12);
            }
        CHECK(mp.det < 0.0);
        CHECK(std::abs(mp.sqrtmg * mp.sqrtmg + mp.det) < 1e-12 * std::abs(mp.det));
    }
}

TEST_CASE("static polar and homogeneous cosmology families are Ricci-flat") {
    auto schw = schwarzschild_family(1.0);
    for (double r : {2.5, 4.0, 7.5}) {
        const SysJet j = prolong(*schw, {0.0, r, 1.2, 0.7});
        const auto b = bundle(j);
        const auto cur = curvature(b.mp, b.G1, b.G2, j.z2);
        for (int i = 0; i < 16; ++i) CHECK(std::abs(cur.ricci[i]) < 1e-10);
        CHECK(std::abs(cur.scal) < 1e-10);
        // Curvature itself is nonzero: this is not a trivial pass.
        double rmax = 0.0;
        for (int i = 0; i < 256; ++i) rmax = max_abs(rmax, cur.riem[i]);
        CHECK(rmax > 1e-3);
    }
    auto kas = kasner_family();
    for (double t : {0.6, 1.0, 2.5}) {
        const SysJet j = prolong(*kas, {t, 0.3, -0.2, 0.8});
        const auto b = bundle(j);
        const auto cur = curvature(b.mp, b.G1, b.G2, j.z2);
        for (int i = 0; i < 16; ++i) CHECK(std::abs(cur.ricci[i]) < 1e-9);
        double rmax = 0.0;
        for (int i = 0; i < 256; ++i) rmax = max_abs(rmax, cur.riem[i]);
        CHECK(rmax > 1e-3);
    }
}

TEST_CASE("trace families agree along their alternative contraction routes") {
    Rng rng(77u);
    JetSampler sampler;
    for (int rep = 0; rep < 20; ++rep) {
        const SysJet j = sampler.sample(rng);
        const auto b = bundle(j);
        // Lowering the inverse-weighted trace reproduces the lowered trace.
        for (int r = 0; r < 4; ++r) {
            double acc = 0.0;
            for (int l = 0; l < 4; ++l) acc += sym2_at(j.y, r, l) * b.tr.gamma_up[l];
            CHECK(scaled_err(acc, b.tr.gamma_dn[r]) < 1e-12);
        }
        // Mixed trace of the raised symbols equals delta_dn.
        for (int m = 0; m < 4; ++m) {
            double acc = 0.0;
            for (int l = 0; l < 4; ++l) acc += b.G2[l * NPAIR + pair_index(m, l)];
            CHECK(scaled_err(acc, b.tr.delta_dn[m]) < 1e-12);
        }
        // Raising delta_dn matches delta_up, raising gamma_dn matches gamma_up.
        for (int n = 0; n < 4; ++n) {
            double acc = 0.0;
            for (int m = 0; m < 4; ++m) acc += sym2_at(b.mp.ginv, n, m) * b.tr.gamma_dn[m];
            CHECK(scaled_err(acc, b.tr.gamma_up[n]) < 1e-12);
        }
    }
}

TEST_CASE("inverse-derivative formula matches truncated series differentiation") {
    Rng rng(13u);
    for (int rep = 0; rep < 4; ++rep) {
        auto fam = random_poly_family(rng);
        const std::array<double, 4> x{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                                      rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        const SysJet j = prolong(*fam, x);
        const auto b = bundle(j);
        const auto D = dginv_from_gamma(b.mp.ginv, b.G1);

        const Sym2<Taylor> gs = fam->series(x, 2);
        const MetricPack<Taylor> mps = metric_pack(gs);
        for (int p = 0; p < NPAIR; ++p)
            for (int c = 0; c < 4; ++c) {
                const Taylor d = series_derivative(mps.ginv[p], c);
                CHECK(scaled_err(D[p * 4 + c], d.val()) < 1e-11);
            }
    }
}

TEST_CASE("inverse-derivative formula is algebraically consistent on raw jets") {
    Rng rng(41u);
    JetSampler sampler;
    for (int rep = 0; rep < 20; ++rep) {
        const SysJet j = sampler.sample(rng);
        const auto b = bundle(j);
        const auto D = dginv_from_gamma(b.mp.ginv, b.G1);
        // d(g^{-1} g) = 0: D[ad|c] g_{db} + g^{ad} z_{db|c} = 0.
        for (int a = 0; a < 4; ++a)
            for (int bb = 0; bb < 4; ++bb)
                for (int c = 0; c < 4; ++c) {
                    double acc = 0.0;
                    for (int d = 0; d < 4; ++d)
                        acc += D[pair_index(a, d) * 4 + c] * sym2_at(j.y, d, bb) +
                               sym2_at(b.mp.ginv, a, d) * z1_at(j.z1, d, bb, c);
                    CHECK(std::abs(acc) < 1e-11);
                }
    }
}

TEST_CASE("curvature symmetries hold identically in the jet coordinates") {
    Rng rng(59u);
    JetSampler sampler;
    for (int rep = 0; rep < 10; ++rep) {
        const SysJet j = sampler.sample(rng);
        const auto b = bundle(j);
        const auto cur = curvature(b.mp, b.G1, b.G2, j.z2);
        for (int a = 0; a < 4; ++a)
            for (int bb = 0; bb < 4; ++bb)
                for (int c = 0; c < 4; ++c)
                    for (int d = 0; d < 4; ++d) {
                        const double r1 = cur.riem[((a * 4 + bb) * 4 + c) * 4 + d];
                        const double r2 = cur.riem[((a * 4 + bb) * 4 + d) * 4 + c];
                        CHECK(std::abs(r1 + r2) < 1e-11); // antisymmetry in the last pair
                        const double r3 = cur.riem[((a * 4 + c) * 4 + d) * 4 + bb];
                        const double r4 = cur.riem[((a * 4 + d) * 4 + bb) * 4 + c];
                        CHECK(std::abs(r1 + r3 + r4) < 1e-11); // first cyclic identity
                    }
        for (int bb = 0; bb < 4; ++bb)
            for (int d = bb + 1; d < 4; ++d)
                CHECK(std::abs(cur.ricci[bb * 4 + d] - cur.ricci[d * 4 + bb]) < 1e-11);
    }
}

TEST_CASE("literal and staged quadratic aggregates coincide") {
    Rng rng(67u);
    JetSampler sampler;
    for (int rep = 0; rep < 15; ++rep) {
        const SysJet j = sampler.sample(rng);
        const auto b = bundle(j);
        const double lit = quad_term_literal(b.mp.ginv, b.G1);
        const double st = quad_term_staged(b.G1, b.up3, b.tr);
        CHECK(scaled_err(lit, st) < 1e-12);
    }
}

TEST_CASE("scalar curvature splits into the two aggregates on arbitrary jets") {
    Rng rng(71u);
    JetSampler sampler;
    for (int rep = 0; rep < 25; ++rep) {
        const SysJet j = sampler.sample(rng);
        const auto b = bundle(j);
        const auto cur = curvature(b.mp, b.G1, b.G2, j.z2);
        const double r1 = quad_term_staged(b.G1, b.up3, b.tr);
        const double r2 = second_order_term(b.mp.ginv, j.z2);
        CHECK(scaled_err(cur.scal, r1 + r2) < 1e-10);
    }
}

TEST_CASE("volume-factor gradient identity holds on raw jets") {
    Rng rng(83u);
    JetSampler sampler;
    for (int rep = 0; rep < 25; ++rep) {
        const SysJet j = sampler.sample(rng);
        CHECK(grad_volume_residual(j) < 1e-10);
    }
    auto fam = schwarzschild_family(1.0);
    CHECK(grad_volume_residual(prolong(*fam, {0.0, 3.3, 0.9, 0.1})) < 1e-10);
}

TEST_CASE("Einstein density vanishes on vacuum solutions and traces correctly") {
    auto schw = schwarzschild_family(1.0);
    const SysJet jv = prolong(*schw, {0.0, 5.0, 1.0, 0.3});
    const Sym2<double> Ev = einstein_density(jv.x, jv.y, jv.z1, jv.z2);
    for (int p = 0; p < NPAIR; ++p) CHECK(std::abs(Ev[p]) < 1e-10);

    Rng rng(97u);
    for (int rep = 0; rep < 5; ++rep) {
        auto fam = random_poly_family(rng);
        const std::array<double, 4> x{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                                      rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        const SysJet j = prolong(*fam, x);
        const Sym2<double> E = einstein_density(j.x, j.y, j.z1, j.z2);
        const auto b = bundle(j);
        const auto cur = curvature(b.mp, b.G1, b.G2, j.z2);
        double tr = 0.0;
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n) tr += sym2_at(j.y, m, n) * sym2_at(E, m, n);
        CHECK(scaled_err(tr, -cur.scal * b.mp.sqrtmg) < 1e-10);
    }
}
