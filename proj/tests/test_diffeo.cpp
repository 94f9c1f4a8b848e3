#include "dedonder/diffeo.hpp"
#include "dedonder/families.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

using namespace dedonder;

namespace {

std::vector<Diffeo> builtin_diffeos(Rng& rng) {
    std::vector<Diffeo> ds;
    ds.push_back(linear_diffeo());
    ds.push_back(quadratic_shear_diffeo());
    ds.push_back(cubic_shear_diffeo());
    ds.push_back(random_shear_diffeo(rng));
    return ds;
}

SysJet shift_jet(SysJet j, const SysVec& v, double s) {
    for (int i = 0; i < 4; ++i) j.x[i] += s * v.dx[i];
    for (int i = 0; i < NPAIR; ++i) j.y[i] += s * v.dy[i];
    for (int i = 0; i < NZ1; ++i) j.z1[i] += s * v.dz1[i];
    for (int i = 0; i < NZ2; ++i) j.z2[i] += s * v.dz2[i];
    for (int i = 0; i < NZ3; ++i) j.z3[i] += s * v.dz3[i];
    if (j.has_field) {
        j.t += s * v.dt;
        for (int i = 0; i < 4; ++i) j.tz[i] += s * v.dtz[i];
    }
    return j;
}

double max_jet_diff_order2(const SysJet& a, const SysJet& b) {
    double r = 0.0;
    for (int i = 0; i < 4; ++i) r = std::max(r, std::abs(a.x[i] - b.x[i]));
    for (int i = 0; i < NPAIR; ++i) r = std::max(r, std::abs(a.y[i] - b.y[i]));
    for (int i = 0; i < NZ1; ++i) r = std::max(r, std::abs(a.z1[i] - b.z1[i]));
    for (int i = 0; i < NZ2; ++i) r = std::max(r, std::abs(a.z2[i] - b.z2[i]));
    if (a.has_field && b.has_field) {
        r = std::max(r, std::abs(a.t - b.t));
        for (int i = 0; i < 4; ++i) r = std::max(r, std::abs(a.tz[i] - b.tz[i]));
        for (int i = 0; i < NPAIR; ++i) r = std::max(r, std::abs(a.tz2[i] - b.tz2[i]));
    }
    return r;
}

} // namespace

TEST_CASE("built-in diffeos invert exactly") {
    Rng rng(5501);
    auto ds = builtin_diffeos(rng);
    ds.push_back(identity_diffeo());
    for (const auto& d : ds)
        for (int rep = 0; rep < 20; ++rep) {
            std::array<double, 4> x{};
            for (auto& c : x) c = rng.uniform(-2.0, 2.0);
            REQUIRE(diffeo_roundtrip_residual(d, x) < 1e-13);
        }
}

TEST_CASE("chart derivative blocks agree with finite differences") {
    Rng rng(5502);
    for (const auto& d : builtin_diffeos(rng)) {
        std::array<double, 4> x{};
        for (auto& c : x) c = rng.uniform(-1.0, 1.0);
        for (const CoordinateMap* mp : {d.fwd.get(), d.inv.get()}) {
            const MapJetsT<double> mj = map_jets(*mp, x);
            for (int o = 0; o < 4; ++o) {
                auto comp = [&](const std::array<double, 4>& p) { return mp->eval(p)[o]; };
                for (int a = 0; a < 4; ++a) {
                    std::array<int, 4> m1{};
                    m1[a] += 1;
                    REQUIRE(std::abs(mj.j1[o * 4 + a] - richardson_partial(comp, x, m1)) < 1e-9);
                    for (int b = a; b < 4; ++b) {
                        auto m2 = m1;
                        m2[b] += 1;
                        REQUIRE(std::abs(mj.j2[(o * 4 + a) * 4 + b] -
                                         richardson_partial(comp, x, m2)) < 1e-8);
                        for (int c = b; c < 4; ++c) {
                            auto m3 = m2;
                            m3[c] += 1;
                            REQUIRE(std::abs(mj.j3[((o * 4 + a) * 4 + b) * 4 + c] -
                                             richardson_partial(comp, x, m3)) < 1e-7);
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("forward and inverse chart derivatives compose to the identity") {
    Rng rng(5503);
    for (const auto& d : builtin_diffeos(rng))
        for (int rep = 0; rep < 5; ++rep) {
            std::array<double, 4> x{};
            for (auto& c : x) c = rng.uniform(-1.0, 1.0);
            const auto xp = d.fwd->eval(x);
            const MapJetsT<double> A = map_jets(*d.fwd, x);
            const MapJetsT<double> B = map_jets(*d.inv, xp);
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k < 4; ++k) {
                    double acc = 0.0;
                    for (int j = 0; j < 4; ++j) acc += B.j1[i * 4 + j] * A.j1[j * 4 + k];
                    REQUIRE(std::abs(acc - (i == k ? 1.0 : 0.0)) < 1e-12);
                }
            REQUIRE(std::abs(A.det1 * B.det1 - 1.0) < 1e-12);
        }
}

TEST_CASE("dual chart derivatives carry directional derivatives") {
    Rng rng(5504);
    for (const auto& d : builtin_diffeos(rng)) {
        std::array<double, 4> x{}, u{};
        for (auto& c : x) c = rng.uniform(-1.0, 1.0);
        for (auto& c : u) c = rng.uniform(-1.0, 1.0);
        const MapJetsT<Dual<double>> md = map_jets(*d.fwd, x, u);
        for (int o = 0; o < 4; ++o)
            for (int a = 0; a < 4; ++a) {
                double acc = 0.0;
                for (int c = 0; c < 4; ++c) acc += md.j2[(o * 4 + a) * 4 + c].v * u[c];
                REQUIRE(std::abs(md.j1[o * 4 + a].d - acc) < 1e-12);
                for (int b = 0; b < 4; ++b) {
                    double acc2 = 0.0;
                    for (int c = 0; c < 4; ++c)
                        acc2 += md.j3[((o * 4 + a) * 4 + b) * 4 + c].v * u[c];
                    REQUIRE(std::abs(md.j2[(o * 4 + a) * 4 + b].d - acc2) < 1e-12);
                }
            }
    }
}

TEST_CASE("jet transformation matches re-prolongation of the transported family") {
    Rng rng(5505);
    std::vector<FamilyPtr> fams;
    for (int i = 0; i < 3; ++i) fams.push_back(random_poly_family(rng));
    for (const auto& d : builtin_diffeos(rng))
        for (const auto& fam : fams) {
            std::array<double, 4> x{};
            for (auto& c : x) c = rng.uniform(-0.5, 0.5);
            const auto fp = transported_family(fam, d);
            const std::array<double, 4> xp = d.fwd->eval(x);
            const SysJet j = prolong(*fam, x, 3);
            const SysJet jp = prolong(*fp, xp, 3);
            REQUIRE(max_jet_diff_order2(transform_jet_forward(j, d), jp) < 1e-9);
            REQUIRE(max_jet_diff_order2(transform_jet_backward(jp, d), j) < 1e-9);
        }
    SECTION("schwarzschild under a shear") {
        auto fam = schwarzschild_family(1.0);
        const Diffeo d = quadratic_shear_diffeo();
        const std::array<double, 4> x{0.4, 5.0, 1.3, 0.7};
        const auto fp = transported_family(fam, d);
        const std::array<double, 4> xp = d.fwd->eval(x);
        const SysJet j = prolong(*fam, x, 3);
        const SysJet jp = prolong(*fp, xp, 3);
        REQUIRE(max_jet_diff_order2(transform_jet_forward(j, d), jp) < 1e-8);
        REQUIRE(max_jet_diff_order2(transform_jet_backward(jp, d), j) < 1e-8);
    }
}

TEST_CASE("transported families carry fields along") {
    Rng rng(5506);
    auto fam = random_poly_family(rng);
    auto phi = random_poly_field(rng);
    const Diffeo d = cubic_shear_diffeo();
    const std::array<double, 4> x{0.2, -0.3, 0.4, -0.1};
    const std::array<double, 4> xp = d.fwd->eval(x);
    const auto fp = transported_family(fam, d);
    const auto pp = transported_field(phi, d);

    SysJet j = prolong(*fam, x, 3);
    attach_field(j, *phi);
    SysJet jp = prolong(*fp, xp, 3);
    attach_field(jp, *pp);

    REQUIRE(std::abs(jp.t - j.t) < 1e-12); // scalar: same value at matched points
    REQUIRE(max_jet_diff_order2(transform_jet_forward(j, d), jp) < 1e-9);
    REQUIRE(max_jet_diff_order2(transform_jet_backward(jp, d), j) < 1e-9);
}

TEST_CASE("transported family series agree with finite differences of values") {
    Rng rng(5507);
    auto fam = random_poly_family(rng);
    const Diffeo d = quadratic_shear_diffeo();
    const auto fp = transported_family(fam, d);
    std::array<double, 4> xp{0.15, -0.2, 0.3, 0.1};
    const Sym2<Taylor> s = fp->series(xp, 2);
    for (int p = 0; p < NPAIR; ++p) {
        auto comp = [&](const std::array<double, 4>& q) { return fp->values(q)[p]; };
        for (int a = 0; a < 4; ++a) {
            std::array<int, 4> m1{};
            m1[a] += 1;
            REQUIRE(std::abs(taylor_partial(s[p], m1) - richardson_partial(comp, xp, m1)) <
                    1e-7);
            for (int b = a; b < 4; ++b) {
                auto m2 = m1;
                m2[b] += 1;
                REQUIRE(std::abs(taylor_partial(s[p], m2) -
                                 richardson_partial(comp, xp, m2)) < 1e-6);
            }
        }
    }
}

TEST_CASE("pushforward is the differential of the jet transformation") {
    Rng rng(5508);
    JetSampler js;
    for (const auto& d : builtin_diffeos(rng))
        for (int rep = 0; rep < 2; ++rep) {
            const bool with_field = (rep == 1);
            const SysJet j = js.sample(rng, with_field);
            const SysVec v = js.sample_vector(rng, with_field);
            const SysVec push = pushforward_vector(d, j, v);
            const double h = 1e-5;
            const SysJet fplus = transform_jet_forward(shift_jet(j, v, h), d);
            const SysJet fminus = transform_jet_forward(shift_jet(j, v, -h), d);
            auto fd = [&](double a, double b) { return (a - b) / (2.0 * h); };
            for (int i = 0; i < 4; ++i)
                REQUIRE(std::abs(push.dx[i] - fd(fplus.x[i], fminus.x[i])) < 1e-8);
            for (int i = 0; i < NPAIR; ++i)
                REQUIRE(std::abs(push.dy[i] - fd(fplus.y[i], fminus.y[i])) < 1e-7);
            for (int i = 0; i < NZ1; ++i)
                REQUIRE(std::abs(push.dz1[i] - fd(fplus.z1[i], fminus.z1[i])) < 1e-7);
            for (int i = 0; i < NZ2; ++i)
                REQUIRE(std::abs(push.dz2[i] - fd(fplus.z2[i], fminus.z2[i])) < 1e-6);
            if (with_field) {
                REQUIRE(std::abs(push.dt - fd(fplus.t, fminus.t)) < 1e-8);
                for (int i = 0; i < 4; ++i)
                    REQUIRE(std::abs(push.dtz[i] - fd(fplus.tz[i], fminus.tz[i])) < 1e-7);
            }
        }
}

TEST_CASE("identity diffeo acts trivially on jets and vectors") {
    Rng rng(5509);
    JetSampler js;
    const Diffeo d = identity_diffeo();
    const SysJet j = js.sample(rng, true);
    REQUIRE(max_jet_diff_order2(transform_jet_forward(j, d), j) < 1e-14);
    const SysVec v = js.sample_vector(rng, true);
    const SysVec p = pushforward_vector(d, j, v);
    double r = 0.0;
    for (int i = 0; i < 4; ++i) r = std::max(r, std::abs(p.dx[i] - v.dx[i]));
    for (int i = 0; i < NPAIR; ++i) r = std::max(r, std::abs(p.dy[i] - v.dy[i]));
    for (int i = 0; i < NZ1; ++i) r = std::max(r, std::abs(p.dz1[i] - v.dz1[i]));
    for (int i = 0; i < NZ2; ++i) r = std::max(r, std::abs(p.dz2[i] - v.dz2[i]));
    r = std::max(r, std::abs(p.dt - v.dt));
    for (int i = 0; i < 4; ++i) r = std::max(r, std::abs(p.dtz[i] - v.dtz[i]));
    REQUIRE(r < 1e-14);
}

TEST_CASE("expression-defined diffeos match their closed-form counterpart") {
    const double e = 0.01;
    std::array<ExprPtr, 4> fwd = {
        parse_expr("x1 + 0.01 * (x2^2 + 2 * x3 * x4)"),
        parse_expr("x2 + 0.01 * (x3^2 - x4^2)"),
        parse_expr("x3 + 0.01 * x4^2"),
        parse_expr("x4"),
    };
    std::array<ExprPtr, 4> inv = {
        parse_expr("x1 - 0.01 * ((x2 - 0.01 * ((x3 - 0.01 * x4^2)^2 - x4^2))^2 + 2 * (x3 - "
                   "0.01 * x4^2) * x4)"),
        parse_expr("x2 - 0.01 * ((x3 - 0.01 * x4^2)^2 - x4^2)"),
        parse_expr("x3 - 0.01 * x4^2"),
        parse_expr("x4"),
    };
    const Diffeo de = expr_diffeo("expr_shear", fwd, inv);
    const Diffeo db = quadratic_shear_diffeo(e);
    Rng rng(5510);
    for (int rep = 0; rep < 10; ++rep) {
        std::array<double, 4> x{};
        for (auto& c : x) c = rng.uniform(-1.5, 1.5);
        REQUIRE(diffeo_roundtrip_residual(de, x) < 1e-13);
        const auto a = de.fwd->eval(x);
        const auto b = db.fwd->eval(x);
        for (int i = 0; i < 4; ++i) REQUIRE(std::abs(a[i] - b[i]) < 1e-14);
    }
}
