#include "dedonder/checks.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <string>

using namespace dedonder;

TEST_CASE("config text parses into sections and typed entries") {
    const std::string text =
        "# comment\n"
        "[run]\n"
        "seed = 7   # integers may carry trailing comments\n"
        "\n"
        "[family f]\n"
        "g11 = \"-1 - x2^2\"\n";
    const auto secs = parse_config(text);
    REQUIRE(secs.size() == 2);
    CHECK(secs[0].kind == "run");
    REQUIRE(secs[0].entries.size() == 1);
    CHECK(secs[0].entries[0].key == "seed");
    CHECK(secs[0].entries[0].value == "7");
    CHECK(secs[1].kind == "family");
    CHECK(secs[1].arg == "f");
    REQUIRE(secs[1].entries.size() == 1);
    CHECK(secs[1].entries[0].quoted);
    CHECK(secs[1].entries[0].value == "-1 - x2^2");
}

TEST_CASE("config errors carry line numbers") {
    CHECK_THROWS_AS(parse_config("[run\nseed=1\n"), ConfigError);
    try {
        parse_config("[run]\nnonsense line\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 2);
    }
    try {
        run_plan_from_config("[run]\nseed = notanumber\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 2);
    }
    try {
        run_plan_from_config("[field]\nexpr = \"x1 +\"\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 2);
        CHECK(std::string(e.what()).find("parse error") != std::string::npos);
    }
}

namespace {

const char* kCustomText =
    "[run]\n"
    "seed = 9\n"
    "points = 2\n"
    "lagrangian = gravity+scalar\n"
    "[families]\n"
    "use = minkowski, bumpy\n"
    "[family bumpy]\n"
    "g11 = \"-1 - 0.05 * x2^2\"\n"
    "g22 = \"1 + 0.04 * x1 * x3\"\n"
    "g12 = \"0.02 * x3\"\n"
    "[diffeos]\n"
    "use = linear, stretch\n"
    "[diffeo stretch]\n"
    "fwd1 = \"x1 + 0.02 * x2^2\"\n"
    "fwd2 = \"x2 + 0.01 * x3^3\"\n"
    "fwd3 = \"x3 - 0.015 * x4^2\"\n"
    "fwd4 = \"x4 + 0.1\"\n"
    "inv1 = \"x1 - 0.02 * (x2 - 0.01 * (x3 + 0.015 * (x4 - 0.1)^2)^3)^2\"\n"
    "inv2 = \"x2 - 0.01 * (x3 + 0.015 * (x4 - 0.1)^2)^3\"\n"
    "inv3 = \"x3 + 0.015 * (x4 - 0.1)^2\"\n"
    "inv4 = \"x4 - 0.1\"\n"
    "[field]\n"
    "expr = \"x2^2 + 0.3 * x1 * x3\"\n"
    "[potential]\n"
    "expr = \"0.25 * t^2\"\n"
    "[tolerances]\n"
    "covariance.density = 1e-9\n";

} // namespace

TEST_CASE("custom families and diffeos resolve from config") {
    const RunPlan plan = run_plan_from_config(kCustomText);
    CHECK(plan.seed == 9);
    CHECK(plan.points == 2);
    CHECK(plan.lagrangian == "gravity+scalar");
    REQUIRE(plan.families.size() == 2);
    CHECK(plan.families[0]->name() == "minkowski");
    CHECK(plan.families[1]->name() == "bumpy");
    REQUIRE(plan.diffeos.size() == 2);
    CHECK(plan.diffeos[1].name == "stretch");
    CHECK(plan.tols.at("covariance.density") == 1e-9);

    // the expression family fills unspecified components with flat entries
    const Sym2<double> g = plan.families[1]->values({0.2, 0.3, -0.1, 0.4});
    CHECK(g[pair_index(0, 0)] == Catch::Approx(-1.0 - 0.05 * 0.09).margin(1e-14));
    CHECK(g[pair_index(3, 3)] == 1.0);
    CHECK(g[pair_index(1, 2)] == 0.0);
    CHECK(lorentzian_minors(g));

    // the expression diffeo's stated inverse is exact
    for (double s : {-0.3, 0.1, 0.4}) {
        const std::array<double, 4> x{s, -s, 0.2 + s, 0.1};
        CHECK(diffeo_roundtrip_residual(plan.diffeos[1], x) < 1e-12);
    }
}

TEST_CASE("bad references and malformed sections are rejected") {
    CHECK_THROWS_AS(run_plan_from_config("[families]\nuse = nosuch\n"), ConfigError);
    CHECK_THROWS_AS(run_plan_from_config("[diffeos]\nuse = nosuch\n"), ConfigError);
    CHECK_THROWS_AS(run_plan_from_config("[family f]\nq11 = \"1\"\n"), ConfigError);
    CHECK_THROWS_AS(
        run_plan_from_config("[diffeos]\nuse = partial\n[diffeo partial]\nfwd1 = \"x1\"\n"),
        ConfigError);
    CHECK_THROWS_AS(run_plan_from_config("[run]\nlagrangian = other\n"), ConfigError);
    CHECK_THROWS_AS(run_plan_from_config("[points]\np1 = 1 2 3\n"), ConfigError);
}

TEST_CASE("identical plans produce identical report bytes") {
    const Reports a = run_suite(default_run_plan(11), "geometry");
    const Reports b = run_suite(default_run_plan(11), "geometry");
    REQUIRE(reports_jsonl(a) == reports_jsonl(b));
    // and the serialization omits timing entirely
    CHECK(reports_jsonl(a).find("wall") == std::string::npos);
    for (const auto& r : a) CHECK(r.pass);
}

TEST_CASE("tolerance overrides move the bar") {
    RunPlan plan = default_run_plan(5);
    plan.tols["geometry.volume_gradient"] = 1e-30;
    const Reports rs = run_suite(plan, "geometry");
    bool found = false;
    for (const auto& r : rs) {
        if (r.id == "geometry.volume_gradient") {
            found = true;
            CHECK(r.tolerance == 1e-30);
            CHECK(!r.pass);
        }
    }
    REQUIRE(found);
}

TEST_CASE("unknown overrides and empty selections are rejected") {
    RunPlan plan = default_run_plan(5);
    plan.tols["nope.nope"] = 1.0;
    CHECK_THROWS(run_suite(plan, "geometry"));
    RunPlan p2 = default_run_plan(5);
    p2.tols["geometry.volume_gradient"] = -1.0;
    CHECK_THROWS(run_suite(p2, "geometry"));
    RunPlan p3 = default_run_plan(5);
    p3.families.clear();
    CHECK_THROWS(run_suite(p3, "momenta"));
}

TEST_CASE("covariance suite passes on fully custom ingredients") {
    const RunPlan plan = run_plan_from_config(kCustomText);
    Reports out;
    run_covariance_suite(plan, out);
    REQUIRE(out.size() == 5);
    for (const auto& r : out) {
        INFO(r.id << " residual " << r.residual);
        CHECK(r.pass);
    }
}

TEST_CASE("explicit sample points replace random ones") {
    RunPlan plan = default_run_plan(3);
    plan.explicit_points = {{0.1, -0.2, 0.15, 0.05}};
    Rng rng(1);
    const auto p = plan_point(plan, "poly123", 7, rng);
    CHECK(p == plan.explicit_points[0]);
}
