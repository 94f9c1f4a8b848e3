// Command-line harness: runs verification suites and prints momenta, form,
// and field-equation tables at chosen points.  Exit codes: 0 all checks
// pass, 1 at least one check failed, 2 configuration or usage error.

#include "CLI11.hpp"

#include "dedonder/checks.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace dedonder;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunPlan build_plan(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                   const std::vector<std::string>& tol_overrides,
                   const std::string& family_filter) {
    RunPlan plan;
    if (config_path.empty()) {
        plan = default_run_plan(seed.value_or(42));
    } else {
        const std::uint64_t s = seed.value_or(0);
        plan = run_plan_from_config(read_file(config_path), seed ? &s : nullptr);
    }
    for (const std::string& ov : tol_overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == ov.size())
            throw std::runtime_error("tolerance override must look like check=value: '" + ov +
                                     "'");
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(ov.substr(eq + 1), &used);
            if (used != ov.size() - eq - 1) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::runtime_error("bad tolerance value in '" + ov + "'");
        }
        plan.tols[ov.substr(0, eq)] = v;
    }
    if (!family_filter.empty()) {
        std::vector<FamilyPtr> keep;
        for (const auto& f : plan.families)
            if (f->name().rfind(family_filter, 0) == 0) keep.push_back(f);
        if (keep.empty()) keep.push_back(resolve_family(plan, family_filter));
        plan.families = keep;
    }
    return plan;
}

std::array<double, 4> table_point(const std::string& family, const std::vector<double>& coords) {
    if (coords.size() == 4) return {coords[0], coords[1], coords[2], coords[3]};
    if (!coords.empty())
        throw std::runtime_error("give either no coordinates or all four (x1 x2 x3 x4)");
    if (family.rfind("schwarzschild", 0) == 0) return {0.0, 4.0, 1.3, 0.2};
    if (family.rfind("kasner", 0) == 0) return {1.0, 0.3, -0.2, 0.4};
    return {0.2, -0.1, 0.3, 0.15};
}

int cmd_verify(const std::string& suite, const RunPlan& plan, const std::string& json_path) {
    const Reports reports = run_suite(plan, suite);
    for (const auto& r : reports) std::cout << report_console_line(r) << "\n";
    int failed = 0;
    double total_ms = 0.0;
    for (const auto& r : reports) {
        failed += r.pass ? 0 : 1;
        total_ms += r.wall_ms;
    }
    std::fprintf(stderr, "%s: %zu checks, %d failed, %.0f ms\n", suite.c_str(), reports.size(),
                 failed, total_ms);
    if (!json_path.empty()) {
        std::ofstream out(json_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write report file '" + json_path + "'");
        out << reports_jsonl(reports);
    }
    return failed == 0 ? 0 : 1;
}

int cmd_momenta(const RunPlan& plan, const std::string& family,
                const std::vector<double>& coords) {
    const FamilyPtr fam = resolve_family(plan, family);
    const std::array<double, 4> x = table_point(fam->name(), coords);
    const SysJet j = prolong(*fam, x, 3);
    auto Lg = gravity_lagrangian();
    const Momenta<double> m = momenta_on_jet(*Lg, j);
    const MetricPack<double> mp = metric_pack(j.y);

    std::printf("family %s at x = (%g, %g, %g, %g)\n", fam->name().c_str(), x[0], x[1], x[2],
                x[3]);
    std::printf("L = %.12g, sqrt(-det g) = %.12g\n\n", Lg->eval(j), mp.sqrtmg);

    int shown = 0;
    std::printf("P4 (second-derivative momentum), entries P4[mn|ab], indices 1..4:\n");
    for (int p = 0; p < NPAIR; ++p) {
        const auto [mu, nu] = kPairs.unpack[p];
        for (int q = 0; q < NPAIR; ++q) {
            const auto [a, b] = kPairs.unpack[q];
            const double v = m.p4[p * NPAIR + q];
            if (std::abs(v) > 5e-13) {
                std::printf("  P4[%d%d|%d%d] = %+.12g\n", mu + 1, nu + 1, a + 1, b + 1, v);
                ++shown;
            }
        }
    }
    std::printf("  (%d nonzero of %d)\n\n", shown, NPAIR * NPAIR);

    shown = 0;
    std::printf("P3 (first-derivative momentum), entries P3[mn|a]:\n");
    for (int p = 0; p < NPAIR; ++p) {
        const auto [mu, nu] = kPairs.unpack[p];
        for (int a = 0; a < 4; ++a) {
            const double v = m.p3[p * DIM + a];
            if (std::abs(v) > 5e-13) {
                std::printf("  P3[%d%d|%d] = %+.12g\n", mu + 1, nu + 1, a + 1, v);
                ++shown;
            }
        }
    }
    if (shown == 0) std::printf("  all entries zero\n");
    else std::printf("  (%d nonzero of %d)\n", shown, NZ1);
    return 0;
}

int cmd_theta(const RunPlan& plan, const std::string& family, const std::vector<double>& coords,
              const std::optional<std::uint64_t>& seed) {
    const FamilyPtr fam = resolve_family(plan, family);
    const std::array<double, 4> x = table_point(fam->name(), coords);
    const SysJet j = prolong(*fam, x, 3);
    Rng rng(seed.value_or(42) ^ fnv1a("theta-vectors"));
    JetSampler sampler;
    std::array<SysVec, 4> vs;
    for (auto& v : vs) v = sampler.sample_vector(rng);

    auto Lg = gravity_lagrangian();
    const FormValue generic = theta_eval(*Lg, j, vs);
    const FormValue closed = theta_closed_gravity(j, vs);
    const double gap =
        std::abs(generic.value - closed.value) / std::max({1.0, generic.scale, closed.scale});

    std::printf("family %s at x = (%g, %g, %g, %g), four seeded tangent vectors\n",
                fam->name().c_str(), x[0], x[1], x[2], x[3]);
    std::printf("L = %.12g\n", Lg->eval(j));
    std::printf("theta(v1..v4)          = %.12g   (term scale %.3g)\n", generic.value,
                generic.scale);
    std::printf("closed-form evaluation = %.12g\n", closed.value);
    std::printf("scaled gap             = %.3g\n", gap);
    return 0;
}

int cmd_el(const RunPlan& plan, const std::string& family, const std::vector<double>& coords) {
    const FamilyPtr fam = resolve_family(plan, family);
    const std::array<double, 4> x = table_point(fam->name(), coords);
    auto Lg = gravity_lagrangian();
    const ELResidual e = el_residual(*Lg, *fam, nullptr, x);
    const Sym2<double> G = einstein_tensor_density(*fam, x);

    std::printf("family %s at x = (%g, %g, %g, %g)\n", fam->name().c_str(), x[0], x[1], x[2],
                x[3]);
    std::printf("field equation E[mn] against the Einstein density (global sign -1):\n");
    std::printf("  %-6s %-16s %-16s %s\n", "mn", "E[mn]", "-G_dens[mn]", "|diff|");
    double worst = 0.0, mag = 0.0;
    for (int p = 0; p < NPAIR; ++p) {
        const auto [mu, nu] = kPairs.unpack[p];
        const double diff = std::abs(e.value[p] - (-1.0) * G[p]);
        worst = std::max(worst, diff);
        mag = std::max(mag, std::abs(G[p]));
        std::printf("  %d%d     %+.6e    %+.6e    %.3g\n", mu + 1, nu + 1, e.value[p], -G[p],
                    diff);
    }
    std::printf("max |E[mn]| / scale = %.6g (scale %.6g)\n", checks_detail::el_rel(e),
                std::max(1.0, e.scale));
    std::printf("max |E + G_dens|    = %.3g against density magnitude %.3g\n", worst, mag);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification harness for second-order covariant variational calculus"};
    app.require_subcommand(1);

    std::string config_path, json_path, family_filter, suite, family;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> tol_overrides;
    std::vector<double> coords;

    CLI::App* v = app.add_subcommand("verify", "run a verification suite");
    v->add_option("suite", suite, "one of: geometry momenta theta covariance el matter all")
        ->required()
        ->check(CLI::IsMember(suite_names()));
    v->add_option("--config", config_path, "run configuration file");
    v->add_option("--seed", seed, "random seed (overrides the config)");
    v->add_option("--tol-override", tol_overrides, "check=value, repeatable");
    v->add_option("--json", json_path, "write the report as JSON lines to this file");
    v->add_option("--family", family_filter, "restrict family-driven checks to one family");

    CLI::App* mo = app.add_subcommand("momenta", "print the momenta table at a point");
    mo->add_option("family", family, "family name")->required();
    mo->add_option("coords", coords, "x1 x2 x3 x4")->expected(-1);
    mo->add_option("--config", config_path, "run configuration file");

    CLI::App* th = app.add_subcommand("theta", "evaluate the canonical form at a point");
    th->add_option("family", family, "family name")->required();
    th->add_option("coords", coords, "x1 x2 x3 x4")->expected(-1);
    th->add_option("--config", config_path, "run configuration file");
    th->add_option("--seed", seed, "seed for the tangent vectors");

    CLI::App* el = app.add_subcommand("el", "print the field-equation table at a point");
    el->add_option("family", family, "family name")->required();
    el->add_option("coords", coords, "x1 x2 x3 x4")->expected(-1);
    el->add_option("--config", config_path, "run configuration file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (v->parsed()) {
            const RunPlan plan = build_plan(config_path, seed, tol_overrides, family_filter);
            return cmd_verify(suite, plan, json_path);
        }
        const RunPlan plan = build_plan(config_path, seed, {}, "");
        if (mo->parsed()) return cmd_momenta(plan, family, coords);
        if (th->parsed()) return cmd_theta(plan, family, coords, seed);
        if (el->parsed()) return cmd_el(plan, family, coords);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
