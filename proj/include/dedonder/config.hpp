#pragma once

// Run configuration.  A flat key/value text format with [section] headers
// selects the metric families, coordinate changes, scalar field, potential,
// Lagrangian, sample counts, seed, and per-check tolerance overrides for a
// verification run.  Expression values are double-quoted so whitespace
// survives; everything else is bare tokens.
//
//   [run]
//   seed = 7
//   points = 5
//   lagrangian = gravity+scalar
//
//   [families]
//   use = minkowski, schwarzschild:1.0, kasner, random:2, bumpy
//
//   [family bumpy]
//   g11 = "-1 - 0.05 * x2^2"
//   g22 = "1 + 0.04 * x1 * x3"
//
//   [diffeos]
//   use = linear, quad_shear, cubic_shear:0.02, random:1, mymap
//
//   [diffeo mymap]
//   fwd1 = "x1 + 0.01 * x2^2"   ... fwd4, inv1 ... inv4
//
//   [field]
//   expr = "x2^2"
//
//   [potential]
//   expr = "0.5 * t^2"
//
//   [points]
//   p1 = 0.1 -0.2 0.3 0.05
//
//   [tolerances]
//   covariance.density = 1e-9

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dedonder/diffeo.hpp"
#include "dedonder/expr.hpp"
#include "dedonder/families.hpp"
#include "dedonder/jet.hpp"
#include "dedonder/sampling.hpp"

namespace dedonder {

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(int ln, const std::string& what)
        : std::runtime_error("config line " + std::to_string(ln) + ": " + what), line(ln) {}
};

struct RunPlan {
    std::uint64_t seed = 42;
    int points = 5;                       // random sample points per cell
    std::string lagrangian = "gravity";   // "gravity" or "gravity+scalar"
    std::vector<FamilyPtr> families;
    std::vector<Diffeo> diffeos;
    FieldPtr field;                       // used by matter checks
    ExprPtr potential;                    // null means V == 0
    std::vector<std::array<double, 4>> explicit_points; // overrides sampling when set
    std::map<std::string, double> tols;   // per-check overrides
};

// Domain-aware point sampling: named families carry coordinate ranges on
// which they are defined and Lorentzian.
inline std::array<double, 4> sample_domain_point(const std::string& family, Rng& rng) {
    if (family.rfind("schwarzschild", 0) == 0)
        return {rng.uniform(-1.0, 1.0), rng.uniform(2.5, 10.0), rng.uniform(0.5, 2.6),
                rng.uniform(-1.0, 1.0)};
    if (family.rfind("kasner", 0) == 0)
        return {rng.uniform(0.5, 3.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0)};
    return {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
            rng.uniform(-0.5, 0.5)};
}

inline std::array<double, 4> plan_point(const RunPlan& plan, const std::string& family,
                                        int index, Rng& rng) {
    if (!plan.explicit_points.empty())
        return plan.explicit_points[static_cast<std::size_t>(index) %
                                    plan.explicit_points.size()];
    return sample_domain_point(family, rng);
}

// ---- raw parse -----------------------------------------------------------

struct ConfigEntry {
    std::string key;
    std::string value;   // unquoted content for quoted values
    bool quoted = false;
    int line = 0;
};

struct ConfigSection {
    std::string kind;    // "run", "family", ...
    std::string arg;     // section name for [family NAME] / [diffeo NAME]
    std::vector<ConfigEntry> entries;
    int line = 0;
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        if (comma == std::string::npos) comma = s.size();
        std::string item = trim(std::string_view(s).substr(start, comma - start));
        if (!item.empty()) out.push_back(item);
        start = comma + 1;
    }
    return out;
}

} // namespace detail

inline std::vector<ConfigSection> parse_config(const std::string& text) {
    std::vector<ConfigSection> sections;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(lineno, "unterminated section header");
            std::string inner = detail::trim(std::string_view(line).substr(1, line.size() - 2));
            if (inner.empty()) throw ConfigError(lineno, "empty section header");
            ConfigSection sec;
            sec.line = lineno;
            const std::size_t sp = inner.find(' ');
            sec.kind = inner.substr(0, sp);
            if (sp != std::string::npos) sec.arg = detail::trim(std::string_view(inner).substr(sp + 1));
            sections.push_back(std::move(sec));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(lineno, "expected 'key = value'");
        if (sections.empty())
            throw ConfigError(lineno, "entry before any [section] header");
        ConfigEntry ent;
        ent.line = lineno;
        ent.key = detail::trim(std::string_view(line).substr(0, eq));
        std::string val = detail::trim(std::string_view(line).substr(eq + 1));
        if (ent.key.empty()) throw ConfigError(lineno, "empty key");
        if (!val.empty() && val.front() == '"') {
            if (val.size() < 2 || val.back() != '"')
                throw ConfigError(lineno, "unterminated quoted value");
            ent.value = val.substr(1, val.size() - 2);
            ent.quoted = true;
        } else {
            // strip trailing comment from bare values
            const std::size_t hash = val.find('#');
            if (hash != std::string::npos) val = detail::trim(std::string_view(val).substr(0, hash));
            ent.value = val;
        }
        sections.back().entries.push_back(std::move(ent));
    }
    return sections;
}

// ---- resolution ----------------------------------------------------------

namespace detail {

inline ExprPtr parse_entry_expr(const ConfigEntry& ent) {
    try {
        return parse_expr(ent.value);
    } catch (const ParseError& pe) {
        throw ConfigError(ent.line, "in \"" + ent.value + "\": " + pe.what());
    }
}

inline double parse_entry_double(const ConfigEntry& ent) {
    try {
        std::size_t used = 0;
        const double v = std::stod(ent.value, &used);
        if (used != ent.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(ent.line, "expected a number, got '" + ent.value + "'");
    }
}

inline std::uint64_t parse_entry_uint(const ConfigEntry& ent) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(ent.value, &used);
        if (used != ent.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(ent.line, "expected an unsigned integer, got '" + ent.value + "'");
    }
}

// "schwarzschild:1.5" -> {"schwarzschild", "1.5"}
inline std::pair<std::string, std::string> split_tag(const std::string& tok) {
    const std::size_t colon = tok.find(':');
    if (colon == std::string::npos) return {tok, ""};
    return {tok.substr(0, colon), tok.substr(colon + 1)};
}

inline FamilyPtr expr_family(const std::string& name, const ConfigSection& sec) {
    std::array<ExprPtr, NPAIR> comps{};
    for (const auto& ent : sec.entries) {
        if (ent.key.size() != 3 || ent.key[0] != 'g')
            throw ConfigError(ent.line, "family entries must look like g11 .. g44");
        const int i = ent.key[1] - '1';
        const int j = ent.key[2] - '1';
        if (i < 0 || i >= DIM || j < 0 || j >= DIM || i > j)
            throw ConfigError(ent.line, "bad metric component key '" + ent.key + "'");
        comps[pair_index(i, j)] = parse_entry_expr(ent);
    }
    return make_family(name, [comps](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        Sym2<S> g{};
        for (int p = 0; p < NPAIR; ++p) {
            if (comps[p]) {
                g[p] = eval_expr<S>(*comps[p], x);
            } else {
                const auto [m, n] = kPairs.unpack[p];
                g[p] = S((m == n) ? (m == 0 ? -1.0 : 1.0) : 0.0);
            }
        }
        return g;
    });
}

inline Diffeo config_expr_diffeo(const std::string& name, const ConfigSection& sec) {
    std::array<ExprPtr, 4> fwd{}, inv{};
    for (const auto& ent : sec.entries) {
        bool is_fwd = ent.key.rfind("fwd", 0) == 0;
        bool is_inv = ent.key.rfind("inv", 0) == 0;
        if ((!is_fwd && !is_inv) || ent.key.size() != 4)
            throw ConfigError(ent.line, "diffeo entries must be fwd1..fwd4 / inv1..inv4");
        const int i = ent.key[3] - '1';
        if (i < 0 || i >= 4)
            throw ConfigError(ent.line, "bad component index in '" + ent.key + "'");
        (is_fwd ? fwd : inv)[static_cast<std::size_t>(i)] = parse_entry_expr(ent);
    }
    for (int i = 0; i < 4; ++i)
        if (!fwd[static_cast<std::size_t>(i)] || !inv[static_cast<std::size_t>(i)])
            throw ConfigError(sec.line, "diffeo '" + name + "' needs all fwd1..4 and inv1..4");
    return expr_diffeo(name, fwd, inv);
}

inline const ConfigSection* find_named(const std::vector<ConfigSection>& secs,
                                       const std::string& kind, const std::string& arg) {
    for (const auto& s : secs)
        if (s.kind == kind && s.arg == arg) return &s;
    return nullptr;
}

} // namespace detail

inline std::vector<FamilyPtr> default_families(Rng& rng) {
    std::vector<FamilyPtr> fams;
    fams.push_back(minkowski_family());
    fams.push_back(schwarzschild_family(1.0));
    fams.push_back(kasner_family());
    fams.push_back(random_poly_family(rng));
    fams.push_back(random_poly_family(rng));
    return fams;
}

inline std::vector<Diffeo> default_diffeos(Rng& rng) {
    std::vector<Diffeo> ds;
    ds.push_back(linear_diffeo());
    ds.push_back(quadratic_shear_diffeo());
    ds.push_back(cubic_shear_diffeo());
    ds.push_back(random_shear_diffeo(rng));
    return ds;
}

inline RunPlan default_run_plan(std::uint64_t seed = 42) {
    RunPlan plan;
    plan.seed = seed;
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    plan.families = default_families(rng);
    plan.diffeos = default_diffeos(rng);
    plan.field = quadratic_field();
    plan.potential = parse_expr("0.5 * t^2");
    return plan;
}

// Builds the plan a config text describes.  Unspecified parts fall back to
// the same defaults as default_run_plan.  A seed override (from the command
// line) replaces the config seed before any seeded constructor runs.
inline RunPlan run_plan_from_config(const std::string& text,
                                    const std::uint64_t* seed_override = nullptr) {
    const std::vector<ConfigSection> secs = parse_config(text);

    RunPlan plan;
    bool have_families = false, have_diffeos = false, have_field = false, have_potential = false;

    // pass 1: run parameters (seed feeds every seeded constructor below)
    for (const auto& sec : secs) {
        if (sec.kind != "run") continue;
        for (const auto& ent : sec.entries) {
            if (ent.key == "seed") {
                plan.seed = detail::parse_entry_uint(ent);
            } else if (ent.key == "points") {
                const std::uint64_t n = detail::parse_entry_uint(ent);
                if (n < 1 || n > 10000) throw ConfigError(ent.line, "points out of range");
                plan.points = static_cast<int>(n);
            } else if (ent.key == "lagrangian") {
                if (ent.value != "gravity" && ent.value != "gravity+scalar")
                    throw ConfigError(ent.line,
                                      "lagrangian must be 'gravity' or 'gravity+scalar'");
                plan.lagrangian = ent.value;
            } else {
                throw ConfigError(ent.line, "unknown [run] key '" + ent.key + "'");
            }
        }
    }

    if (seed_override) plan.seed = *seed_override;
    Rng rng(plan.seed ^ 0x9e3779b97f4a7c15ull);

    // pass 2: everything else
    for (const auto& sec : secs) {
        if (sec.kind == "run") continue;
        if (sec.kind == "families") {
            for (const auto& ent : sec.entries) {
                if (ent.key != "use")
                    throw ConfigError(ent.line, "unknown [families] key '" + ent.key + "'");
                have_families = true;
                for (const std::string& tok : detail::split_list(ent.value)) {
                    const auto [base, tag] = detail::split_tag(tok);
                    if (base == "minkowski") {
                        plan.families.push_back(minkowski_family());
                    } else if (base == "schwarzschild") {
                        plan.families.push_back(
                            schwarzschild_family(tag.empty() ? 1.0 : std::stod(tag)));
                    } else if (base == "kasner") {
                        plan.families.push_back(kasner_family());
                    } else if (base == "random") {
                        const int n = tag.empty() ? 1 : std::stoi(tag);
                        for (int k = 0; k < n; ++k)
                            plan.families.push_back(random_poly_family(rng));
                    } else if (const ConfigSection* named =
                                   detail::find_named(secs, "family", base)) {
                        plan.families.push_back(detail::expr_family(base, *named));
                    } else {
                        throw ConfigError(ent.line, "unknown family '" + tok + "'");
                    }
                }
            }
        } else if (sec.kind == "diffeos") {
            for (const auto& ent : sec.entries) {
                if (ent.key != "use")
                    throw ConfigError(ent.line, "unknown [diffeos] key '" + ent.key + "'");
                have_diffeos = true;
                for (const std::string& tok : detail::split_list(ent.value)) {
                    const auto [base, tag] = detail::split_tag(tok);
                    if (base == "identity") {
                        plan.diffeos.push_back(identity_diffeo());
                    } else if (base == "linear") {
                        plan.diffeos.push_back(linear_diffeo());
                    } else if (base == "quad_shear") {
                        plan.diffeos.push_back(
                            quadratic_shear_diffeo(tag.empty() ? 0.01 : std::stod(tag)));
                    } else if (base == "cubic_shear") {
                        plan.diffeos.push_back(
                            cubic_shear_diffeo(tag.empty() ? 0.01 : std::stod(tag)));
                    } else if (base == "random") {
                        const int n = tag.empty() ? 1 : std::stoi(tag);
                        for (int k = 0; k < n; ++k)
                            plan.diffeos.push_back(random_shear_diffeo(rng));
                    } else if (const ConfigSection* named =
                                   detail::find_named(secs, "diffeo", base)) {
                        plan.diffeos.push_back(detail::config_expr_diffeo(base, *named));
                    } else {
                        throw ConfigError(ent.line, "unknown diffeo '" + tok + "'");
                    }
                }
            }
        } else if (sec.kind == "field") {
            for (const auto& ent : sec.entries) {
                if (ent.key != "expr")
                    throw ConfigError(ent.line, "unknown [field] key '" + ent.key + "'");
                ExprPtr e = detail::parse_entry_expr(ent);
                plan.field = make_field("expr:" + print_expr(*e), [e](const auto& x) {
                    using S = std::decay_t<decltype(x[0])>;
                    return eval_expr<S>(*e, x);
                });
                have_field = true;
            }
        } else if (sec.kind == "potential") {
            for (const auto& ent : sec.entries) {
                if (ent.key != "expr")
                    throw ConfigError(ent.line, "unknown [potential] key '" + ent.key + "'");
                plan.potential = detail::parse_entry_expr(ent);
                have_potential = true;
            }
        } else if (sec.kind == "points") {
            for (const auto& ent : sec.entries) {
                std::istringstream ps(ent.value);
                std::array<double, 4> pt{};
                for (int i = 0; i < 4; ++i)
                    if (!(ps >> pt[static_cast<std::size_t>(i)]))
                        throw ConfigError(ent.line, "point needs four coordinates");
                std::string rest;
                if (ps >> rest) throw ConfigError(ent.line, "point has extra fields");
                plan.explicit_points.push_back(pt);
            }
        } else if (sec.kind == "tolerances") {
            for (const auto& ent : sec.entries)
                plan.tols[ent.key] = detail::parse_entry_double(ent);
        } else if (sec.kind == "family" || sec.kind == "diffeo") {
            if (sec.arg.empty())
                throw ConfigError(sec.line, "[" + sec.kind + "] needs a name");
            // consumed via [families]/[diffeos] use lists; still validated here
            // so a malformed unused block cannot hide
            if (sec.kind == "family")
                detail::expr_family(sec.arg, sec);
            else
                detail::config_expr_diffeo(sec.arg, sec);
        } else {
            throw ConfigError(sec.line, "unknown section [" + sec.kind + "]");
        }
    }

    if (!have_families) plan.families = default_families(rng);
    if (!have_diffeos) plan.diffeos = default_diffeos(rng);
    if (!have_field) plan.field = quadratic_field();
    if (!have_potential) plan.potential = parse_expr("0.5 * t^2");
    return plan;
}

inline FamilyPtr resolve_family(const RunPlan& plan, const std::string& name) {
    for (const auto& f : plan.families)
        if (f->name() == name) return f;
    if (name == "minkowski") return minkowski_family();
    if (name == "kasner") return kasner_family();
    const auto [base, tag] = detail::split_tag(name);
    if (base == "schwarzschild") return schwarzschild_family(tag.empty() ? 1.0 : std::stod(tag));
    throw std::runtime_error("unknown family '" + name + "'");
}

} // namespace dedonder
