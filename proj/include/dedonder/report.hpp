#pragma once

// Check reports and their serialization.  A verification run produces one
// CheckReport per check id; reports print as aligned console lines and as
// JSONL (one object per line).  Wall time is console-only: serialized bytes
// depend only on the configuration and seed, so identical runs produce
// identical report files.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dedonder {

struct CheckReport {
    std::string id;       // dotted check name, e.g. "momenta.closed_vs_ad"
    std::string digest;   // hash of the inputs that fed the check
    int samples = 0;      // number of aggregated trials
    double residual = 0.0;// worst scaled residual over all trials
    double tolerance = 0.0;
    bool pass = false;
    double wall_ms = 0.0; // display only, never serialized
};

// FNV-1a, used to digest the input description of a check.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string report_json_line(const CheckReport& r) {
    nlohmann::ordered_json j;
    j["check"] = r.id;
    j["digest"] = r.digest;
    j["samples"] = r.samples;
    j["residual"] = r.residual;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    return j.dump();
}

inline std::string reports_jsonl(const std::vector<CheckReport>& rs) {
    std::string out;
    for (const auto& r : rs) {
        out += report_json_line(r);
        out += '\n';
    }
    return out;
}

inline std::string report_console_line(const CheckReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-4s %-32s residual=%-12.3e tol=%-9.0e samples=%d",
                  r.pass ? "PASS" : "FAIL", r.id.c_str(), r.residual, r.tolerance,
                  r.samples);
    return std::string(buf);
}

} // namespace dedonder
