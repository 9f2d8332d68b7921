#include "fracheat/report.hpp"

#include <cmath>

namespace fracheat {

bool VerificationReport::overall_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

void VerificationReport::merge(const VerificationReport& other) {
    for (auto c : other.checks) {
        if (!other.suite.empty()) c.name = other.suite + "/" + c.name;
        checks.push_back(std::move(c));
    }
}

namespace {
nlohmann::json num(double v) {
    // JSON has no inf/nan; keep them readable instead of null
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}
}  // namespace

nlohmann::json VerificationReport::to_json() const {
    nlohmann::json j;
    j["suite"] = suite;
    j["overall_pass"] = overall_pass();
    auto arr = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json r;
        r["name"] = c.name;
        r["measured"] = num(c.measured);
        r["bound"] = num(c.bound);
        r["tolerance"] = num(c.tolerance);
        r["pass"] = c.pass;
        auto wp = nlohmann::json::array();
        for (double v : c.worst_point) wp.push_back(num(v));
        r["worst_point"] = wp;
        if (!c.note.empty()) r["note"] = c.note;
        arr.push_back(r);
    }
    j["checks"] = arr;
    return j;
}

}  // namespace fracheat
