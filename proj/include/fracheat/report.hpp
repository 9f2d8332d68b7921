#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace fracheat {

struct CheckRecord {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::vector<double> worst_point;
    std::string note;
};

struct VerificationReport {
    std::string suite;
    std::vector<CheckRecord> checks;

    CheckRecord& add(CheckRecord rec) {
        checks.push_back(std::move(rec));
        return checks.back();
    }
    bool overall_pass() const;
    void merge(const VerificationReport& other);
    nlohmann::json to_json() const;
};

}  // namespace fracheat
