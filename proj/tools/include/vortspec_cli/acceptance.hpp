#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace vortspec::cli {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double budget = 0.0;  // runtime limit in seconds
};

struct AcceptanceOptions {
    std::vector<int> only;  // empty: all twelve
    std::uint64_t seed = 42;
};

// Runs the criteria in order; each result line is written to `progress` as it completes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, std::ostream* progress);
std::string format_result(const CriterionResult& r);
nlohmann::json to_json(const std::vector<CriterionResult>& results);
int criterion_count();

}  // namespace vortspec::cli
