// Built-in acceptance criteria. Each criterion builds its own scenarios,
// runs them and compares against independently computed reference values.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace finstab {

struct AcceptanceOptions {
    /// Multiplies every tolerance; 0 turns each check into an exact comparison.
    double tol_scale = 1.0;
    std::uint64_t seed = 2024;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::optional<double> bound;     // settling bound where one applies
    std::optional<double> measured;  // measured settling time (or the tested quantity)
    std::optional<double> margin;    // bound - measured, or tolerance - error
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    std::function<CriterionResult(const AcceptanceOptions&)> run;
};

const std::vector<Criterion>& acceptance_criteria();

/// Shell-style glob (*, ?, [..]) on the criterion name.
bool glob_match(const std::string& pattern, const std::string& text);

std::vector<CriterionResult> run_acceptance(const std::string& filter = "*", const AcceptanceOptions& opts = {});

/// "PASS  3 unobservability-barrier  ..." style line.
std::string format_result_line(const CriterionResult& r);
/// Table with one row per result (scenario, bound, settling, margin, verdict).
std::string format_table(const std::vector<CriterionResult>& results);

}  // namespace finstab
