#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rmnc/analysis.hpp"

namespace rmnc {

struct AcceptanceScale {
    // Full scale runs every criterion at the stated protocol; quick scale shortens
    // the simulation windows (and drops the extra seeds) for a fast smoke check.
    bool full = true;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    // Mutation hook: added to a* wherever the critical cubic point is used.
    double critical_a_offset = 0.0;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::vector<Comparison> checks;  // pass is the conjunction of these
    std::vector<std::string> notes;  // diagnostics that do not affect the verdict
    double seconds = 0.0;
    std::string error;  // set if the criterion threw
};

inline constexpr int kCriterionCount = 11;

[[nodiscard]] CriterionResult run_criterion(int id, const AcceptanceScale& scale);

/// Runs the given criteria (all when empty) in order, calling `report` after each.
std::vector<CriterionResult> run_acceptance(const AcceptanceScale& scale, std::span<const int> ids = {},
                                            const std::function<void(const CriterionResult&)>& report = {});

/// One line: "PASS  7  simulation vs analytic density  (worst l1 ... ) 12.3 s".
[[nodiscard]] std::string summary_line(const CriterionResult& r);

/// {"id", "name", "pass", "seconds", "checks": [...], "notes": [...], "error"}
[[nodiscard]] std::string to_json(const CriterionResult& r);

}  // namespace rmnc
