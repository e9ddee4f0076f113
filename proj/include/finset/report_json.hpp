#pragma once

#include <json.hpp>

#include "finset/bounds.hpp"

namespace finset {

/// BoundReport JSON document. Schema:
///   delta               failure probability used
///   convention          state-covariance indexing convention
///   t_bar_max           horizon cap of the lower-bound search
///   minimal_T_lb        smallest horizon meeting the lower bound (null if none found)
///   t_ub_max            horizon cap of the sufficient-condition search
///   minimal_T_ub        smallest horizon meeting the sufficient condition (null if none)
///   checks              one entry per requested horizon:
///     T, burn_in_satisfied, satisfied, witness_k,
///     per_candidate: [{index, snr_trace, eq9b_lhs, eq9b_rhs, thm2_lhs, margin}]
/// When gramian diagnostics are enabled each per_candidate entry also
/// carries eq9b_rhs_gramian and thm2_lhs_gramian.
inline nlohmann::json to_json(const BoundReport& report) {
    nlohmann::json j;
    j["delta"] = report.delta;
    j["convention"] = report.convention == CovarianceConvention::kZeroStart
                          ? "zero_start"
                          : "inclusive";
    j["t_bar_max"] = report.lower_search_max;
    if (report.minimal_lower_bound) {
        j["minimal_T_lb"] = *report.minimal_lower_bound;
    } else {
        j["minimal_T_lb"] = nullptr;
    }
    j["t_ub_max"] = report.upper_search_max;
    if (report.minimal_upper_bound) {
        j["minimal_T_ub"] = *report.minimal_upper_bound;
    } else {
        j["minimal_T_ub"] = nullptr;
    }
    j["checks"] = nlohmann::json::array();
    for (std::size_t c = 0; c < report.checks.size(); ++c) {
        const UpperBoundCheck& check = report.checks[c];
        nlohmann::json jc;
        jc["T"] = check.horizon;
        jc["burn_in_satisfied"] = check.burn_in_satisfied;
        jc["satisfied"] = check.satisfied;
        jc["witness_k"] = check.witness_k;
        jc["per_candidate"] = nlohmann::json::array();
        for (std::size_t r = 0; r < check.candidates.size(); ++r) {
            const CandidateBound& cb = check.candidates[r];
            nlohmann::json jr;
            jr["index"] = cb.index;
            jr["snr_trace"] = cb.snr_trace;
            jr["eq9b_lhs"] = cb.condition_lhs;
            jr["eq9b_rhs"] = cb.condition_rhs;
            jr["thm2_lhs"] = cb.lower_bound_lhs;
            jr["margin"] = cb.margin;
            if (report.with_gramian_diagnostics) {
                jr["eq9b_rhs_gramian"] = report.gramian_condition_rhs[c][r];
                jr["thm2_lhs_gramian"] = report.gramian_lower_lhs[c][r];
            }
            jc["per_candidate"].push_back(std::move(jr));
        }
        j["checks"].push_back(std::move(jc));
    }
    return j;
}

}  // namespace finset
