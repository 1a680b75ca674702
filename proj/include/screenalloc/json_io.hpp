#pragma once

#include <json.hpp>

#include "screenalloc/evaluator.hpp"
#include "screenalloc/model.hpp"

namespace screenalloc {

/// Instance schema (exact field names, unknown fields rejected):
/// {budget, num_groups, utility: {repay_value, default_value},
///  applicants: [{id, group, mu, screen_cost, alloc_cost,
///                posterior: {support, probs} | null}],
///  constraints: [{group, target, mode}]}
nlohmann::json instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const nlohmann::json& j);

/// Result schema: {status, expected_utility, expected_cost, group_utilities,
/// screening: {probs}, allocation: {thresholds, boundary_probs}}. Infinite
/// thresholds are encoded as the strings "inf" / "-inf"; currency fields are
/// rounded to 6 decimals.
nlohmann::json solve_result_to_json(const SolveResult& result);

/// Reads the screening/allocation pair from a SolveResult JSON (or any object
/// carrying those two fields).
void policy_from_json(const nlohmann::json& j, ScreeningPolicy& screening,
                      ThresholdPolicy& allocation);

nlohmann::json eval_report_to_json(const EvalReport& report);

double round_currency(double v);

} // namespace screenalloc
