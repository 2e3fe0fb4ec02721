#ifndef CTAB_JSON_IO_HPP_
#define CTAB_JSON_IO_HPP_

#include <string>

#include "ctab/estimator.hpp"
#include "ctab/flows.hpp"

#include <nlohmann/json_fwd.hpp>

namespace ctab {

// Problem JSON: {"rows":[...], "cols":[...], "weights":[[...]]}.
// Weights omitted means all ones.
ProblemInstance problem_from_json(const nlohmann::json& j);
ProblemInstance load_problem(const std::string& path);

// Graph JSON: {"vertices":[...], "edges":[["a","b"],...], "excess":{"a":-1}}.
FlowProblem flow_from_json(const nlohmann::json& j);
FlowProblem load_flow_problem(const std::string& path);

// MCMC config JSON: {"burn_in":..., "thin":..., "chains":..., "beta_stages":...}.
McmcConfig mcmc_config_from_json(const nlohmann::json& j);

nlohmann::json estimate_report_to_json(const EstimateReport& rep);

}  // namespace ctab

#endif  // CTAB_JSON_IO_HPP_
