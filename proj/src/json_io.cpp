#include "ctab/json_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace ctab {

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw validation_error("JSON parse error in " + path + ": " + e.what());
    }
    return j;
}

}  // namespace

ProblemInstance problem_from_json(const json& j) {
    try {
        std::vector<long long> rows = j.at("rows").get<std::vector<long long>>();
        std::vector<long long> cols = j.at("cols").get<std::vector<long long>>();
        Matrix w;
        if (j.contains("weights")) {
            auto rows_j = j.at("weights").get<std::vector<std::vector<double>>>();
            if (rows_j.empty()) throw validation_error("weights must be a non-empty matrix");
            w = Matrix(static_cast<int>(rows_j.size()), static_cast<int>(rows_j[0].size()));
            for (int i = 0; i < w.rows; ++i) {
                if (static_cast<int>(rows_j[i].size()) != w.cols)
                    throw validation_error("weights rows have unequal lengths");
                for (int jj = 0; jj < w.cols; ++jj) w(i, jj) = rows_j[i][jj];
            }
        }
        return validate_problem(rows, cols, w);
    } catch (const json::exception& e) {
        throw validation_error(std::string("malformed problem JSON: ") + e.what());
    }
}

ProblemInstance load_problem(const std::string& path) {
    return problem_from_json(load_json_file(path));
}

FlowProblem flow_from_json(const json& j) {
    try {
        std::vector<std::string> vertices = j.at("vertices").get<std::vector<std::string>>();
        std::vector<std::pair<std::string, std::string>> edges;
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2)
                throw validation_error("each edge must be a [tail, head] pair");
            edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
        std::map<std::string, long long> excess;
        if (j.contains("excess"))
            excess = j.at("excess").get<std::map<std::string, long long>>();
        return validate_flow_problem(vertices, edges, excess);
    } catch (const json::exception& e) {
        throw validation_error(std::string("malformed graph JSON: ") + e.what());
    }
}

FlowProblem load_flow_problem(const std::string& path) {
    return flow_from_json(load_json_file(path));
}

McmcConfig mcmc_config_from_json(const json& j) {
    McmcConfig c;
    if (j.contains("burn_in")) c.burn_in = j.at("burn_in").get<long long>();
    if (j.contains("thin")) c.thin = j.at("thin").get<long long>();
    if (j.contains("chains")) c.chains = j.at("chains").get<int>();
    if (j.contains("beta_stages")) c.beta_stages = j.at("beta_stages").get<int>();
    if (j.contains("samples_per_stage"))
        c.samples_per_stage = j.at("samples_per_stage").get<long long>();
    if (j.contains("stage_burn_in")) c.stage_burn_in = j.at("stage_burn_in").get<long long>();
    return c;
}

json estimate_report_to_json(const EstimateReport& rep) {
    json j;
    j["t_prime"] = rep.t_prime;
    j["log_t_prime"] = rep.log_t_prime;
    j["stderr"] = rep.stderr_est;
    j["ci"] = {rep.ci_lo, rep.ci_hi};
    j["samples_used"] = rep.samples_used;
    j["method"] = rep.method == EstimateReport::Method::direct ? "direct" : "simplex";
    j["alpha"] = rep.alpha;
    j["t_bracket"] = {rep.bracket_lo, rep.bracket_hi};
    if (rep.method == EstimateReport::Method::simplex) {
        j["delta"] = rep.delta;
        j["lemma43_factor"] = rep.lemma43_factor;
        j["gelman_rubin"] = rep.gelman_rubin;
        j["mcmc_flagged"] = rep.mcmc_flagged;
    }
    return j;
}

}  // namespace ctab
