#ifndef CTAB_FLOWS_HPP_
#define CTAB_FLOWS_HPP_

#include <map>
#include <string>

#include "ctab/estimator.hpp"
#include "ctab/exact.hpp"

namespace ctab {

// Directed graph with per-vertex integer excesses summing to zero.
// Counting integer feasible flows is finite only for acyclic graphs.
struct FlowProblem {
    std::vector<std::string> vertices;
    std::vector<std::pair<int, int>> edges;  // (tail, head) vertex indices
    std::vector<long long> excess;
    bool acyclic = false;
};

FlowProblem validate_flow_problem(const std::vector<std::string>& vertices,
                                  const std::vector<std::pair<std::string, std::string>>& edges,
                                  const std::map<std::string, long long>& excess);

// The bipartite reduction: an n x n weighted table problem with row margins
// z - a(v), column margins z, and 0/1 weights supported on E plus the
// diagonal. z defaults to 1 + sum of positive excesses so every margin is
// strictly positive; z_override must be at least that to stay valid.
struct FlowReduction {
    ProblemInstance problem;
    long long z = 0;
};

FlowReduction reduce_flow_problem(const FlowProblem& flow, long long z_override = -1);

// Exact count by DFS in topological order: once all in-edges of a vertex
// are fixed, its out-edges must carry inflow - a(v), enumerated as bounded
// compositions.
long long count_flows_exact(const FlowProblem& flow,
                            const EnumerationBudget& budget = EnumerationBudget());

// Estimator path: reduce, substitute eps for the zero weights (default
// 1e-6 / N), run the chosen T' estimator, and report the bracket together
// with an eps/10 sensitivity rerun.
struct FlowEstimateOptions {
    long long samples = 10000;
    double weight_eps = -1.0;  // -1: 1e-6 / N
    bool use_simplex = false;
    double epsilon = 0.1;  // simplex truncation parameter
    McmcConfig mcmc;
    bool sensitivity = true;
};

struct FlowEstimate {
    EstimateReport report;
    double weight_eps = 0.0;
    double t_prime_eps10 = 0.0;  // estimate rerun at eps / 10
    bool sensitivity_ran = false;
    bool sensitivity_consistent = true;  // eps/10 rerun inside the 95% CI
};

FlowEstimate estimate_flows(const FlowProblem& flow, RandomSource& rng,
                            const FlowEstimateOptions& options = FlowEstimateOptions());

}  // namespace ctab

#endif  // CTAB_FLOWS_HPP_
