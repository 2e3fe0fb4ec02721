#include "ctab/flows.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace ctab {

namespace {

bool is_acyclic(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> out(n);
    for (auto [u, v] : edges) {
        out[u].push_back(v);
        ++indeg[v];
    }
    std::queue<int> q;
    for (int v = 0; v < n; ++v)
        if (indeg[v] == 0) q.push(v);
    int seen = 0;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        ++seen;
        for (int w : out[v])
            if (--indeg[w] == 0) q.push(w);
    }
    return seen == n;
}

bool is_weakly_connected(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n <= 1) return true;
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    int comps = n;
    for (auto [u, v] : edges) {
        int a = find(u), b = find(v);
        if (a != b) {
            parent[a] = b;
            --comps;
        }
    }
    return comps == 1;
}

std::vector<int> topological_order(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> out(n);
    for (auto [u, v] : edges) {
        out[u].push_back(v);
        ++indeg[v];
    }
    std::vector<int> order;
    std::queue<int> q;
    for (int v = 0; v < n; ++v)
        if (indeg[v] == 0) q.push(v);
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        order.push_back(v);
        for (int w : out[v])
            if (--indeg[w] == 0) q.push(w);
    }
    return order;
}

}  // namespace

FlowProblem validate_flow_problem(const std::vector<std::string>& vertices,
                                  const std::vector<std::pair<std::string, std::string>>& edges,
                                  const std::map<std::string, long long>& excess) {
    if (vertices.empty()) throw validation_error("graph must have at least one vertex");
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (!index.emplace(vertices[i], static_cast<int>(i)).second)
            throw validation_error("duplicate vertex name: " + vertices[i]);
    }

    FlowProblem f;
    f.vertices = vertices;
    std::set<std::pair<int, int>> seen;
    for (const auto& [tail, head] : edges) {
        auto it_t = index.find(tail), it_h = index.find(head);
        if (it_t == index.end() || it_h == index.end())
            throw validation_error("edge references unknown vertex");
        int u = it_t->second, v = it_h->second;
        if (u == v) throw validation_error("loops are not allowed");
        if (!seen.emplace(u, v).second) throw validation_error("multiple edges are not allowed");
        f.edges.emplace_back(u, v);
    }

    f.excess.assign(vertices.size(), 0);
    for (const auto& [name, a] : excess) {
        auto it = index.find(name);
        if (it == index.end()) throw validation_error("excess references unknown vertex: " + name);
        f.excess[it->second] = a;
    }
    long long sum = std::accumulate(f.excess.begin(), f.excess.end(), 0LL);
    if (sum != 0) {
        std::ostringstream msg;
        msg << "vertex excesses must sum to zero, got " << sum;
        throw validation_error(msg.str());
    }
    if (!is_weakly_connected(static_cast<int>(vertices.size()), f.edges))
        throw validation_error("graph must be connected");
    f.acyclic = is_acyclic(static_cast<int>(vertices.size()), f.edges);
    return f;
}

FlowReduction reduce_flow_problem(const FlowProblem& flow, long long z_override) {
    if (!flow.acyclic) throw precondition_error("graph contains a directed cycle");
    int n = static_cast<int>(flow.vertices.size());

    long long positive = 0;
    for (long long a : flow.excess)
        if (a > 0) positive += a;
    long long z = z_override >= 0 ? z_override : positive + 1;
    for (long long a : flow.excess)
        if (z - a < 1) throw validation_error("z too small: non-positive row margin");

    std::vector<long long> rows(n), cols(n, z);
    for (int v = 0; v < n; ++v) rows[v] = z - flow.excess[v];

    Matrix w(n, n, 0.0);
    for (int v = 0; v < n; ++v) w(v, v) = 1.0;
    for (auto [u, v] : flow.edges) w(u, v) = 1.0;

    FlowReduction r;
    r.problem = validate_problem(rows, cols, w);
    r.z = z;
    return r;
}

long long count_flows_exact(const FlowProblem& flow, const EnumerationBudget& budget) {
    if (!flow.acyclic) throw precondition_error("graph contains a directed cycle");
    int n = static_cast<int>(flow.vertices.size());
    std::vector<int> order = topological_order(n, flow.edges);
    std::vector<std::vector<int>> out(n);  // edge target lists
    for (auto [u, v] : flow.edges) out[u].push_back(v);

    std::vector<long long> inflow(n, 0);
    long long nodes = 0;
    long long count = 0;

    // Distribute `amount` over the out-edges of vertex `pos` in the
    // topological order, then move to the next vertex.
    std::function<void(std::size_t)> vertex = [&](std::size_t pos) {
        if (++nodes > budget.max_nodes) throw precondition_error("flow enumeration budget exceeded");
        if (pos == order.size()) {
            ++count;
            return;
        }
        int v = order[pos];
        long long outflow = inflow[v] - flow.excess[v];
        if (outflow < 0) return;
        const std::vector<int>& targets = out[v];
        if (targets.empty()) {
            if (outflow == 0) vertex(pos + 1);
            return;
        }
        std::function<void(std::size_t, long long)> edge = [&](std::size_t e, long long rem) {
            if (++nodes > budget.max_nodes)
                throw precondition_error("flow enumeration budget exceeded");
            if (e + 1 == targets.size()) {
                inflow[targets[e]] += rem;
                vertex(pos + 1);
                inflow[targets[e]] -= rem;
                return;
            }
            for (long long x = 0; x <= rem; ++x) {
                inflow[targets[e]] += x;
                edge(e + 1, rem - x);
                inflow[targets[e]] -= x;
            }
        };
        edge(0, outflow);
    };
    vertex(0);
    return count;
}

FlowEstimate estimate_flows(const FlowProblem& flow, RandomSource& rng,
                            const FlowEstimateOptions& options) {
    FlowReduction red = reduce_flow_problem(flow);
    double eps = options.weight_eps > 0.0
                     ? options.weight_eps
                     : 1e-6 / static_cast<double>(red.problem.total);

    auto run = [&](double weight_eps, RandomSource& r) {
        if (options.use_simplex)
            return estimate_T_prime_simplex(red.problem, options.epsilon, r, options.mcmc,
                                            weight_eps);
        return estimate_T_prime_direct(red.problem, options.samples, r, weight_eps);
    };

    FlowEstimate out;
    out.weight_eps = eps;
    RandomSource main_rng = rng.split(0);
    out.report = run(eps, main_rng);

    if (options.sensitivity) {
        RandomSource sens_rng = rng.split(1);
        EstimateReport rerun = run(eps / 10.0, sens_rng);
        out.t_prime_eps10 = rerun.t_prime;
        out.sensitivity_ran = true;
        out.sensitivity_consistent =
            rerun.t_prime >= out.report.ci_lo - 3.0 * rerun.stderr_est &&
            rerun.t_prime <= out.report.ci_hi + 3.0 * rerun.stderr_est;
    }
    return out;
}

}  // namespace ctab
