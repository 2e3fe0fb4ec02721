#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "ctab/exact.hpp"
#include "ctab/flows.hpp"

using namespace ctab;

namespace {

FlowProblem triangle() {
    return validate_flow_problem({"a", "b", "c"}, {{"a", "b"}, {"a", "c"}, {"b", "c"}},
                                 {{"a", -2}, {"c", 2}});
}

FlowProblem single_edge() {
    return validate_flow_problem({"a", "b"}, {{"a", "b"}}, {{"a", -1}, {"b", 1}});
}

}  // namespace

TEST_CASE("validate_flow_problem checks structure") {
    CHECK_THROWS_AS(validate_flow_problem({"a", "a"}, {}, {}), validation_error);
    CHECK_THROWS_AS(validate_flow_problem({"a"}, {{"a", "a"}}, {}), validation_error);
    CHECK_THROWS_AS(
        validate_flow_problem({"a", "b"}, {{"a", "b"}, {"a", "b"}}, {{"a", -1}, {"b", 1}}),
        validation_error);
    CHECK_THROWS_AS(validate_flow_problem({"a", "b"}, {{"a", "b"}}, {{"a", -1}}),
                    validation_error);  // excesses must sum to zero
    CHECK_THROWS_AS(validate_flow_problem({"a", "b", "c"}, {{"a", "b"}}, {}),
                    validation_error);  // c disconnected
    CHECK_THROWS_AS(validate_flow_problem({"a", "b"}, {{"a", "x"}}, {}), validation_error);

    FlowProblem cyc =
        validate_flow_problem({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"c", "a"}}, {});
    CHECK_FALSE(cyc.acyclic);
    CHECK(triangle().acyclic);
}

TEST_CASE("reduction of the single edge") {
    FlowReduction red = reduce_flow_problem(single_edge());
    CHECK(red.z == 2);
    CHECK(red.problem.row_margins == std::vector<long long>{3, 1});
    CHECK(red.problem.col_margins == std::vector<long long>{2, 2});
    // support: diagonal plus the edge (a,b); cell (b,a) has weight 0
    CHECK(red.problem.weights(0, 0) == 1.0);
    CHECK(red.problem.weights(0, 1) == 1.0);
    CHECK(red.problem.weights(1, 0) == 0.0);
    CHECK(red.problem.weights(1, 1) == 1.0);
}

TEST_CASE("reduction margins are strictly positive") {
    FlowProblem f = triangle();
    FlowReduction red = reduce_flow_problem(f);
    CHECK(red.z == 3);
    for (long long r : red.problem.row_margins) CHECK(r >= 1);
    for (long long c : red.problem.col_margins) CHECK(c == red.z);
}

TEST_CASE("diagonal-only graph has exactly one table") {
    FlowProblem f = validate_flow_problem({"a"}, {}, {});
    FlowReduction red = reduce_flow_problem(f);
    ExactTotal t = weighted_total_exact(red.problem);
    CHECK(t.table_count == 1);
    CHECK(t.value == 1.0);
    CHECK(count_flows_exact(f) == 1);
}

TEST_CASE("exact flow counts for the named fixtures") {
    CHECK(count_flows_exact(single_edge()) == 1);
    CHECK(count_flows_exact(triangle()) == 3);
    FlowProblem pp = validate_flow_problem(
        {"a", "b", "c", "d"}, {{"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}},
        {{"a", -2}, {"d", 2}});
    CHECK(count_flows_exact(pp) == 3);
}

TEST_CASE("count_flows_exact rejects cyclic graphs and tiny budgets") {
    FlowProblem cyc =
        validate_flow_problem({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"c", "a"}}, {});
    CHECK_THROWS_AS(count_flows_exact(cyc), precondition_error);
    CHECK_THROWS_AS(count_flows_exact(triangle(), EnumerationBudget{1}), precondition_error);
}

TEST_CASE("reduction equals direct count on the fixtures") {
    for (const FlowProblem& f : {single_edge(), triangle()}) {
        FlowReduction red = reduce_flow_problem(f);
        ExactTotal t = weighted_total_exact(red.problem);
        CHECK(t.value == doctest::Approx(static_cast<double>(count_flows_exact(f))).epsilon(1e-12));
    }
}

TEST_CASE("translation invariance in z") {
    for (const FlowProblem& f : {single_edge(), triangle()}) {
        long long zmin = reduce_flow_problem(f).z;
        double v0 = weighted_total_exact(reduce_flow_problem(f, zmin).problem).value;
        double v1 = weighted_total_exact(reduce_flow_problem(f, zmin + 1).problem).value;
        CHECK(v0 == doctest::Approx(v1).epsilon(1e-12));
    }
    CHECK_THROWS_AS(reduce_flow_problem(triangle(), 1), validation_error);  // below minimum
}

TEST_CASE("reduction agreement on random small DAGs") {
    RandomSource rng(179);
    int done = 0;
    while (done < 25) {
        int n = 2 + static_cast<int>(rng.next_u64() % 4);
        std::vector<std::string> names;
        for (int v = 0; v < n; ++v) names.push_back(std::string(1, char('a' + v)));
        // edges only forward in index order: acyclic by construction
        std::vector<std::pair<std::string, std::string>> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.uniform01() < 0.6) edges.emplace_back(names[i], names[j]);
        std::vector<long long> a(n, 0);
        for (int v = 0; v + 1 < n; ++v)
            a[v] = static_cast<long long>(rng.next_u64() % 5) - 2;
        long long s = 0;
        for (int v = 0; v + 1 < n; ++v) s += a[v];
        a[n - 1] = -s;
        if (std::llabs(a[n - 1]) > 3) continue;
        std::map<std::string, long long> excess;
        for (int v = 0; v < n; ++v)
            if (a[v] != 0) excess[names[v]] = a[v];
        FlowProblem f;
        try {
            f = validate_flow_problem(names, edges, excess);
        } catch (const validation_error&) {
            continue;  // disconnected draw
        }
        FlowReduction red = reduce_flow_problem(f);
        ExactTotal t = weighted_total_exact(red.problem);
        long long direct = count_flows_exact(f);
        CHECK(t.value == doctest::Approx(static_cast<double>(direct)).epsilon(1e-9));
        CHECK(t.table_count == direct);
        ++done;
    }
}

TEST_CASE("estimator bracket contains the exact flow count") {
    RandomSource rng(181);
    for (const FlowProblem& f : {single_edge(), triangle()}) {
        long long truth = count_flows_exact(f);
        RandomSource frng = rng.split(f.vertices.size());
        FlowEstimateOptions opt;
        opt.samples = 20000;
        FlowEstimate est = estimate_flows(f, frng, opt);
        CHECK(est.report.ci_lo <= static_cast<double>(truth) * (1.0 + 1e-9));
        CHECK(static_cast<double>(truth) <= est.report.alpha * est.report.ci_hi * (1.0 + 1e-9));
        CHECK(est.sensitivity_ran);
        CHECK(est.sensitivity_consistent);
    }
}
