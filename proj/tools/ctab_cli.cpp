// ctab: weighted contingency-table totals with certified brackets.
//
// Subcommands:
//   exact     exact T(R,C;W), table count, Fisher-Yates total
//   estimate  T' with confidence interval and the [T', alpha*T'] bracket
//   flows     integer feasible flow counting via the bipartite reduction
//   validate  randomized property suites as a user-facing self-test
//
// Output is a single JSON object on stdout. Exit codes: 0 success,
// 2 input error, 3 precondition error, 4 numerical failure.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ctab/estimator.hpp"
#include "ctab/exact.hpp"
#include "ctab/flows.hpp"
#include "ctab/json_io.hpp"
#include "ctab/scaling.hpp"

using nlohmann::json;

namespace {

struct CommonOpts {
    std::uint64_t seed = 12345;
    bool pretty = false;
    bool timings = false;
    int threads = 0;  // accepted for interface stability; execution is single-threaded
};

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void emit(const json& j, const CommonOpts& opts) {
    if (opts.pretty)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << j.dump() << "\n";
}

json report_shell(const std::string& command, const CommonOpts& opts, const json& config) {
    json j;
    j["command"] = command;
    j["seed"] = opts.seed;
    j["config"] = config;
    j["rng"] = ctab::RandomSource::algorithm();
    return j;
}

// ---------------------------------------------------------------- exact ---

int cmd_exact(const std::string& file, long long budget, const CommonOpts& opts) {
    Timer timer;
    ctab::ProblemInstance problem = ctab::load_problem(file);
    ctab::EnumerationBudget eb{budget};

    ctab::ExactTotal total = ctab::weighted_total_exact(problem, eb);
    json results;
    results["T"] = total.value;
    results["log_T"] = total.log_value;
    results["tables"] = total.table_count;
    try {
        ctab::FisherYatesTotal fy = ctab::fisher_yates_total(problem, eb);
        results["fisher_yates"] = fy.value;
    } catch (const ctab::precondition_error&) {
        results["fisher_yates"] = nullptr;
    }

    json out = report_shell("exact", opts, {{"file", file}, {"budget", budget}});
    out["results"] = results;
    if (opts.timings) out["wall_seconds"] = timer.seconds();
    emit(out, opts);
    return 0;
}

// ------------------------------------------------------------- estimate ---

struct EstimateOpts {
    std::string method = "direct";
    long long samples = 10000;
    double eps = 0.1;          // simplex truncation parameter
    double delta = -1.0;       // simplex delta override
    double weight_eps = -1.0;  // zero-weight substitution
    double tol = 1e-10;
    long long max_iters = 100000;
    long long budget = 10'000'000;
    std::string mcmc_json;
    std::string trace_file;
};

int cmd_estimate(const std::string& file, const EstimateOpts& eo, const CommonOpts& opts) {
    Timer timer;
    ctab::ProblemInstance problem = ctab::load_problem(file);
    ctab::RandomSource rng(opts.seed);
    ctab::ScalingOptions scaling{eo.tol, eo.max_iters};

    ctab::McmcConfig mcmc;
    if (!eo.mcmc_json.empty()) mcmc = ctab::mcmc_config_from_json(json::parse(eo.mcmc_json));

    ctab::EstimateReport rep;
    if (eo.method == "direct") {
        std::vector<double> trace;
        rep = ctab::estimate_T_prime_direct(problem, eo.samples, rng, eo.weight_eps, scaling,
                                            eo.trace_file.empty() ? nullptr : &trace);
        if (!eo.trace_file.empty()) {
            std::ofstream tf(eo.trace_file);
            tf << "sample,log_sigma\n";
            for (std::size_t k = 0; k < trace.size(); ++k) tf << k << "," << trace[k] << "\n";
        }
    } else if (eo.method == "simplex") {
        rep = ctab::estimate_T_prime_simplex(problem, eo.eps, rng, mcmc, eo.weight_eps, scaling,
                                             eo.delta);
    } else {
        throw ctab::validation_error("unknown method: " + eo.method);
    }

    json results = ctab::estimate_report_to_json(rep);
    try {
        ctab::ExactTotal total = ctab::weighted_total_exact(problem, {eo.budget});
        results["T_exact"] = total.value;
        results["T_in_bracket"] =
            total.value >= rep.ci_lo && total.value <= rep.alpha * rep.ci_hi;
    } catch (const ctab::precondition_error&) {
        // oracle infeasible at this budget; report the estimate alone
    }

    json out = report_shell("estimate", opts,
                            {{"file", file},
                             {"method", eo.method},
                             {"samples", eo.samples},
                             {"eps", eo.eps},
                             {"tol", eo.tol}});
    out["results"] = results;
    if (opts.timings) out["wall_seconds"] = timer.seconds();
    emit(out, opts);
    return 0;
}

// ---------------------------------------------------------------- flows ---

int cmd_flows(const std::string& file, const EstimateOpts& eo, const CommonOpts& opts) {
    Timer timer;
    ctab::FlowProblem flow = ctab::load_flow_problem(file);
    if (!flow.acyclic) throw ctab::precondition_error("graph contains a directed cycle");

    json results;
    ctab::FlowReduction red = ctab::reduce_flow_problem(flow);
    results["z"] = red.z;
    results["rows"] = red.problem.row_margins;
    results["cols"] = red.problem.col_margins;

    bool exact_ok = false;
    try {
        long long flows = ctab::count_flows_exact(flow, {eo.budget});
        results["flows"] = flows;
        exact_ok = true;
    } catch (const ctab::precondition_error&) {
        // fall back to the estimator
    }
    if (!exact_ok) {
        ctab::RandomSource rng(opts.seed);
        ctab::FlowEstimateOptions fo;
        fo.samples = eo.samples;
        fo.weight_eps = eo.weight_eps;
        fo.use_simplex = eo.method == "simplex";
        fo.epsilon = eo.eps;
        if (!eo.mcmc_json.empty()) fo.mcmc = ctab::mcmc_config_from_json(json::parse(eo.mcmc_json));
        ctab::FlowEstimate est = ctab::estimate_flows(flow, rng, fo);
        results["estimate"] = ctab::estimate_report_to_json(est.report);
        results["weight_eps"] = est.weight_eps;
        results["eps_sensitivity"] = {{"t_prime_eps10", est.t_prime_eps10},
                                      {"consistent", est.sensitivity_consistent}};
    }

    json out = report_shell("flows", opts, {{"file", file}, {"budget", eo.budget}});
    out["results"] = results;
    if (opts.timings) out["wall_seconds"] = timer.seconds();
    emit(out, opts);
    return 0;
}

// ------------------------------------------------------------- validate ---

json property(const std::string& name, long long violations, long long cases) {
    return {{"property", name}, {"pass", violations == 0}, {"violations", violations},
            {"cases", cases}};
}

ctab::Matrix random_positive_matrix(int n, ctab::RandomSource& rng) {
    ctab::Matrix a(n, n);
    for (double& v : a.data) v = std::exp(2.0 * (2.0 * rng.uniform01() - 1.0));
    return a;
}

json suite_scaling(std::uint64_t seed) {
    ctab::RandomSource rng(seed);
    long long bad_resid = 0, bad_recon = 0, bad_eta = 0, bad_routes = 0, bad_sandwich = 0;
    const int cases = 100;
    for (int t = 0; t < cases; ++t) {
        int n = 2 + static_cast<int>(rng.next_u64() % 7);  // N in 2..8
        ctab::Matrix a = random_positive_matrix(n, rng);
        ctab::ScalingResult s = ctab::sinkhorn_scale(a);
        if (s.residual > 1e-10) ++bad_resid;
        double recon = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                recon = std::max(recon,
                                 std::fabs(a(i, j) - s.B(i, j) * s.xi[i] * s.eta[j]) / a(i, j));
        if (recon > 1e-9) ++bad_recon;
        double log_eta = 0.0;
        for (double e : s.eta) log_eta += std::log(e);
        if (std::fabs(log_eta) > 1e-10) ++bad_eta;
        if (std::fabs(s.log_sigma - ctab::log_sigma_via_minimization(a)) > 1e-6) ++bad_routes;
        double per = ctab::permanent_ryser(a);
        if (std::exp(s.log_sigma + ctab::log_vdw_lower_bound(n)) > per * (1.0 + 1e-9))
            ++bad_sandwich;
    }

    long long bad_mono = 0, bad_homog = 0, bad_concave = 0;
    const int pair_cases = 50;
    for (int t = 0; t < pair_cases; ++t) {
        int n = 2 + static_cast<int>(rng.next_u64() % 5);
        ctab::Matrix a = random_positive_matrix(n, rng);
        ctab::Matrix a2 = a;
        for (double& v : a2.data) v *= 0.2 + 0.8 * rng.uniform01();  // elementwise <= a
        double ls_a = ctab::log_sigma(a), ls_a2 = ctab::log_sigma(a2);
        if (ls_a2 > ls_a + 1e-7) ++bad_mono;
        for (double lambda : {0.5, 2.0, 10.0}) {
            ctab::Matrix al = a;
            for (double& v : al.data) v *= lambda;
            if (std::fabs(ctab::log_sigma(al) - (ls_a + n * std::log(lambda))) > 1e-8 * n)
                ++bad_homog;
        }
        ctab::Matrix b = random_positive_matrix(n, rng);
        double ls_b = ctab::log_sigma(b);
        for (double alpha : {0.25, 0.5, 0.75}) {
            ctab::Matrix mix(n, n);
            for (std::size_t k = 0; k < mix.data.size(); ++k)
                mix.data[k] = alpha * a.data[k] + (1.0 - alpha) * b.data[k];
            if (ctab::log_sigma(mix) < alpha * ls_a + (1.0 - alpha) * ls_b - 1e-7) ++bad_concave;
        }
    }

    return json::array({property("residual<=tol", bad_resid, cases),
                        property("reconstruction", bad_recon, cases),
                        property("prod_eta=1", bad_eta, cases),
                        property("fixed_point_vs_convex_min", bad_routes, cases),
                        property("vdw_sandwich", bad_sandwich, cases),
                        property("monotonicity", bad_mono, pair_cases),
                        property("homogeneity", bad_homog, pair_cases * 3),
                        property("log_concavity", bad_concave, pair_cases * 3)});
}

json suite_theorem12(std::uint64_t seed) {
    ctab::RandomSource rng(seed);
    struct Case {
        std::vector<long long> rows, cols;
        ctab::Matrix w;
    };
    std::vector<Case> cases;
    {
        ctab::Matrix w(2, 2);
        w(0, 0) = 2;
        w(0, 1) = 1;
        w(1, 0) = 1;
        w(1, 1) = 2;
        cases.push_back({{1, 1}, {1, 1}, w});
    }
    cases.push_back({{2, 2}, {2, 2}, ctab::Matrix()});
    cases.push_back({{2, 1}, {1, 1, 1}, ctab::Matrix()});
    cases.push_back({{2, 2, 2}, {2, 2, 2}, ctab::Matrix()});

    json out = json::array();
    for (std::size_t k = 0; k < cases.size(); ++k) {
        ctab::ProblemInstance p =
            ctab::validate_problem(cases[k].rows, cases[k].cols, cases[k].w);
        double t_exact = ctab::weighted_total_exact(p).value;
        ctab::RandomSource crng = rng.split(k);
        ctab::MeanStderr ms = ctab::estimate_expected_permanent(p, 10000, crng);
        bool pass = std::fabs(ms.mean - t_exact) <= 4.0 * ms.stderr_est;
        out.push_back({{"property", "mc_vs_oracle_case_" + std::to_string(k)},
                       {"pass", pass},
                       {"T_exact", t_exact},
                       {"mc_mean", ms.mean},
                       {"mc_stderr", ms.stderr_est}});
    }
    return out;
}

json suite_bounds(std::uint64_t seed) {
    ctab::RandomSource rng(seed);
    long long bad_vdw = 0;
    for (int n = 1; n <= 8; ++n) {
        ctab::Matrix j(n, n, 1.0 / n);
        double per = ctab::permanent_ryser(j);
        double vdw = ctab::vdw_lower_bound(n);
        if (std::fabs(per - vdw) > 1e-10 * vdw) ++bad_vdw;
    }
    long long bad_sandwich = 0;
    const int cases = 100;
    for (int t = 0; t < cases; ++t) {
        int n = 2 + static_cast<int>(rng.next_u64() % 6);  // N in 2..7
        ctab::ScalingResult s = ctab::sinkhorn_scale(random_positive_matrix(n, rng));
        double per = ctab::permanent_ryser(s.B);
        std::vector<long long> ti(n);
        for (int i = 0; i < n; ++i) {
            double mx = 0.0;
            for (int j = 0; j < n; ++j) mx = std::max(mx, s.B(i, j));
            ti[i] = std::max(1LL, static_cast<long long>(std::floor(1.0 / mx)));
        }
        if (per > ctab::bregman_extension_bound(ti) + 1e-10) ++bad_sandwich;
        if (per < ctab::vdw_lower_bound(n) - 1e-10) ++bad_sandwich;
    }
    long long bad_soules = 0;
    for (long long t = 1; t <= 12; ++t) {
        double br = ctab::log_bregman_extension_bound({t, t, t});
        double so = ctab::log_soules_bound({double(t), double(t), double(t)});
        if (std::fabs(br - so) > 1e-12 * std::max(1.0, std::fabs(br))) ++bad_soules;
    }
    return json::array({property("vdw_equality_witness", bad_vdw, 8),
                        property("vdw_bregman_sandwich", bad_sandwich, cases),
                        property("soules_equals_bregman_integer_t", bad_soules, 12)});
}

json suite_lemma42(std::uint64_t) {
    json out = json::array();
    struct Case {
        std::vector<long long> rows, cols;
    };
    for (const Case& c : {Case{{2}, {1, 1}}, Case{{3}, {2, 1}}}) {
        ctab::ProblemInstance p = ctab::validate_problem(c.rows, c.cols);
        ctab::Lemma42Report r = ctab::verify_lemma_4_2(p);
        out.push_back({{"property", "lemma42_quadrature"},
                       {"rows", c.rows},
                       {"cols", c.cols},
                       {"pass", r.rel_err_P <= 1e-3 && r.rel_err_S <= 1e-3},
                       {"rel_err_P", r.rel_err_P},
                       {"rel_err_S", r.rel_err_S}});
    }
    return out;
}

int cmd_validate(const std::string& suite, const CommonOpts& opts) {
    Timer timer;
    json results;
    if (suite == "scaling")
        results = suite_scaling(opts.seed);
    else if (suite == "theorem12")
        results = suite_theorem12(opts.seed);
    else if (suite == "bounds")
        results = suite_bounds(opts.seed);
    else if (suite == "lemma42")
        results = suite_lemma42(opts.seed);
    else
        throw ctab::validation_error("unknown suite: " + suite);

    json out = report_shell("validate", opts, {{"suite", suite}});
    out["results"] = results;
    bool all_pass = true;
    for (const auto& r : results)
        if (!r.at("pass").get<bool>()) all_pass = false;
    out["all_pass"] = all_pass;
    if (opts.timings) out["wall_seconds"] = timer.seconds();
    emit(out, opts);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted contingency-table totals: exact counts, certified T' brackets, "
                 "integer flow counting"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--seed", common.seed, "random seed")->envname("CTAB_SEED");
    app.add_flag("--pretty", common.pretty, "human-formatted JSON output");
    app.add_flag("--timings", common.timings,
                 "include wall-clock timings (breaks byte-identical reruns)");
    app.add_option("--threads", common.threads, "parallelism cap (current build is single-threaded)")
        ->envname("CTAB_THREADS");

    EstimateOpts eo;
    std::string problem_file, graph_file, suite;
    long long exact_budget = 10'000'000;

    CLI::App* exact = app.add_subcommand("exact", "exact totals by enumeration");
    exact->add_option("file", problem_file, "problem JSON file")->required();
    exact->add_option("--budget", exact_budget, "enumeration node budget")->envname("CTAB_BUDGET");

    CLI::App* estimate = app.add_subcommand("estimate", "Monte Carlo T' with bracket");
    estimate->add_option("file", problem_file, "problem JSON file")->required();
    estimate->add_option("--method", eo.method, "direct|simplex")->envname("CTAB_METHOD");
    estimate->add_option("--samples", eo.samples, "Monte Carlo samples (direct)")
        ->envname("CTAB_SAMPLES");
    estimate->add_option("--eps", eo.eps, "simplex truncation parameter");
    estimate->add_option("--delta", eo.delta, "simplex delta override");
    estimate->add_option("--weight-eps", eo.weight_eps, "zero-weight substitution value");
    estimate->add_option("--tol", eo.tol, "scaling tolerance")->envname("CTAB_TOL");
    estimate->add_option("--max-iters", eo.max_iters, "scaling iteration cap");
    estimate->add_option("--budget", eo.budget, "oracle enumeration budget");
    estimate->add_option("--mcmc", eo.mcmc_json, "MCMC config as inline JSON");
    estimate->add_option("--trace", eo.trace_file, "write per-sample log-sigma CSV here");

    CLI::App* flows = app.add_subcommand("flows", "count integer feasible flows");
    flows->add_option("file", graph_file, "graph JSON file")->required();
    flows->add_option("--method", eo.method, "direct|simplex (estimator fallback)");
    flows->add_option("--samples", eo.samples, "Monte Carlo samples");
    flows->add_option("--eps", eo.eps, "simplex truncation parameter");
    flows->add_option("--weight-eps", eo.weight_eps, "zero-weight substitution value");
    flows->add_option("--budget", eo.budget, "enumeration node budget");
    flows->add_option("--mcmc", eo.mcmc_json, "MCMC config as inline JSON");

    CLI::App* validate = app.add_subcommand("validate", "randomized property suites");
    validate->add_option("--suite", suite, "scaling|theorem12|bounds|lemma42")->required();

    // global flags (--seed, --pretty, ...) may appear after the subcommand
    for (CLI::App* sub : {exact, estimate, flows, validate}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        json err = {{"error", e.what()}, {"code", 2}};
        std::cout << err.dump() << "\n";
        return 2;
    }

    try {
        if (exact->parsed()) return cmd_exact(problem_file, exact_budget, common);
        if (estimate->parsed()) return cmd_estimate(problem_file, eo, common);
        if (flows->parsed()) return cmd_flows(graph_file, eo, common);
        if (validate->parsed()) return cmd_validate(suite, common);
    } catch (const ctab::validation_error& e) {
        json err = {{"error", e.what()}, {"code", 2}};
        std::cout << err.dump() << "\n";
        return 2;
    } catch (const ctab::precondition_error& e) {
        json err = {{"error", e.what()}, {"code", 3}};
        std::cout << err.dump() << "\n";
        return 3;
    } catch (const ctab::numerical_error& e) {
        json err = {{"error", e.what()}, {"code", 4}};
        std::cout << err.dump() << "\n";
        return 4;
    }
    return 0;
}
