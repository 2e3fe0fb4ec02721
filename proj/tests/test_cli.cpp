#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(CTAB_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string fixture(const std::string& name) {
    return std::string(CTAB_FIXTURES_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("exact command reports oracle totals") {
    RunResult r = run_cli("exact " + fixture("magic-3x3-t2.json"));
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["results"]["T"].get<double>() == 21.0);
    CHECK(j["results"]["tables"].get<long long>() == 21);

    json p = json::parse(run_cli("exact " + fixture("perm-2x2.json")).out);
    CHECK(p["results"]["T"].get<double>() == 5.0);
}

TEST_CASE("exact command rejects mismatched margins with exit 2") {
    RunResult r = run_cli("exact " + fixture("mismatched.json"));
    CHECK(r.exit_code == 2);
    json j = json::parse(r.out);
    CHECK(j.contains("error"));
}

TEST_CASE("missing file and unknown flags are input errors") {
    CHECK(run_cli("exact /nonexistent/problem.json").exit_code == 2);
    CHECK(run_cli("exact --bogus-flag x.json").exit_code == 2);
}

TEST_CASE("estimate produces a bracket containing the oracle") {
    RunResult r =
        run_cli("estimate " + fixture("magic-3x3-t2.json") + " --samples 10000 --seed 11");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["results"]["T_exact"].get<double>() == 21.0);
    CHECK(j["results"]["T_in_bracket"].get<bool>());
    double tp = j["results"]["t_prime"].get<double>();
    double alpha = j["results"]["alpha"].get<double>();
    CHECK(alpha == doctest::Approx(8.1).epsilon(1e-9));
    CHECK(tp <= 21.0 * 1.1);
    CHECK(21.0 <= alpha * tp * 1.3);
}

TEST_CASE("estimate on the single-cell problem") {
    RunResult r = run_cli("estimate " + fixture("n1.json") + " --samples 20000");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    double tp = j["results"]["t_prime"].get<double>();
    double se = j["results"]["stderr"].get<double>();
    CHECK(std::fabs(tp - 7.0) <= 3.0 * se);
    CHECK(j["results"]["alpha"].get<double>() == 1.0);
}

TEST_CASE("same seed gives byte-identical output") {
    std::string cmd = "estimate " + fixture("magic-3x3-t2.json") + " --samples 2000 --seed 99";
    RunResult a = run_cli(cmd);
    RunResult b = run_cli(cmd);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    RunResult c = run_cli("estimate " + fixture("magic-3x3-t2.json") + " --samples 2000 --seed 98");
    CHECK(c.out != a.out);
}

TEST_CASE("flows command counts and fails cleanly") {
    json j = json::parse(run_cli("flows " + fixture("triangle.json")).out);
    CHECK(j["results"]["flows"].get<long long>() == 3);
    json s = json::parse(run_cli("flows " + fixture("single-edge.json")).out);
    CHECK(s["results"]["flows"].get<long long>() == 1);

    RunResult cyc = run_cli("flows " + fixture("cyclic.json"));
    CHECK(cyc.exit_code == 3);
    json e = json::parse(cyc.out);
    CHECK(e["error"].get<std::string>().find("cycle") != std::string::npos);
}

TEST_CASE("flows falls back to the estimator under a tiny budget") {
    RunResult r = run_cli("flows " + fixture("triangle.json") + " --budget 2 --samples 20000");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    REQUIRE(j["results"].contains("estimate"));
    double lo = j["results"]["estimate"]["ci"][0].get<double>();
    double hi = j["results"]["estimate"]["ci"][1].get<double>();
    double alpha = j["results"]["estimate"]["alpha"].get<double>();
    CHECK(lo <= 3.0);
    CHECK(3.0 <= alpha * hi);
    CHECK(j["results"]["eps_sensitivity"]["consistent"].get<bool>());
}

TEST_CASE("validate suites all pass") {
    for (const std::string suite : {"scaling", "theorem12", "bounds"}) {
        RunResult r = run_cli("validate --suite " + suite);
        REQUIRE(r.exit_code == 0);
        json j = json::parse(r.out);
        CHECK(j["all_pass"].get<bool>());
    }
}

TEST_CASE("pretty flag changes formatting but not content") {
    std::string cmd = "exact " + fixture("perm-2x2.json");
    json plain = json::parse(run_cli(cmd).out);
    RunResult pretty = run_cli(cmd + " --pretty");
    CHECK(pretty.out.find('\n') != pretty.out.rfind('\n'));  // multi-line
    CHECK(json::parse(pretty.out) == plain);
}

TEST_CASE("trace flag writes a per-sample CSV") {
    std::string trace = "/tmp/ctab_trace_test.csv";
    std::remove(trace.c_str());
    RunResult r = run_cli("estimate " + fixture("perm-2x2.json") + " --samples 50 --trace " + trace);
    REQUIRE(r.exit_code == 0);
    FILE* f = fopen(trace.c_str(), "r");
    REQUIRE(f != nullptr);
    char line[256];
    REQUIRE(fgets(line, sizeof line, f) != nullptr);
    CHECK(std::string(line).find("log_sigma") != std::string::npos);
    int rows = 0;
    while (fgets(line, sizeof line, f)) ++rows;
    fclose(f);
    CHECK(rows == 50);
    std::remove(trace.c_str());
}

TEST_CASE("environment variable overrides the seed") {
    std::string cmd = "estimate " + fixture("perm-2x2.json") + " --samples 500";
    RunResult with_env = run_cli(cmd + " --seed 424242");
    std::string env_cmd = std::string("CTAB_SEED=424242 ") + CTAB_CLI_PATH + " " + cmd;
    FILE* pipe = popen(env_cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    pclose(pipe);
    CHECK(out == with_env.out);
}
