#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "json.hpp"

// FDR_CLI_PATH comes from the build system and points at the fdr binary.

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    static int counter = 0;
    const std::string tag = std::to_string(++counter);
    const std::string out_path = "tmp_cli_stdout_" + tag;
    const std::string err_path = "tmp_cli_stderr_" + tag;
    std::string cmd = env_prefix;
    if (!cmd.empty()) cmd += ' ';
    cmd += '"';
    cmd += FDR_CLI_PATH;
    cmd += "\" ";
    cmd += args;
    cmd += " > " + out_path + " 2> " + err_path;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return r;
}

std::string write_problem(const std::string& name, const std::string& body) {
    std::ofstream f(name);
    f << body;
    return name;
}

const std::string kTwoAtomKl = write_problem("tmp_cli_kl2.json", R"({
    "divergence": "kl",
    "lambda": 1.0,
    "reference": {"type": "discrete", "atoms": [[0.0], [1.0]], "masses": [0.5, 0.5]},
    "risk": {"type": "values", "values": [0.0, 1.0]}
})");

const std::string kEx1Rkl = write_problem("tmp_cli_ex1.json", R"({
    "divergence": "reverse_kl",
    "reference": {"type": "density1d", "name": "example1_gamma"},
    "risk": {"type": "dataset", "loss": "squared", "predictor": "linear", "data": [[1.0, 0.0]]}
})");

const std::string kChi2Unbounded = write_problem("tmp_cli_chi2u.json", R"({
    "divergence": "chi2",
    "lambda": 1.0,
    "reference": {"type": "density1d", "name": "example1_gamma"},
    "risk": {"type": "dataset", "loss": "squared", "predictor": "linear", "data": [[1.0, 1.0]]}
})");

const std::string kSweep = write_problem("tmp_cli_sweep.json", R"({
    "divergence": "reverse_kl",
    "lambda": {"start": 0.75, "stop": 2.5, "count": 8},
    "reference": {"type": "discrete", "atoms": [[0.0], [1.0]], "masses": [0.5, 0.5]},
    "risk": {"type": "values", "values": [1.0, 2.0]}
})");

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

TEST_CASE("solve emits a normalized posterior") {
    const auto r = run_cli("solve --problem " + kTwoAtomKl);
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("command") == "solve");
    CHECK(doc.at("divergence") == "kl");
    CHECK(doc.at("lambda") == 1.0);
    CHECK(doc.at("beta").get<double>() == doctest::Approx(-1.3798854930417225).epsilon(1e-9));
    const auto masses = doc.at("masses").get<std::vector<double>>();
    REQUIRE(masses.size() == 2);
    // The mass total is k(beta-hat), pinned to 1 only up to the solve tolerance.
    CHECK(masses[0] + masses[1] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(doc.at("stationarity").get<double>() <= 1e-8);
    CHECK_FALSE(doc.contains("timings"));
}

TEST_CASE("default output is byte-stable across runs") {
    const auto a = run_cli("solve --problem " + kTwoAtomKl);
    const auto b = run_cli("solve --problem " + kTwoAtomKl);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("debug logging adds timings without touching exit status") {
    const auto r = run_cli("solve --problem " + kTwoAtomKl, "FDR_LOG=debug");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.contains("timings"));
    CHECK(doc.at("timings").contains("total_ms"));
}

TEST_CASE("--out redirects the document") {
    const std::string dest = "tmp_cli_solve_doc.json";
    const auto r = run_cli("solve --problem " + kTwoAtomKl + " --out " + dest);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.empty());
    const auto doc = nlohmann::json::parse(slurp(dest));
    CHECK(doc.at("command") == "solve");
    std::remove(dest.c_str());
}

TEST_CASE("infeasible lambda exits 2 and names the threshold") {
    const auto r = run_cli("solve --problem " + kEx1Rkl + " --lambda 0.25");
    CHECK(r.exit_code == 2);
    const auto pos = r.err.find("lambda* = ");
    REQUIRE(pos != std::string::npos);
    const double lstar = std::strtod(r.err.c_str() + pos + 10, nullptr);
    CHECK(lstar == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("empty feasible interval exits 2") {
    const auto r = run_cli("solve --problem " + kChi2Unbounded);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("empty") != std::string::npos);
}

TEST_CASE("an unreachable tolerance exits 3") {
    const auto r = run_cli("solve --problem " + kTwoAtomKl + " --tol 1e-30");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("did not converge") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
    CHECK(run_cli("solve --problem tmp_cli_no_such_file.json").exit_code == 1);
    CHECK(run_cli("solve --problem " + kTwoAtomKl + " --frobnicate").exit_code == 1);
    CHECK(run_cli("equiv --problem " + kTwoAtomKl).exit_code == 1);

    const auto schema = write_problem("tmp_cli_bad_schema.json", R"({"divergence": "kl"})");
    CHECK(run_cli("solve --problem " + schema).exit_code == 1);
    std::remove(schema.c_str());
}

TEST_CASE("sweep tabulates the normalization function") {
    const auto r = run_cli("sweep --problem " + kSweep);
    REQUIRE(r.exit_code == 0);
    std::istringstream lines(r.out);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "lambda,N_lambda,beta,min_rn,max_rn,feasible");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(lines, line))
        if (!line.empty()) rows.push_back(split(line, ','));
    REQUIRE(rows.size() == 8);
    double prev = -1e300;
    for (const auto& row : rows) {
        REQUIRE(row.size() == 6);
        CHECK(row[5] == "1");
        CHECK(row[1] == row[2]);
        const double n = std::strtod(row[1].c_str(), nullptr);
        CHECK(n > prev);
        prev = n;
    }
}

TEST_CASE("classify reports the closed boundary of the first reproduction") {
    const auto r = run_cli("classify --problem " + kEx1Rkl);
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("boundary") == "closed_left");
    CHECK(doc.at("orientation") == "lower");
    CHECK(doc.at("lambda_star").get<double>() == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(doc.at("admissible").at("lo_closed") == true);
}

TEST_CASE("equiv round trips the two-atom problem") {
    const auto r = run_cli("equiv --problem " + kTwoAtomKl + " --second reverse_kl");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("f") == "kl");
    CHECK(doc.at("g") == "reverse_kl");
    CHECK(doc.at("posterior_gap").get<double>() <= 1e-8);
}

TEST_CASE("oracle-check certifies the closed form") {
    const auto r = run_cli("oracle-check --problem " + kTwoAtomKl);
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("pass") == true);
    CHECK(doc.at("mass_gap").get<double>() <= 1e-4);
}

TEST_CASE("examples reproduce the worked results") {
    const auto r = run_cli("examples");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("reproductions passed: 3/3") != std::string::npos);
}
