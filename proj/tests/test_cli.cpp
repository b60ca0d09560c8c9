#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "entspec/cnf.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args, bool merge_stderr) {
    const std::string cmd = std::string(ENTSPEC_CLI_PATH) + " " + args +
                            (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe) != nullptr) res.out += buf;
    const int status = pclose(pipe);
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

fs::path scratch_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("entspec_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ostringstream ss;
    ss << std::ifstream(p).rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("generated formulas round-trip through the parser") {
    const fs::path dir = scratch_dir("gen");
    const RunResult res =
        run_cli("gen-formulas --n 3 --count 4 --seed 7 --out " + dir.string(), false);
    REQUIRE(res.code == 0);
    const json report = json::parse(res.out);
    CHECK(report["num_vars"] == 3);
    REQUIRE(report["files"].size() == 4);
    for (const auto& entry : report["files"]) {
        const fs::path p(entry["path"].get<std::string>());
        REQUIRE(fs::exists(p));
        const entspec::CnfFormula f = entspec::parse_dimacs(slurp(p));
        CHECK(f.num_vars == 3);
        CHECK(f.num_clauses() >= 1);
        CHECK(entry["num_clauses"] == f.num_clauses());
    }

    // same seed, same bytes
    const fs::path dir2 = scratch_dir("gen2");
    const RunResult res2 =
        run_cli("gen-formulas --n 3 --count 4 --seed 7 --out " + dir2.string(), false);
    REQUIRE(res2.code == 0);
    const json report2 = json::parse(res2.out);
    for (std::size_t i = 0; i < 4; ++i) {
        const std::string a = slurp(fs::path(report["files"][i]["path"].get<std::string>()));
        const std::string b = slurp(fs::path(report2["files"][i]["path"].get<std::string>()));
        CHECK(a == b);
    }
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("count-sat cross-checks all counting routes") {
    const fs::path dir = scratch_dir("count");
    const fs::path cnf = write_file(dir, "f.cnf", "p cnf 3 2\n1 2 0\n-1 3 0\n");
    const RunResult res = run_cli("count-sat --dimacs " + cnf.string(), false);
    REQUIRE(res.code == 0);
    const json report = json::parse(res.out);
    CHECK(report["num_vars"] == 3);
    CHECK(report["num_clauses"] == 2);
    CHECK(report["brute_force"] == 4);
    CHECK(report["cgd_diagonalization"] == 4);
    CHECK(report["ces_count"] == 4);
    CHECK(report["match_diagonalization"] == true);
    CHECK(report["match_ces"] == true);
    REQUIRE(!report["pipeline"].is_null());
    CHECK(report["pipeline"]["d_t"] == 2);
    CHECK(report["pipeline"]["rounded"] == 4);
    CHECK(report["match_pipeline"] == true);
    fs::remove_all(dir);
}

TEST_CASE("failure classes map to distinct exit codes") {
    const fs::path dir = scratch_dir("errors");

    const fs::path wide = write_file(dir, "wide.cnf", "p cnf 3 1\n1 2 3 0\n");
    CHECK(run_cli("count-sat --dimacs " + wide.string(), true).code == 1);

    const fs::path taut = write_file(dir, "taut.cnf", "p cnf 2 1\n1 -1 0\n");
    const RunResult degen = run_cli("count-sat --dimacs " + taut.string(), true);
    CHECK(degen.code == 2);
    CHECK(degen.out.find("2^n") != std::string::npos);  // the trivial count is named

    CHECK(run_cli("count-sat --dimacs " + (dir / "missing.cnf").string(), true).code == 1);
    CHECK(run_cli("count-sat --nonsense", true).code != 0);
    CHECK(run_cli("", true).code != 0);  // a subcommand is required

    const fs::path ok = write_file(dir, "ok.cnf", "p cnf 2 1\n1 2 0\n");
    // threshold 1.0 breaks the promise ordering (input error), threshold 0.0
    // survives validation but lands exactly on a phase grid point (tie)
    CHECK(run_cli("qpe-count --dimacs " + ok.string() + " --threshold 1.0", true).code == 1);
    CHECK(run_cli("qpe-count --dimacs " + ok.string() + " --threshold 0.0", true).code == 4);
    fs::remove_all(dir);
}

TEST_CASE("spectrum subcommand exports the eigenvalue table") {
    const fs::path dir = scratch_dir("spectrum");
    const fs::path cnf = write_file(dir, "f.cnf", "p cnf 3 2\n1 2 0\n-1 3 0\n");
    const fs::path csv = dir / "spec.csv";
    const RunResult res =
        run_cli("spectrum --dimacs " + cnf.string() + " --out " + csv.string(), false);
    REQUIRE(res.code == 0);
    const json report = json::parse(res.out);
    CHECK(report["lambda_star"].get<double>() > 0.0);
    CHECK(report["count_above"].get<int>() + report["satisfying"].get<int>() == 8);
    CHECK(report["satisfying"] == 4);
    const std::string table = slurp(csv);
    CHECK(table.rfind("index,eigenvalue\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("qpe-count runs one pipeline experiment") {
    const fs::path dir = scratch_dir("qpe");
    const fs::path cnf = write_file(dir, "f.cnf", "p cnf 2 1\n1 2 0\n");
    const RunResult res = run_cli("qpe-count --dimacs " + cnf.string() + " --r 3", false);
    REQUIRE(res.code == 0);
    const json report = json::parse(res.out);
    CHECK(report["r"] == 3);
    CHECK(report["mode"] == "exact_diagonal");
    CHECK(report["brute_force"] == 3);
    CHECK(report["rounded"] == 3);
    CHECK(report["match"] == true);
    fs::remove_all(dir);
}

TEST_CASE("taylor bench sweeps truncation orders") {
    const fs::path dir = scratch_dir("taylor");
    const fs::path csv = dir / "sweep.csv";
    const RunResult res = run_cli(
        "taylor-bench --n 1 --t 3.141592653589793 --epsilon 1e-8 --seed 3 --out " + csv.string(),
        false);
    REQUIRE(res.code == 0);

    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "K,error,chosen");
    std::vector<double> errors;
    bool chosen_ok = false;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string k, err, chosen;
        std::getline(row, k, ',');
        std::getline(row, err, ',');
        std::getline(row, chosen, ',');
        errors.push_back(std::stod(err));
        if (chosen == "1" && std::stod(err) <= 1e-8) chosen_ok = true;
    }
    REQUIRE(errors.size() >= 3);
    CHECK(chosen_ok);
    CHECK(errors.back() <= 1e-8);  // past the chosen order the tail only shrinks

    // zero time: the identity is exact at every order
    const RunResult zero =
        run_cli("taylor-bench --n 1 --t 0 --epsilon 1e-8 --out " + csv.string(), false);
    REQUIRE(zero.code == 0);
    std::ifstream zin(csv);
    std::getline(zin, header);
    std::getline(zin, line);
    const double first_error = std::stod(line.substr(line.find(',') + 1));
    CHECK(first_error <= 1e-12);
    fs::remove_all(dir);
}

TEST_CASE("history-verify reports the frozen clause instance") {
    const fs::path dir = scratch_dir("history");
    const fs::path cnf = write_file(dir, "f.cnf", "p cnf 2 1\n1 2 0\n");
    const RunResult res =
        run_cli("history-verify --no-gap --dimacs " + cnf.string(), false);
    REQUIRE(res.code == 0);
    const json report = json::parse(res.out);
    CHECK(report["n_sys"] == 11);
    CHECK(report["T0"] == 57);
    CHECK(report["T"] == 60);
    CHECK(std::abs(report["state_norm"].get<double>() - 1.0) < 1e-9);
    CHECK(std::abs(report["ground_energy"].get<double>()) < 1e-9);
    CHECK(report["locality_violations"] == 0);
    CHECK(report["tau_residual"].get<double>() < 1e-9);
    CHECK(report["per_t"].size() == 61);
    CHECK(!report.contains("gap"));
    fs::remove_all(dir);
}
