#include "normest/cli.hpp"

#include "normest/io.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;
using normest::cli::dispatch;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("normest_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string write(const std::string& name, const std::string& text) const {
        const fs::path p = path / name;
        std::ofstream(p, std::ios::binary) << text;
        return p.string();
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "normest");
    std::ostringstream out;
    std::ostringstream err;
    const int code = dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) { return normest::io::read_file(path); }

std::string spread_csv() {
    std::string text = "x,y\n";
    for (int i = 0; i < 40; ++i) text += std::to_string(i % 7) + "," + std::to_string((i * 3) % 11) + "\n";
    return text;
}

}  // namespace

TEST_CASE("estimate on constant rows") {
    TempDir t;
    std::string text;
    for (int i = 0; i < 30; ++i) text += "1.5,-2,7\n";
    const auto in = t.write("const.csv", text);
    const auto r = run({"estimate", "--input", in, "--adaptive"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["point"] == json::parse("[1.5,-2.0,7.0]"));
    CHECK(j["feasible"] == true);
    CHECK(j["config"]["command"] == "estimate");
    CHECK(j.contains("version"));
}

TEST_CASE("estimate with zero epsilon on spread data is infeasible") {
    TempDir t;
    const auto in = t.write("spread.csv", spread_csv());
    const auto r = run({"estimate", "--input", in, "--epsilon", "0", "--norm", "l1"});
    CHECK(r.code == 1);
    CHECK(json::parse(r.out)["feasible"] == false);
}

TEST_CASE("usage and input errors exit with 2") {
    TempDir t;
    const auto in = t.write("spread.csv", spread_csv());
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"estimate", "--input", in}).code == 2);
    CHECK(run({"estimate", "--input", in, "--epsilon", "1", "--adaptive"}).code == 2);
    CHECK(run({"estimate", "--input", in, "--epsilon", "1", "--norm", "l7"}).code == 2);
    CHECK(run({"estimate", "--input", t.file("missing.csv"), "--adaptive"}).code == 2);

    const auto bad = t.write("bad.csv", "1,2\n3,oops\n");
    const auto r = run({"estimate", "--input", bad, "--adaptive"});
    CHECK(r.code == 2);
    CHECK(r.err.find("row 2") != std::string::npos);
    CHECK(r.err.find("field 2") != std::string::npos);

    const auto cfg = t.write("bad.json", "{\"distribution\": {\"kind\": \"gaussian\"}, \"trials\": \"many\"}");
    CHECK(run({"bench", "--config", cfg}).code == 2);
    const auto broken = t.write("broken.json", "{\"distribution\": ");
    CHECK(run({"bench", "--config", broken}).code == 2);

    CHECK(run({"--version"}).code == 0);
}

TEST_CASE("bounds report") {
    TempDir t;
    const auto cov = t.write("cov.csv", "1,0,0,0\n0,1,0,0\n0,0,1,0\n0,0,0,1\n");
    const auto r = run({"bounds", "--norm", "l2", "--cov", cov, "--n-samples", "100", "--delta", "0.0366312777774684",
                        "--trials", "2000", "--seed", "4"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["euclidean_epsilon"].get<double>() == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(j["r_weak"].get<double>() == doctest::Approx(1.0));
    CHECK(j["e_yn_source"] == "gaussian_surrogate");
    CHECK(j["epsilon"].get<double>() > 0.0);

    const auto sample = t.write("s.csv", spread_csv());
    const auto cov2 = t.write("cov2.csv", "1,0\n0,1\n");
    const auto mu = t.write("mu.csv", "3,5\n");
    const auto with = run({"bounds", "--cov", cov2, "--n-samples", "40", "--input", sample, "--mu", mu, "--trials", "500"});
    REQUIRE(with.code == 0);
    CHECK(json::parse(with.out)["e_yn_source"] == "rademacher");
}

TEST_CASE("certify exit codes follow the verdict") {
    TempDir t;
    const auto in = t.write("x.csv", "0\n0.1\n5\n");
    const auto mu = t.write("mu.csv", "0\n");
    const auto pass = run({"certify", "--input", in, "--norm", "linf", "--mu", mu, "--r", "0.5", "--blocks", "3"});
    CHECK(pass.code == 0);
    CHECK(json::parse(pass.out)["min_coverage"] == 2);
    const auto fail = run({"certify", "--input", in, "--norm", "linf", "--mu", mu, "--r", "0.05", "--blocks", "3"});
    CHECK(fail.code == 1);
    CHECK(json::parse(fail.out)["pass"] == false);
    const auto mu2 = t.write("mu2.csv", "0,1\n");
    CHECK(run({"certify", "--input", in, "--mu", mu2, "--r", "1", "--blocks", "3"}).code == 2);
}

TEST_CASE("bench is byte-identical across runs and thread counts") {
    TempDir t;
    const auto cfg = t.write("cfg.json", R"({
        "distribution": {"kind": "student_t", "dof": 4},
        "d": 3, "N": 150, "trials": 12, "delta": 0.05,
        "norm": "l1", "master_seed": 8, "bound_trials": 200
    })");
    const auto a = run({"bench", "--config", cfg, "--threads", "1", "--csv", t.file("a.csv")});
    const auto b = run({"bench", "--config", cfg, "--threads", "3", "--csv", t.file("b.csv")});
    const auto c = run({"bench", "--config", cfg, "--threads", "0", "--out", t.file("c.json")});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == slurp(t.file("c.json")));
    CHECK(slurp(t.file("a.csv")) == slurp(t.file("b.csv")));
    CHECK(slurp(t.file("a.csv")).rfind("estimator,quantile,level,error\n", 0) == 0);
    const auto j = json::parse(a.out);
    CHECK(j["config"]["master_seed"] == 8);
    CHECK(j["estimators"].size() == 4);
}

TEST_CASE("NORMEST_SEED sets the default seed") {
    TempDir t;
    const auto in = t.write("spread.csv", spread_csv());
    ::setenv("NORMEST_SEED", "1234", 1);
    const auto r = run({"estimate", "--input", in, "--adaptive", "--norm", "l2", "--budget", "32"});
    ::setenv("NORMEST_SEED", "not-a-number", 1);
    const auto bad = run({"estimate", "--input", in, "--adaptive"});
    ::unsetenv("NORMEST_SEED");
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["config"]["seed"] == 1234);
    CHECK(bad.code == 2);
}

TEST_CASE("installed binary runs end to end") {
    const char* bin = std::getenv("NORMEST_BIN");
    if (bin == nullptr) return;
    TempDir t;
    const auto in = t.write("spread.csv", spread_csv());
    const std::string base = std::string(bin) + " estimate --input " + in + " --adaptive --norm linf";
    CHECK(std::system((base + " --out " + t.file("one.json")).c_str()) == 0);
    CHECK(std::system((base + " --threads 4 --out " + t.file("two.json")).c_str()) == 0);
    CHECK(slurp(t.file("one.json")) == slurp(t.file("two.json")));
    CHECK(WEXITSTATUS(std::system((std::string(bin) + " estimate 2>/dev/null").c_str())) == 2);
}
