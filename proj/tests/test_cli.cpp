#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ichem/cli.hpp"
#include "ichem/csv.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int status = -1;
    std::string out;
    std::string err;
};

Result run(std::initializer_list<std::string> args)
{
    std::vector<std::string> store{"ichem"};
    store.insert(store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : store) {
        argv.push_back(s.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    Result r;
    r.status = ichem::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string model(const std::string& name)
{
    const char* dir = std::getenv("ICHEM_EXAMPLES");
    return (fs::path(dir ? dir : "tools/models") / (name + ".json")).string();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("ichem_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::size_t line_count(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

bool contains(const std::string& hay, const std::string& needle)
{
    return hay.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("format_double")
{
    using ichem::format_double;
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.0) == "-2");
    CHECK(format_double(1e-300) == "1e-300");
    CHECK(format_double(0.6025641025641025) == "0.6025641025641025");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(INFINITY) == "inf");
    CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("usage errors exit with status 2")
{
    CHECK(run({}).status == 2);
    CHECK(run({"frobnicate"}).status == 2);
    const Result unknown = run({"thresholds", "--model", model("persistence"), "--bogus"});
    CHECK(unknown.status == 2);
    CHECK(contains(unknown.err, "--bogus"));
    CHECK(run({"thresholds"}).status == 2);
    CHECK(run({"thresholds", "--model", "/no/such/file.json"}).status == 2);
    CHECK(run({"thresholds", "--model", model("persistence"), "--p", "1.5"}).status == 2);
    CHECK(run({"thresholds", "--model", model("persistence"), "--p", "abc"}).status == 2);
    CHECK(run({"simulate", "--model", model("persistence"), "--init", "1,2"}).status == 2);
    CHECK(run({"simulate", "--model", model("persistence"), "--dt", "-1"}).status == 2);
}

TEST_CASE("help lists every flag")
{
    const Result top = run({"--help"});
    CHECK(top.status == 0);
    for (const char* cmd : {"validate", "thresholds", "simulate", "ode", "ensemble", "verify", "sweep"}) {
        CHECK(contains(top.out, cmd));
    }
    const Result v = run({"verify", "--help"});
    CHECK(v.status == 0);
    for (const char* flag : {"--model", "--p", "--t-end", "--dt", "--seed", "--paths", "--out", "--tol-rate",
                             "--tol-mean"}) {
        CHECK(contains(v.out, flag));
    }
    const Result s = run({"sweep", "--help"});
    CHECK(contains(s.out, "--p-grid"));
    CHECK(contains(run({"thresholds", "--help"}).out, "--theta"));
}

TEST_CASE("validate names the failing check")
{
    const Result bad = run({"validate", "--model", model("invalid_gamma")});
    CHECK(bad.status == 2);
    CHECK(contains(bad.err, "gamma_gt_neg1"));

    const Result good = run({"validate", "--model", model("persistence_jumps"), "--theta", "3"});
    CHECK(good.status == 0);
    CHECK(contains(good.out, "zeta"));
    CHECK(contains(good.out, "0.759"));
}

TEST_CASE("malformed model files give a field diagnostic")
{
    const fs::path dir = scratch("malformed");
    fs::create_directories(dir);
    const fs::path f = dir / "m.json";
    std::ofstream(f) << R"({"S0": 1, "D": 0.5, "m1": 0.4, "delta1": 0.5, "sigma1": 0.1, "m2": 0.3,
                           "delta2": 0.5, "sigma2": 0.1, "sigma3": 0.1, "sigma4": 2})";
    const Result r = run({"thresholds", "--model", f.string()});
    CHECK(r.status == 2);
    CHECK(contains(r.err, "sigma4"));

    std::ofstream(f, std::ios::trunc) << "{\"S0\": 1,\n \"D\": }";
    const Result syntax = run({"thresholds", "--model", f.string()});
    CHECK(syntax.status == 2);
    CHECK(contains(syntax.err, "line 2"));
}

TEST_CASE("thresholds on the persistence set")
{
    const Result r = run({"thresholds", "--model", model("persistence"), "--p", "0.5"});
    CHECK(r.status == 0);
    CHECK(contains(r.out, "beta2"));
    CHECK(contains(r.out, "beta3"));
    CHECK(contains(r.out, "19.51219512195122"));
    CHECK(contains(r.out, "4.50281425891182"));
    CHECK(contains(r.out, "Persistent"));

    const Result j = run({"thresholds", "--model", model("persistence"), "--json"});
    REQUIRE(j.status == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["regime"] == "Persistent");
    CHECK(doc["R1s"].get<double>() == doctest::Approx(4.5028142589118198874).epsilon(1e-13));
    CHECK(doc["predictions"]["y_mean_lower_bound"].get<double>() ==
          doctest::Approx(0.59839743589743589744).epsilon(1e-13));
    CHECK_FALSE(doc["predictions"].contains("x_mean_limit"));
}

TEST_CASE("simulate and ode write reproducible CSVs")
{
    const fs::path a = scratch("sim_a");
    const fs::path b = scratch("sim_b");
    for (const fs::path& dir : {a, b}) {
        const Result r = run({"simulate", "--model", model("persistence_jumps"), "--t-end", "20", "--seed",
                              "7", "--jumps", "--out", dir.string()});
        REQUIRE(r.status == 0);
    }
    const std::string traj = slurp(a / "trajectory.csv");
    CHECK(traj.rfind("t,S,x,y,meanS,meanx,meany,lnx_over_t,lny_over_t,phi\n", 0) == 0);
    CHECK(traj == slurp(b / "trajectory.csv"));
    CHECK(slurp(a / "jumps.csv") == slurp(b / "jumps.csv"));
    CHECK(slurp(a / "jumps.csv").rfind("t,mark\n", 0) == 0);
    // 2000 steps, about 1000 rows: stride 2.
    CHECK(line_count(traj) == 1001);

    const fs::path c = scratch("sim_c");
    REQUIRE(run({"simulate", "--model", model("persistence_jumps"), "--t-end", "20", "--seed", "8", "--out",
                 c.string()})
                .status == 0);
    CHECK(slurp(c / "trajectory.csv") != traj);
    CHECK_FALSE(fs::exists(c / "jumps.csv"));

    const fs::path o = scratch("ode");
    const Result r = run({"ode", "--model", model("persistence"), "--t-end", "5", "--dt", "0.01", "--stride",
                          "1", "--out", o.string()});
    CHECK(r.status == 0);
    CHECK(line_count(slurp(o / "ode.csv")) == 501);
}

TEST_CASE("verify on the extinction set passes with default tolerances")
{
    const fs::path dir = scratch("verify");
    const Result r = run({"verify", "--model", model("extinction"), "--t-end", "600", "--paths", "20", "--out",
                          dir.string()});
    CHECK(r.status == 0);
    CHECK(contains(r.out, "x_lyapunov_rate"));
    CHECK(contains(r.out, "PASS"));
    CHECK_FALSE(contains(r.out, "FAIL"));
    const std::string verdict = slurp(dir / "verdict.csv");
    CHECK(verdict.rfind("claim,source,relation,predicted,empirical,tolerance,passed\n", 0) == 0);
    CHECK(line_count(verdict) == 5);
    CHECK(fs::exists(dir / "ensemble.csv"));
    CHECK(fs::exists(dir / "terminal.csv"));
    CHECK(line_count(slurp(dir / "terminal.csv")) == 21);
}

TEST_CASE("verify exits 1 on a failing claim and 2 on a too-short horizon")
{
    const fs::path dir = scratch("verify_fail");
    const Result fail = run({"verify", "--model", model("persistence"), "--t-end", "500", "--paths", "10",
                             "--dt", "0.02", "--tol-mean", "-0.5", "--out", dir.string()});
    CHECK(fail.status == 1);
    CHECK(contains(fail.out, "FAIL"));

    const Result short_run = run({"verify", "--model", model("persistence"), "--t-end", "50", "--paths", "2",
                                  "--out", dir.string()});
    CHECK(short_run.status == 2);
    CHECK(contains(short_run.err, "horizon"));
}

TEST_CASE("ensemble output does not depend on worker count")
{
    const fs::path a = scratch("ens_a");
    const fs::path b = scratch("ens_b");
    REQUIRE(run({"ensemble", "--model", model("persistence_jumps"), "--t-end", "30", "--paths", "8",
                 "--workers", "1", "--out", a.string()})
                .status == 0);
    REQUIRE(run({"ensemble", "--model", model("persistence_jumps"), "--t-end", "30", "--paths", "8",
                 "--workers", "4", "--out", b.string()})
                .status == 0);
    CHECK(slurp(a / "ensemble.csv") == slurp(b / "ensemble.csv"));
    CHECK(slurp(a / "terminal.csv") == slurp(b / "terminal.csv"));
    const std::string header = slurp(a / "ensemble.csv").substr(0, 60);
    CHECK(header.rfind("t,S_mean,S_p5,S_p50,S_p95,x_mean", 0) == 0);
}

TEST_CASE("sweep writes one row per p")
{
    const fs::path dir = scratch("sweep");
    const Result r = run({"sweep", "--model", model("imprecise_uptake"), "--p-grid", "1, 0, 0.5", "--out",
                          dir.string()});
    CHECK(r.status == 0);
    const std::string csv = slurp(dir / "sweep.csv");
    CHECK(line_count(csv) == 4);
    CHECK(csv.rfind("p,S0,D,m1,", 0) == 0);
    CHECK(contains(csv, "\n0,"));
    CHECK(contains(csv, "BothExtinct"));
    CHECK(contains(csv, "PreyOnlyPersists"));
    CHECK(run({"sweep", "--model", model("imprecise_uptake"), "--p-grid", "0,x"}).status == 2);
    CHECK(run({"sweep", "--model", model("imprecise_uptake"), "--p-grid", "0,2"}).status == 2);
}
