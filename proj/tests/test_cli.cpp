#include <doctest.h>

#include "chanflow/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace chanflow;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// runs the command line in-process with stdout captured and stderr silenced
Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "chanflow");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    Run r;
    try {
        r.code = run_cli(static_cast<int>(argv.size()), argv.data());
    } catch (...) {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
        throw;
    }
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    r.out = out.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("chanflow_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream is(p);
    std::string line;
    std::getline(is, line);
    return line;
}

} // namespace

TEST_CASE("analyze prints a JSON report") {
    const Run r = run({"analyze", "--model", "metric11", "--a", "1", "--energy", "0.5"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["command"] == "analyze");
    CHECK(j["spec_version"] == 1);
    CHECK(j["classification"] == "saddle");
    CHECK(j["m0"] == 5);
    const double golden = (std::sqrt(5.0) - 1) / 2;
    CHECK(j["spectrum"]["eigenvalues"][0][0].get<double>() == doctest::Approx(-1 - golden).epsilon(1e-10));
    CHECK(j["spectrum"]["eigenvalues"][1][0].get<double>() == doctest::Approx(golden).epsilon(1e-10));
    CHECK(j["pairing"]["pass"] == true);
    CHECK(j.contains("tolerances"));
}

TEST_CASE("exit codes") {
    SUBCASE("unknown flag is a configuration error") {
        CHECK(run({"analyze", "--bogus"}).code == 3);
        CHECK(run({}).code == 3);
    }
    SUBCASE("missing and invalid parameters") {
        CHECK(run({"analyze", "--model", "metric11", "--a", "1"}).code == 3);
        CHECK(run({"analyze", "--model", "metric11", "--a", "-1", "--energy", "1"}).code == 3);
        CHECK(run({"analyze", "--model", "nosuch", "--energy", "1"}).code == 3);
        CHECK(run({"resonances", "--model", "metric11", "--energy", "0.5", "--grid", "a=1:2:0.5", "--mmax", "21"}).code == 3);
        CHECK(run({"analyze", "--model", "metric11", "--a", "1", "--energy", "0.5", "--jobs", "0"}).code == 3);
    }
    SUBCASE("solver errors") {
        // the free particle has a non-hyperbolic channel
        const Run r = run({"analyze", "--model", "morse", "--V", "0", "--energy", "1", "--error-json"});
        CHECK(r.code == 2);
        const json j = json::parse(r.out);
        CHECK(j["error"] == "HyperbolicityViolated");
        CHECK(j["exit_code"] == 2);
        CHECK(j["spec_version"] == 1);
    }
    SUBCASE("error report is written to the output directory") {
        const fs::path d = scratch("error");
        const Run r = run({"analyze", "--model", "morse", "--V", "0", "--energy", "1", "--out", d.string()});
        CHECK(r.code == 2);
        const json j = json::parse(slurp(d / "error.json"));
        CHECK(j["error"] == "HyperbolicityViolated");
        fs::remove_all(d);
    }
    SUBCASE("configuration errors as JSON") {
        const Run r = run({"analyze", "--model", "metric11", "--energy", "1", "--error-json"});
        CHECK(r.code == 3);
        const json j = json::parse(r.out);
        CHECK(j["exit_code"] == 3);
    }
}

TEST_CASE("CSV headers") {
    const fs::path d = scratch("csv");
    REQUIRE(run({"resonances", "--model", "metric11", "--energy", "0.5", "--grid", "a=0.75,2", "--mmax", "6", "--out",
                 (d / "res").string()})
                .code == 0);
    CHECK(first_line(d / "res" / "resonances.csv") == "grid_value,min_order,alpha,target,residual");
    REQUIRE(run({"geometry", "--spiral", "--f", "2cos", "--c", "1", "--energy", "1", "--out", (d / "sp").string()}).code == 0);
    CHECK(first_line(d / "sp" / "spiral.csv") == "theta0,f0,f2,rho0,eig_re_1,eig_im_1,eig_re_2,eig_im_2,class");
    REQUIRE(run({"simulate", "--model", "metric11", "--a", "1", "--energy", "0.5", "--tmax", "50", "--samples", "40",
                 "--out", (d / "sim").string()})
                .code == 0);
    CHECK(first_line(d / "sim" / "observables.csv") == "t,tau,q_s,q_u,q_minus,q_plus,gamma_abs,Gamma_abs,clock");
    const json sim = json::parse(slurp(d / "sim" / "simulate.json"));
    CHECK(sim["energy"]["drift"].get<double>() <= sim["energy"]["budget"].get<double>());

    // resonance rows carry the reported orders
    const json res = json::parse(slurp(d / "res" / "resonances.json"));
    CHECK(res["points"][0]["min_order"] == 5);
    CHECK(res["points"][1]["min_order"] == 4);
    fs::remove_all(d);
}

TEST_CASE("reproducibility") {
    const fs::path d = scratch("repro");
    const std::vector<std::string> base{"resonances", "--model", "metric11", "--energy", "0.5", "--grid", "a=0.5:3:0.125",
                                        "--mmax", "8"};
    auto with = [&](std::vector<std::string> extra) {
        auto v = base;
        v.insert(v.end(), extra.begin(), extra.end());
        return v;
    };
    REQUIRE(run(with({"--jobs", "1", "--out", (d / "j1").string()})).code == 0);
    REQUIRE(run(with({"--jobs", "4", "--out", (d / "j4").string()})).code == 0);
    CHECK(slurp(d / "j1" / "resonances.csv") == slurp(d / "j4" / "resonances.csv"));
    CHECK(slurp(d / "j1" / "resonances.json") == slurp(d / "j4" / "resonances.json"));

    const std::vector<std::string> geo{"geometry", "--model", "riema3", "--b", "2", "--kappa", "-1", "--seed", "99"};
    auto g1 = geo, g2 = geo;
    g1.insert(g1.end(), {"--out", (d / "g1").string()});
    g2.insert(g2.end(), {"--out", (d / "g2").string()});
    REQUIRE(run(g1).code == 0);
    REQUIRE(run(g2).code == 0);
    CHECK(slurp(d / "g1" / "geometry.json") == slurp(d / "g2" / "geometry.json"));
    fs::remove_all(d);
}

TEST_CASE("config file with flag overrides") {
    const fs::path d = scratch("config");
    fs::create_directories(d);
    {
        std::ofstream os(d / "run.toml");
        os << "spec_version = 1\n[model]\nfamily = \"morse\"\n[model.params]\nV = \"cos\"\n[channel]\nenergy = 2.0\ntheta0 = 0.0\n";
    }
    const Run a = run({"analyze", "--config", (d / "run.toml").string()});
    REQUIRE(a.code == 0);
    CHECK(json::parse(a.out)["channel"]["energy"] == 2.0);
    const Run b = run({"analyze", "--config", (d / "run.toml").string(), "--energy", "3"});
    REQUIRE(b.code == 0);
    CHECK(json::parse(b.out)["channel"]["energy"] == 3.0);
    {
        std::ofstream os(d / "bad.toml");
        os << "[model]\nfamily = \"morse\"\ncolour = 3\n";
    }
    CHECK(run({"analyze", "--config", (d / "bad.toml").string(), "--energy", "2"}).code == 3);
    CHECK(run({"analyze", "--config", (d / "missing.toml").string()}).code == 3);
    fs::remove_all(d);
}
