#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using namespace gpem;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "gpem");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("gpem_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("solve emits the soft-edge closed form") {
    const Run r = run({"solve", "--beta", "-4", "--gamma", "3", "--t", "2.5"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["scenario"] == "one-cut-soft");
    CHECK(j["a2"].get<double>() == doctest::Approx(3 - std::sqrt(7.0)).epsilon(1e-10));
    CHECK(j["residual_norm"].get<double>() < 1e-10);
    CHECK(j["mass_check"].get<double>() < 1e-8);
    CHECK(j["w_constancy"].get<double>() < 1e-6);
}

TEST_CASE("solve in region A gives a conjugate pair") {
    const Run r = run({"solve", "--beta", "0", "--gamma", "1", "--t", "1"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["scenario"] == "one-cut-hard");
    CHECK(j["b1"]["im"].get<double>() > 0);
    CHECK(j["b2"]["im"].get<double>() == -j["b1"]["im"].get<double>());
}

TEST_CASE("real-line flags rescale") {
    const Run r = run({"solve", "--b", "-1", "--c", "0.5", "--v", "0.5", "--t-real", "1"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["params"]["beta"].get<double>() == -4.0);
    CHECK(j["params"]["gamma"].get<double>() == 4.0);
    CHECK(j["params"]["t"].get<double>() == 4.0);
    CHECK(run({"solve", "--b", "-1", "--t-real", "1"}).code == 1);
}

TEST_CASE("exit codes") {
    const Run z = run({"solve", "--beta", "0", "--gamma", "0", "--t", "1"});
    CHECK(z.code == 1);
    CHECK(z.err.find("gamma must be nonzero") != std::string::npos);
    CHECK(run({"solve", "--beta", "x"}).code == 1);
    CHECK(run({}).code == 1);
    CHECK(run({"phasemap", "--beta", "1:2"}).code == 1);
    CHECK(run({"solve", "--beta", "0", "--gamma", "1", "--out", "/nonexistent/dir/x.json"}).code == 3);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("flow files, events and byte-identical reruns") {
    const fs::path d = scratch("flow");
    auto go = [&](const std::string& tag) {
        return run({"flow", "--beta", "-4", "--gamma", "3", "--t-max", "50", "--samples", "60",
                    "--out", (d / (tag + ".csv")).string(), "--events", (d / (tag + ".json")).string(),
                    "--manifest", (d / (tag + "_manifest.json")).string()});
    };
    REQUIRE(go("a").code == 0);
    REQUIRE(go("b").code == 0);
    CHECK(slurp(d / "a.csv") == slurp(d / "b.csv"));
    CHECK(slurp(d / "a.json") == slurp(d / "b.json"));

    std::istringstream csv(slurp(d / "a.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "param,scenario,a1,b1_re,b1_im,b2_re,b2_im,a2,a3,mass_check");
    int rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
        const double mc = std::stod(line.substr(line.rfind(',') + 1));
        CHECK(mc < 1e-8);
    }
    CHECK(rows >= 60);

    const auto ev = nlohmann::json::parse(slurp(d / "a.json"))["events"];
    REQUIRE(ev.size() >= 3);
    std::vector<std::string> kinds;
    for (const auto& e : ev) kinds.push_back(e["kind"]);
    CHECK(kinds.front() == "TypeI_birth");
    CHECK(kinds[1] == "TypeII_merge");
    CHECK(kinds.back() == "ComplexPairCollision");
    CHECK(ev.back()["t"].get<double>() == doctest::Approx(43.94).epsilon(1e-3));

    const auto m = nlohmann::json::parse(slurp(d / "a_manifest.json"));
    CHECK(m["subcommand"] == "flow");
    REQUIRE(m["outputs"].size() == 2);
    CHECK(m["outputs"][0] == (d / "a.csv").string());
    CHECK_FALSE(m.contains("wall_time_s"));
}

TEST_CASE("phasemap grid cardinality") {
    const fs::path d = scratch("pm");
    const Run r = run({"phasemap", "--beta", "-6:2:9", "--gamma", "-6:8:8", "--jobs", "2",
                       "--out", (d / "cells.csv").string(), "--boundaries", (d / "curves.csv").string()});
    REQUIRE(r.code == 0);
    std::istringstream csv(slurp(d / "cells.csv"));
    std::string line;
    std::getline(csv, line);
    int rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
        const auto c1 = line.find(','), c2 = line.find(',', c1 + 1), c3 = line.find(',', c2 + 1);
        CHECK(c3 > c2 + 1);  // region column nonempty
    }
    CHECK(rows == 72);
    CHECK(slurp(d / "curves.csv").rfind("curve,beta,gamma\n", 0) == 0);
}

TEST_CASE("density and real-line density") {
    const Run r = run({"density", "--beta", "0", "--gamma", "1", "--t", "1", "--points", "11", "--realline"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("y,density\n", 0) == 0);
    CHECK(r.out.find("nan") == std::string::npos);
    const Run h = run({"density", "--beta", "-4", "--gamma", "3", "--t", "2.59", "--points", "5"});
    REQUIRE(h.code == 0);
    CHECK(h.out.rfind("x,density\n", 0) == 0);
}

TEST_CASE("fekete and vc") {
    const fs::path d = scratch("fk");
    const Run r = run({"fekete", "--beta", "0", "--gamma", "1", "--t", "1", "--n", "30", "--out", (d / "p.csv").string()});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["ks_distance"].get<double>() < 3 / std::sqrt(30.0));
    const Run v = run({"vc"});
    REQUIRE(v.code == 0);
    CHECK(std::stod(v.out) == doctest::Approx(0.269593).epsilon(4e-5));
}

}
