#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gsc/report.hpp"

using namespace gsc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               fs::path("gsc_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int counter() {
        static int c = 0;
        return c++;
    }
};

std::string write_config(const fs::path& dir, const json& j) {
    const std::string p = (dir / "config.json").string();
    std::ofstream out(p);
    out << j.dump(2);
    return p;
}

json base_config() {
    return json{
        {"schema", 1},
        {"model", {{"kind", "dirichlet-heat"}, {"n_modes", 4}}},
        {"control", {{"T", 1.0}, {"mode", "empirical"}, {"j_max", 8}}},
        {"simulator", {{"tol", 1e-10}, {"samples_per_stage", 8}}},
        {"u0", {{"ground_plus", {{"2", 1e-3}}}}},
    };
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("scenario config parsing and validation") {
    CHECK_THROWS_AS(parse_scenario_json(json{{"schema", 2}}), ConfigError);
    CHECK_THROWS_AS(
        parse_scenario_json(json{{"schema", 1}, {"model", {{"kind", "nope"}}}}),
        ConfigError);
    CHECK_THROWS_AS(parse_scenario_json(json{
                        {"schema", 1}, {"control", {{"T", -1.0}}}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_scenario_json(json{
                        {"schema", 1},
                        {"control", {{"mode", "mystical"}}}}),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_scenario_json(json{{"schema", 1},
                                 {"model", {{"kind", "custom"}, {"path", "/no/file"}}}}),
        ConfigError);

    const ScenarioConfig cfg = parse_scenario_json(base_config());
    CHECK(cfg.kind == ModelKind::DirichletHeat);
    CHECK(cfg.n_modes == 4);
    CHECK(cfg.mode == RunMode::Empirical);
    const std::vector<double> u0 = initial_state_from_config(cfg, 4);
    CHECK(u0[0] == 1.0);
    CHECK(u0[1] == 1e-3);
}

TEST_CASE("trajectory csv shape") {
    Trajectory t;
    CHECK(trajectory_csv(t, 3) == "t,p,norm_dev,x_1,x_2,x_3\n");
    t.times = {0.0, 0.5};
    t.states = {{1.0, 0.0, 0.0}, {0.5, 0.25, 0.125}};
    t.norms = {1.0, 0.57282196186948};
    t.control_values = {0.0, -1.0 / 3.0};
    t.step_errors = {0.0, 0.0};
    const std::string csv = trajectory_csv(t, 3);
    CHECK(csv.find("0.5,-0.33333333333333331,0.57282196186947998") != std::string::npos);
    // every row has 6 columns
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line))
        CHECK(std::count(line.begin(), line.end(), ',') == 5);
}

TEST_CASE("run_scenario local: artifacts, determinism, round trip") {
    TempDir dir;
    const std::string cfg_path = write_config(dir.path, base_config());
    const std::string out1 = (dir.path / "out1").string();
    const std::string out2 = (dir.path / "out2").string();

    CHECK(run_scenario("local", cfg_path, out1, std::nullopt) == 0);
    CHECK(run_scenario("local", cfg_path, out2, std::nullopt) == 0);

    const std::string r1 = slurp(fs::path(out1) / "report.json");
    const std::string c1 = slurp(fs::path(out1) / "trajectory.csv");
    CHECK(r1 == slurp(fs::path(out2) / "report.json"));
    CHECK(c1 == slurp(fs::path(out2) / "trajectory.csv"));
    CHECK(c1.substr(0, 13) == "t,p,norm_dev,");

    const json rep = json::parse(r1);
    CHECK(rep.at("status") == "converged");
    CHECK(rep.contains("config_echo"));
    CHECK(rep.contains("constants"));
    CHECK(rep.at("stages").is_array());
    CHECK(!rep.at("stages").empty());
    CHECK(rep.at("checks").is_array());
    CHECK(rep.at("final").at("converged").get<bool>());
    // full-precision round trip of a norm value
    const double dev = rep.at("final").at("final_deviation_rel").get<double>();
    CHECK(json::parse(rep.dump()).at("final").at("final_deviation_rel").get<double>() ==
          dev);
    // stage rows match the number of executed stages
    CHECK(rep.at("stages").size() ==
          static_cast<size_t>(rep.at("final").at("stages_executed").get<int>()));
}

TEST_CASE("run_scenario exit codes") {
    TempDir dir;
    SUBCASE("unknown model kind: exit 2, no artifacts") {
        json bad = base_config();
        bad["model"]["kind"] = "unknown-kind";
        const std::string cfg_path = write_config(dir.path, bad);
        const std::string out = (dir.path / "out").string();
        CHECK(run_scenario("local", cfg_path, out, std::nullopt) == 2);
        CHECK_FALSE(fs::exists(fs::path(out) / "report.json"));
    }
    SUBCASE("missing config file: exit 2") {
        CHECK(run_scenario("local", (dir.path / "nope.json").string(),
                           (dir.path / "o").string(), std::nullopt) == 2);
    }
    SUBCASE("unknown command: exit 2") {
        const std::string cfg_path = write_config(dir.path, base_config());
        CHECK(run_scenario("simulate-everything", cfg_path, (dir.path / "o").string(),
                           std::nullopt) == 2);
    }
    SUBCASE("theory mode with u0 outside R_T: exit 3, diagnostic report written") {
        json cfg = base_config();
        cfg["control"]["mode"] = "theory";
        cfg["control"]["c_k"] = 1.0;
        cfg["control"]["c_m"] = 0.9;
        const std::string cfg_path = write_config(dir.path, cfg);
        const std::string out = (dir.path / "theory").string();
        CHECK(run_scenario("local", cfg_path, out, std::nullopt) == 3);
        const json rep = json::parse(slurp(fs::path(out) / "report.json"));
        CHECK(rep.at("status") == "admissibility_violated");
        CHECK(rep.at("constants").at("r_T").get<double>() ==
              doctest::Approx(1.9147e-26).epsilon(1e-3));
    }
}

TEST_CASE("run_scenario auxiliary commands") {
    TempDir dir;
    SUBCASE("hypotheses") {
        const std::string cfg_path = write_config(dir.path, base_config());
        const std::string out = (dir.path / "hyp").string();
        CHECK(run_scenario("hypotheses", cfg_path, out, std::nullopt) == 0);
        const json rep = json::parse(slurp(fs::path(out) / "report.json"));
        CHECK(rep.at("status") == "ok");
        CHECK(rep.at("constants").at("min_gap").get<double>() ==
              doctest::Approx(M_PI).epsilon(1e-12));
    }
    SUBCASE("verify-identities") {
        const std::string cfg_path = write_config(dir.path, base_config());
        const std::string out = (dir.path / "ids").string();
        CHECK(run_scenario("verify-identities", cfg_path, out, std::nullopt) == 0);
        const json rep = json::parse(slurp(fs::path(out) / "report.json"));
        CHECK(rep.at("status") == "ok");
        CHECK(rep.at("final").at("n_max") == 30);
    }
    SUBCASE("constants") {
        json cfg = base_config();
        cfg["control"]["T"] = 0.5;
        const std::string cfg_path = write_config(dir.path, cfg);
        const std::string out = (dir.path / "con").string();
        CHECK(run_scenario("constants", cfg_path, out, std::nullopt) == 0);
        const json rep = json::parse(slurp(fs::path(out) / "report.json"));
        CHECK(rep.at("constants").at("c_alpha").get<double>() ==
              doctest::Approx(M_PI).epsilon(1e-12));
    }
}

TEST_CASE("cli binary dispatch") {
    const char* bin = std::getenv("GSCTL_BIN");
    if (!bin) return;  // only wired through ctest
    TempDir dir;
    const std::string cfg_path = write_config(dir.path, base_config());
    const std::string out = (dir.path / "cli").string();

    std::string cmd = std::string(bin) + " local --config " + cfg_path + " --out " +
                      out + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(fs::exists(fs::path(out) / "report.json"));
    CHECK(fs::exists(fs::path(out) / "trajectory.csv"));

    std::string bad = std::string(bin) + " frobnicate --config " + cfg_path +
                      " > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(bad.c_str())) != 0);
}
