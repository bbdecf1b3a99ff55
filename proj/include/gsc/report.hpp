#ifndef GSC_REPORT_HPP
#define GSC_REPORT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "gsc/control.hpp"
#include "gsc/verify.hpp"

namespace gsc {

/// Parsed and validated scenario file (JSON, schema 1).
struct ScenarioConfig {
    nlohmann::json echo;

    ModelKind kind = ModelKind::DirichletHeat;
    std::string custom_path;
    int n_modes = 8;
    MuKind mu = MuKind::XSquared;
    bool mu_given = false;

    double T = 1.0;
    RunMode mode = RunMode::Empirical;
    double target = 1e-12;
    int j_max = 12;
    double c_bar = 1.0;
    std::optional<double> c_k, c_m;
    double r1 = 0.0;  // 0 requests calibration
    double R = 0.0;
    std::uint64_t seed = 1;

    double tol = 1e-10;
    int samples_per_stage = 32;

    std::string out_dir = ".";
    bool write_csv = true;
    bool write_json = true;

    std::vector<double> u0_modal;          // explicit coefficients, or
    std::map<int, double> u0_ground_plus;  // phi_1 + sum amp e_k
    bool u0_explicit = false;

    int identities_n_max = 30;
};

ScenarioConfig parse_scenario_file(const std::string& path);
ScenarioConfig parse_scenario_json(const nlohmann::json& j);

SpectralModel model_from_config(const ScenarioConfig& cfg);
std::vector<double> initial_state_from_config(const ScenarioConfig& cfg, int n_modes);
RunConfig run_config_from_scenario(const ScenarioConfig& cfg);

nlohmann::json constants_to_json(const ConstantsReport& c);
nlohmann::json stage_to_json(const StageRecord& s);
nlohmann::json checks_to_json(const EstimateChecks& checks);
nlohmann::json hypothesis_to_json(const HypothesisReport& h);

/// Top-level report object: config_echo, constants, stages[], checks[],
/// final, status.
nlohmann::json report_to_json(const RunReport& report, const EstimateChecks* checks,
                              const nlohmann::json& config_echo);

/// CSV columns: t, p, norm_dev, x_1..x_N; floats at 17 significant digits so
/// identical runs produce identical bytes.
std::string trajectory_csv(const Trajectory& trajectory, int n_modes);

void write_text_file(const std::string& path, const std::string& content);

/// Executes one subcommand (local | strip | cone | constants | hypotheses |
/// verify-identities). Returns the process exit code: 0 success, 2 config
/// error, 3 control failure, 4 numerical failure. The report JSON is written
/// whenever the config parsed.
int run_scenario(const std::string& command, const std::string& config_path,
                 const std::string& out_dir_override,
                 std::optional<std::uint64_t> seed_override);

}  // namespace gsc

#endif
