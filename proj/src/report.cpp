#include "gsc/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gsc {

namespace {

using nlohmann::json;

double require_positive(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    const double v = j.at(key).get<double>();
    if (!(v > 0.0)) throw ConfigError(key + " must be positive");
    return v;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

ScenarioConfig parse_scenario_json(const json& j) {
    ScenarioConfig cfg;
    cfg.echo = j;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.value("schema", 0) != 1) throw ConfigError("config schema must be 1");

    if (j.contains("model")) {
        const json& m = j.at("model");
        cfg.kind = model_kind_from_string(m.value("kind", std::string("dirichlet-heat")));
        if (cfg.kind == ModelKind::Custom) {
            if (!m.contains("path")) throw ConfigError("custom model requires model.path");
            cfg.custom_path = m.at("path").get<std::string>();
            if (!std::filesystem::exists(cfg.custom_path))
                throw ConfigError("custom spectral file does not exist: " + cfg.custom_path);
        }
        cfg.n_modes = m.value("n_modes", 8);
        if (cfg.n_modes < 2) throw ConfigError("model.n_modes must be at least 2");
        if (m.contains("mu")) {
            const std::string mu = m.at("mu").get<std::string>();
            if (mu == "x^2") cfg.mu = MuKind::XSquared;
            else if (mu == "x") cfg.mu = MuKind::X;
            else throw ConfigError("model.mu must be 'x^2' or 'x'");
            cfg.mu_given = true;
        }
    }

    if (j.contains("control")) {
        const json& c = j.at("control");
        cfg.T = require_positive(c, "T", cfg.T);
        if (c.contains("mode"))
            cfg.mode = run_mode_from_string(c.at("mode").get<std::string>());
        cfg.target = require_positive(c, "target", cfg.target);
        cfg.j_max = c.value("j_max", cfg.j_max);
        if (cfg.j_max < 1) throw ConfigError("control.j_max must be at least 1");
        cfg.c_bar = require_positive(c, "c_bar", cfg.c_bar);
        if (c.contains("c_k")) cfg.c_k = require_positive(c, "c_k", 1.0);
        if (c.contains("c_m")) cfg.c_m = require_positive(c, "c_m", 1.0);
        if (c.contains("r1")) cfg.r1 = require_positive(c, "r1", 0.0);
        if (c.contains("R")) cfg.R = require_positive(c, "R", 0.0);
        if (c.contains("seed")) cfg.seed = c.at("seed").get<std::uint64_t>();
    }

    if (j.contains("simulator")) {
        const json& s = j.at("simulator");
        cfg.tol = require_positive(s, "tol", cfg.tol);
        cfg.samples_per_stage = s.value("samples_per_stage", cfg.samples_per_stage);
        if (cfg.samples_per_stage < 1)
            throw ConfigError("simulator.samples_per_stage must be at least 1");
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        cfg.out_dir = o.value("dir", cfg.out_dir);
        if (o.contains("formats")) {
            cfg.write_csv = false;
            cfg.write_json = false;
            for (const auto& f : o.at("formats")) {
                const std::string s = f.get<std::string>();
                if (s == "csv") cfg.write_csv = true;
                else if (s == "json") cfg.write_json = true;
                else throw ConfigError("unknown output format: " + s);
            }
        }
    }

    if (j.contains("u0")) {
        const json& u = j.at("u0");
        if (u.is_array()) {
            cfg.u0_modal = u.get<std::vector<double>>();
            cfg.u0_explicit = true;
        } else if (u.is_object() && u.contains("modal")) {
            cfg.u0_modal = u.at("modal").get<std::vector<double>>();
            cfg.u0_explicit = true;
        } else if (u.is_object() && u.contains("ground_plus")) {
            for (const auto& [key, val] : u.at("ground_plus").items()) {
                const int k = std::stoi(key);
                if (k < 1) throw ConfigError("u0.ground_plus mode indices are 1-based");
                cfg.u0_ground_plus[k] = val.get<double>();
            }
        } else {
            throw ConfigError("u0 must be an array, {modal: []}, or {ground_plus: {}}");
        }
    }

    if (j.contains("identities"))
        cfg.identities_n_max = j.at("identities").value("n_max", 30);
    return cfg;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_scenario_json(j);
}

SpectralModel model_from_config(const ScenarioConfig& cfg) {
    if (cfg.kind == ModelKind::Custom) return load_custom_spectral(cfg.custom_path);
    const MuKind mu = cfg.mu_given ? cfg.mu : default_mu(cfg.kind);
    return build_model(cfg.kind, cfg.n_modes, QuadratureConfig{}, mu);
}

std::vector<double> initial_state_from_config(const ScenarioConfig& cfg, int n_modes) {
    if (cfg.u0_explicit) {
        if (cfg.u0_modal.size() != static_cast<size_t>(n_modes))
            throw ConfigError("u0 length does not match the model's n_modes");
        return cfg.u0_modal;
    }
    std::vector<double> u0(n_modes, 0.0);
    u0[0] = 1.0;
    for (const auto& [k, amp] : cfg.u0_ground_plus) {
        if (k > n_modes) throw ConfigError("u0.ground_plus index exceeds n_modes");
        u0[k - 1] += amp;
    }
    return u0;
}

RunConfig run_config_from_scenario(const ScenarioConfig& cfg) {
    RunConfig rc;
    rc.mode = cfg.mode;
    rc.target = cfg.target;
    rc.j_max = cfg.j_max;
    rc.constants.c_bar = cfg.c_bar;
    rc.constants.c_k = cfg.c_k;
    rc.constants.c_m = cfg.c_m;
    rc.sim.tol = cfg.tol;
    rc.sim.samples = cfg.samples_per_stage;
    rc.r1 = cfg.r1;
    rc.seed = cfg.seed;
    return rc;
}

json constants_to_json(const ConstantsReport& c) {
    return json{{"T", c.T},
                {"c_bar", c.c_bar},
                {"c_k", c.c_k},
                {"c_k_calibrated", c.c_k_calibrated},
                {"c_m", c.c_m},
                {"c_m_calibrated", c.c_m_calibrated},
                {"c_b", c.c_b},
                {"m", c.m},
                {"lambda_T", c.lambda_T},
                {"lambda_tail_sq", c.lambda_tail_sq},
                {"c_alpha", c.c_alpha},
                {"c3", c.c3},
                {"c4", c.c4},
                {"k_T", c.k_T},
                {"log_k_T", c.log_k_T},
                {"g_m", c.g_m},
                {"log_g_m", c.log_g_m},
                {"g_m_tail_sum", c.g_m_tail_sum},
                {"gate_coefficient", c.gate_coefficient},
                {"t_f", c.t_f},
                {"t_tilde", c.t_tilde},
                {"r_T", c.r_T},
                {"control_bound_sq", c.control_bound_sq},
                {"log_control_bound_sq", c.log_control_bound_sq}};
}

json stage_to_json(const StageRecord& s) {
    json j{{"stage", s.stage},
           {"length", s.length},
           {"t_begin", s.t_begin},
           {"t_end", s.t_end},
           {"norm_in", s.norm_in},
           {"norm_out", s.norm_out},
           {"sup_norm", s.sup_norm},
           {"control_norm", s.control_norm},
           {"gate_value", s.gate_value},
           {"theory_bound", s.theory_bound},
           {"moment_residual", s.moment_residual},
           {"precision_bits", s.precision_bits}};
    j["contraction_exponent"] =
        std::isfinite(s.contraction_exponent) ? json(s.contraction_exponent) : json();
    return j;
}

json checks_to_json(const EstimateChecks& checks) {
    json arr = json::array();
    for (const CheckResult& c : checks.checks)
        arr.push_back(json{{"name", c.name},
                           {"stage", c.stage},
                           {"passed", c.passed},
                           {"asserted", c.asserted},
                           {"lhs", c.lhs},
                           {"rhs", c.rhs},
                           {"slack", c.slack}});
    return arr;
}

json hypothesis_to_json(const HypothesisReport& h) {
    return json{{"declared_alpha", h.declared_alpha},
                {"declared_q", h.declared_q},
                {"declared_b", h.declared_b},
                {"min_gap", h.min_gap},
                {"min_dispersion", h.min_dispersion},
                {"coupling_11", h.coupling_11},
                {"max_asymmetry", h.max_asymmetry},
                {"eigenvalues_ascending", h.eigenvalues_ascending},
                {"gap_ok", h.gap_ok},
                {"dispersion_ok", h.dispersion_ok},
                {"coupling_nonzero_ok", h.coupling_nonzero_ok},
                {"all_ok", h.all_ok()}};
}

json report_to_json(const RunReport& report, const EstimateChecks* checks,
                    const json& config_echo) {
    json stages = json::array();
    for (const StageRecord& s : report.stages) stages.push_back(stage_to_json(s));

    json final_obj{{"converged", report.converged},
                   {"stages_executed", report.stages_executed},
                   {"initial_deviation", report.initial_deviation},
                   {"final_deviation_rel", report.final_deviation_rel},
                   {"final_deviation_abs", report.final_deviation_abs},
                   {"total_control_norm", report.total_control_norm},
                   {"total_time", report.total_time},
                   {"lambda1", report.lambda1},
                   {"mode", to_string(report.mode)},
                   {"mild_bound_c", report.mild_bound_c},
                   {"gamma", report.gamma}};
    if (report.t_r > 0.0 || report.post_phase_norm_sq >= 0.0) {
        final_obj["t_r"] = report.t_r;
        final_obj["post_phase_norm_sq"] = report.post_phase_norm_sq;
        final_obj["r1"] = report.r1;
        final_obj["R"] = report.big_r;
    }

    return json{{"config_echo", config_echo},
                {"constants", constants_to_json(report.constants)},
                {"stages", stages},
                {"checks", checks ? checks_to_json(*checks) : json::array()},
                {"final", final_obj},
                {"status", report.status}};
}

std::string trajectory_csv(const Trajectory& trajectory, int n_modes) {
    std::ostringstream os;
    os << "t,p,norm_dev";
    for (int k = 1; k <= n_modes; ++k) os << ",x_" << k;
    os << "\n";
    for (size_t i = 0; i < trajectory.times.size(); ++i) {
        os << fmt17(trajectory.times[i]) << ',' << fmt17(trajectory.control_values[i])
           << ',' << fmt17(trajectory.norms[i]);
        for (double x : trajectory.states[i]) os << ',' << fmt17(x);
        os << "\n";
    }
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

namespace {

int classify_failure(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const ControlFailureError*>(&e)) return 3;
    if (dynamic_cast<const StripViolated*>(&e)) return 3;
    if (dynamic_cast<const ConeViolated*>(&e)) return 3;
    return 4;
}

std::string failure_status(const std::exception& e) {
    if (dynamic_cast<const AdmissibilityViolated*>(&e)) return "admissibility_violated";
    if (dynamic_cast<const ContractionFailure*>(&e)) return "contraction_failure";
    if (dynamic_cast<const StripViolated*>(&e)) return "strip_violated";
    if (dynamic_cast<const ConeViolated*>(&e)) return "cone_violated";
    if (dynamic_cast<const ResidualTooLarge*>(&e)) return "residual_too_large";
    if (dynamic_cast<const NotPositiveDefinite*>(&e)) return "not_positive_definite";
    if (dynamic_cast<const ToleranceUnreachable*>(&e)) return "tolerance_unreachable";
    return "error";
}

}  // namespace

int run_scenario(const std::string& command, const std::string& config_path,
                 const std::string& out_dir_override,
                 std::optional<std::uint64_t> seed_override) {
    ScenarioConfig cfg;
    try {
        cfg = parse_scenario_file(config_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
    if (seed_override) cfg.seed = *seed_override;

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    const std::string report_path = cfg.out_dir + "/report.json";
    const std::string csv_path = cfg.out_dir + "/trajectory.csv";

    json out{{"config_echo", cfg.echo},
             {"constants", json::object()},
             {"stages", json::array()},
             {"checks", json::array()},
             {"final", json::object()},
             {"status", "error"}};
    int code = 0;

    try {
        if (command == "verify-identities") {
            const SeriesIdentityReport rep = verify_series_identities(cfg.identities_n_max);
            out["checks"] = json::array(
                {json{{"name", "series_identity_exact"}, {"passed", rep.exact_ok}},
                 json{{"name", "series_monotone"}, {"passed", rep.monotone_ok}},
                 json{{"name", "series_remainder"}, {"passed", rep.remainder_ok}}});
            out["final"] = json{{"n_max", rep.n_max},
                                {"partial_sum", rep.partial_sum},
                                {"remainder", rep.remainder}};
            const bool ok = rep.exact_ok && rep.monotone_ok && rep.remainder_ok;
            out["status"] = ok ? "ok" : "identity_failed";
            code = ok ? 0 : 4;
        } else if (command == "hypotheses") {
            const SpectralModel model = model_from_config(cfg);
            const HypothesisReport rep = verify_spectral_hypotheses(model);
            out["constants"] = hypothesis_to_json(rep);
            out["final"] = json{{"label", model.label}, {"n_modes", model.n_modes}};
            out["status"] = rep.all_ok() ? "ok" : "hypothesis_failed";
            code = rep.all_ok() ? 0 : 4;
        } else if (command == "constants") {
            const SpectralModel model = model_from_config(cfg);
            ConstantsConfig cc;
            cc.c_bar = cfg.c_bar;
            cc.c_k = cfg.c_k;
            cc.c_m = cfg.c_m;
            const ConstantsReport rep = theoretical_constants(model, cfg.T, cc);
            const GmBoundReport gm = verify_gm_bound(model, cfg.c_bar);
            out["constants"] = constants_to_json(rep);
            out["checks"] = json::array(
                {json{{"name", "gm_bound"}, {"passed", gm.bound_ok},
                      {"lhs", gm.max_excess}, {"rhs", 0.0}},
                 json{{"name", "gm_envelope"}, {"passed", gm.envelope_ok}}});
            out["final"] = json{{"c_m_grid", gm.c_m},
                                {"envelope_c_q", gm.envelope_c_q},
                                {"envelope_c_alpha_q", gm.envelope_c_alpha_q},
                                {"envelope_c_fit", gm.envelope_c_fit}};
            out["status"] = "ok";
            code = 0;
        } else if (command == "local" || command == "strip" || command == "cone") {
            const SpectralModel model = model_from_config(cfg);
            const std::vector<double> u0 = initial_state_from_config(cfg, model.n_modes);
            const RunConfig rc = run_config_from_scenario(cfg);
            RunReport rep;
            if (command == "local") {
                rep = run_local_control(model, u0, cfg.T, rc);
            } else {
                if (!(cfg.R > 0.0))
                    throw ConfigError(command + " runs require control.R > 0");
                rep = command == "strip" ? run_strip_control(model, u0, cfg.R, rc)
                                         : run_cone_control(model, u0, cfg.R, rc);
            }
            ConstantsConfig cc = rc.constants;
            const EstimateChecks checks = verify_run(rep, model, cc);
            out = report_to_json(rep, &checks, cfg.echo);
            if (cfg.write_csv)
                write_text_file(csv_path, trajectory_csv(rep.trajectory, model.n_modes));
            code = rep.converged ? 0 : 3;
            if (!rep.converged) out["status"] = "not_converged";
        } else {
            std::fprintf(stderr, "unknown command: %s\n", command.c_str());
            return 2;
        }
    } catch (const ControlFailureError& e) {
        out = report_to_json(e.report, nullptr, cfg.echo);
        out["status"] = failure_status(e);
        out["final"]["message"] = e.what();
        code = classify_failure(e);
        std::fprintf(stderr, "%s\n", e.what());
    } catch (const Error& e) {
        out["status"] = failure_status(e);
        out["final"] = json{{"message", e.what()}};
        code = classify_failure(e);
        std::fprintf(stderr, "%s\n", e.what());
    }

    if (cfg.write_json) write_text_file(report_path, out.dump(2) + "\n");
    return code;
}

}  // namespace gsc
