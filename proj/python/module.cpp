#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "gsc/control.hpp"
#include "gsc/report.hpp"
#include "gsc/simulate.hpp"
#include "gsc/verify.hpp"

namespace py = pybind11;
using namespace gsc;

namespace {

RunConfig make_run_config(const std::string& mode, double target, int j_max, double c_bar,
                          std::optional<double> c_k, std::optional<double> c_m,
                          double tol, int samples, double r1, std::uint64_t seed) {
    RunConfig cfg;
    cfg.mode = run_mode_from_string(mode);
    cfg.target = target;
    cfg.j_max = j_max;
    cfg.constants.c_bar = c_bar;
    cfg.constants.c_k = c_k;
    cfg.constants.c_m = c_m;
    cfg.sim.tol = tol;
    cfg.sim.samples = samples;
    cfg.r1 = r1;
    cfg.seed = seed;
    return cfg;
}

constexpr char kRunKwDoc[] =
    "mode='empirical'|'theory', target, j_max, c_bar, c_k, c_m, tol, samples, r1, seed";

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Staged bilinear control synthesis for parabolic modal systems";

    py::register_exception<QuadratureFailure>(m, "QuadratureFailure");
    py::register_exception<HypothesisViolation>(m, "HypothesisViolation");
    py::register_exception<ParseError>(m, "SpectralParseError");
    py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite");
    py::register_exception<ResidualTooLarge>(m, "ResidualTooLarge");
    py::register_exception<ToleranceUnreachable>(m, "ToleranceUnreachable");
    py::register_exception<StripViolated>(m, "StripViolated");
    py::register_exception<ConeViolated>(m, "ConeViolated");
    py::register_exception<DegenerateSequence>(m, "DegenerateSequence");
    py::register_exception<ConfigError>(m, "ScenarioConfigError");
    static py::exception<ControlFailureError> control_failure(m, "ControlFailure");
    py::register_exception<AdmissibilityViolated>(m, "AdmissibilityError",
                                                  control_failure.ptr());
    py::register_exception<ContractionFailure>(m, "ContractionError",
                                               control_failure.ptr());

    py::class_<SpectralModel>(m, "SpectralModel")
        .def_readonly("n_modes", &SpectralModel::n_modes)
        .def_readonly("eigenvalues", &SpectralModel::eigenvalues)
        .def_readonly("gap_alpha", &SpectralModel::gap_alpha)
        .def_readonly("dispersion_q", &SpectralModel::dispersion_q)
        .def_readonly("dispersion_b", &SpectralModel::dispersion_b)
        .def_readonly("label", &SpectralModel::label)
        .def_property_readonly("kind",
                               [](const SpectralModel& s) { return to_string(s.kind); })
        .def("coupling", &SpectralModel::coupling_at, py::arg("j"), py::arg("k"),
             "1-indexed entry <B phi_j, phi_k>")
        .def("ground_coupling", &SpectralModel::ground_coupling)
        .def("coupling_norm", &SpectralModel::coupling_spectral_norm)
        .def("__repr__", [](const SpectralModel& s) {
            return "<SpectralModel " + s.label + ", N=" + std::to_string(s.n_modes) + ">";
        });

    py::class_<HypothesisReport>(m, "HypothesisReport")
        .def_readonly("declared_alpha", &HypothesisReport::declared_alpha)
        .def_readonly("declared_q", &HypothesisReport::declared_q)
        .def_readonly("declared_b", &HypothesisReport::declared_b)
        .def_readonly("min_gap", &HypothesisReport::min_gap)
        .def_readonly("min_dispersion", &HypothesisReport::min_dispersion)
        .def_readonly("coupling_11", &HypothesisReport::coupling_11)
        .def_readonly("max_asymmetry", &HypothesisReport::max_asymmetry)
        .def_readonly("gap_ok", &HypothesisReport::gap_ok)
        .def_readonly("dispersion_ok", &HypothesisReport::dispersion_ok)
        .def_readonly("coupling_nonzero_ok", &HypothesisReport::coupling_nonzero_ok)
        .def("all_ok", &HypothesisReport::all_ok);

    m.def(
        "build_model",
        [](const std::string& kind, int n_modes, std::optional<std::string> mu) {
            const ModelKind k = model_kind_from_string(kind);
            MuKind mk = default_mu(k);
            if (mu) {
                if (*mu == "x^2") mk = MuKind::XSquared;
                else if (*mu == "x") mk = MuKind::X;
                else throw ConfigError("mu must be 'x^2' or 'x'");
            }
            return build_model(k, n_modes, QuadratureConfig{}, mk);
        },
        py::arg("kind"), py::arg("n_modes"), py::arg("mu") = std::nullopt);
    m.def("load_custom_spectral", &load_custom_spectral, py::arg("path"));
    m.def("verify_spectral_hypotheses", &verify_spectral_hypotheses, py::arg("model"));

    py::class_<GramMatrix>(m, "GramMatrix")
        .def_readonly("exponents", &GramMatrix::exponents)
        .def_readonly("horizon", &GramMatrix::horizon)
        .def_readonly("entries", &GramMatrix::entries)
        .def_readonly("condition_estimate", &GramMatrix::condition_estimate)
        .def("at", &GramMatrix::at, py::arg("i"), py::arg("j"), "1-indexed entry");

    m.def(
        "gram_matrix",
        [](const std::vector<double>& mu, double T) { return gram_matrix(mu, T); },
        py::arg("exponents"), py::arg("horizon"));

    py::class_<BiorthogonalBasis>(m, "BiorthogonalBasis")
        .def_readonly("exponents", &BiorthogonalBasis::exponents)
        .def_readonly("horizon", &BiorthogonalBasis::horizon)
        .def_readonly("max_residual", &BiorthogonalBasis::max_residual)
        .def_readonly("precision_bits", &BiorthogonalBasis::precision_bits)
        .def("coefficient", &BiorthogonalBasis::coefficient, py::arg("k"), py::arg("j"));

    m.def(
        "biorthogonal_family",
        [](const std::vector<double>& mu, double T, double residual_tol) {
            PrecisionConfig pc;
            pc.residual_tol = residual_tol;
            return biorthogonal_family(mu, T, pc);
        },
        py::arg("exponents"), py::arg("horizon"), py::arg("residual_tol") = 1e-8);
    m.def("moment_residual",
          [](const BiorthogonalBasis& b) {
              const MomentResidual r = moment_residual(b);
              return py::make_tuple(r.entries, r.max_abs);
          });
    m.def("eval_sigma", &eval_sigma, py::arg("basis"), py::arg("k"), py::arg("t"));
    m.def("control_norm_sq", &control_norm_sq, py::arg("basis"), py::arg("weights"));

    py::class_<ControlSignal>(m, "ControlSignal")
        .def_readonly("horizon", &ControlSignal::horizon)
        .def_readonly("l2_norm", &ControlSignal::l2_norm)
        .def("__call__", &ControlSignal::operator());
    m.def("combine", &combine, py::arg("basis"), py::arg("weights"));

    py::class_<StageSchedule>(m, "StageSchedule")
        .def_readonly("T_alpha", &StageSchedule::T_alpha)
        .def_readonly("T_f", &StageSchedule::T_f)
        .def_readonly("T_tilde", &StageSchedule::T_tilde)
        .def_readonly("lengths", &StageSchedule::lengths)
        .def_readonly("breakpoints", &StageSchedule::breakpoints);
    m.def("stage_schedule", &stage_schedule, py::arg("T"), py::arg("alpha"),
          py::arg("j_max"));

    py::class_<ConstantsReport>(m, "ConstantsReport")
        .def_readonly("T", &ConstantsReport::T)
        .def_readonly("c_bar", &ConstantsReport::c_bar)
        .def_readonly("c_k", &ConstantsReport::c_k)
        .def_readonly("c_m", &ConstantsReport::c_m)
        .def_readonly("c_b", &ConstantsReport::c_b)
        .def_readonly("m", &ConstantsReport::m)
        .def_readonly("lambda_T", &ConstantsReport::lambda_T)
        .def_readonly("lambda_tail_sq", &ConstantsReport::lambda_tail_sq)
        .def_readonly("c_alpha", &ConstantsReport::c_alpha)
        .def_readonly("c3", &ConstantsReport::c3)
        .def_readonly("c4", &ConstantsReport::c4)
        .def_readonly("k_T", &ConstantsReport::k_T)
        .def_readonly("log_k_T", &ConstantsReport::log_k_T)
        .def_readonly("g_m", &ConstantsReport::g_m)
        .def_readonly("log_g_m", &ConstantsReport::log_g_m)
        .def_readonly("gate_coefficient", &ConstantsReport::gate_coefficient)
        .def_readonly("t_f", &ConstantsReport::t_f)
        .def_readonly("t_tilde", &ConstantsReport::t_tilde)
        .def_readonly("r_T", &ConstantsReport::r_T)
        .def_readonly("control_bound_sq", &ConstantsReport::control_bound_sq)
        .def_readonly("log_control_bound_sq", &ConstantsReport::log_control_bound_sq);

    m.def(
        "theoretical_constants",
        [](const SpectralModel& model, double T, double c_bar, std::optional<double> c_k,
           std::optional<double> c_m) {
            ConstantsConfig cfg;
            cfg.c_bar = c_bar;
            cfg.c_k = c_k;
            cfg.c_m = c_m;
            return theoretical_constants(model, T, cfg);
        },
        py::arg("model"), py::arg("T"), py::arg("c_bar") = 1.0,
        py::arg("c_k") = std::nullopt, py::arg("c_m") = std::nullopt);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("states", &Trajectory::states)
        .def_readonly("norms", &Trajectory::norms)
        .def_readonly("control_values", &Trajectory::control_values)
        .def_readonly("sup_norm", &Trajectory::sup_norm)
        .def("final_state", &Trajectory::final_state)
        .def("final_norm", &Trajectory::final_norm);

    m.def(
        "simulate_bilinear",
        [](const SpectralModel& model, const std::vector<double>& state0,
           const std::function<double(double)>& p, double t0, double t1, double tol,
           int samples) {
            SimulateOptions opts;
            opts.tol = tol;
            opts.samples = samples;
            return simulate_bilinear(model, state0, p, t0, t1, opts);
        },
        py::arg("model"), py::arg("state0"), py::arg("control"), py::arg("t0"),
        py::arg("t1"), py::arg("tol") = 1e-10, py::arg("samples") = 32);
    m.def("propagate_free", &propagate_free, py::arg("model"), py::arg("state"),
          py::arg("dt"));
    m.def("shift_spectrum", &shift_spectrum, py::arg("model"));

    py::class_<StageRecord>(m, "StageRecord")
        .def_readonly("stage", &StageRecord::stage)
        .def_readonly("length", &StageRecord::length)
        .def_readonly("t_begin", &StageRecord::t_begin)
        .def_readonly("t_end", &StageRecord::t_end)
        .def_readonly("norm_in", &StageRecord::norm_in)
        .def_readonly("norm_out", &StageRecord::norm_out)
        .def_readonly("sup_norm", &StageRecord::sup_norm)
        .def_readonly("control_norm", &StageRecord::control_norm)
        .def_readonly("gate_value", &StageRecord::gate_value)
        .def_readonly("theory_bound", &StageRecord::theory_bound)
        .def_readonly("moment_residual", &StageRecord::moment_residual)
        .def_readonly("precision_bits", &StageRecord::precision_bits)
        .def_readonly("contraction_exponent", &StageRecord::contraction_exponent);

    py::class_<PiecewiseControl>(m, "PiecewiseControl")
        .def_readonly("t_end", &PiecewiseControl::t_end)
        .def("l2_norm", &PiecewiseControl::l2_norm)
        .def("__call__", &PiecewiseControl::operator());

    py::class_<RunReport>(m, "RunReport")
        .def_readonly("status", &RunReport::status)
        .def_readonly("converged", &RunReport::converged)
        .def_readonly("stages_executed", &RunReport::stages_executed)
        .def_readonly("stages", &RunReport::stages)
        .def_readonly("control", &RunReport::control)
        .def_readonly("trajectory", &RunReport::trajectory)
        .def_readonly("lambda1", &RunReport::lambda1)
        .def_readonly("initial_deviation", &RunReport::initial_deviation)
        .def_readonly("final_deviation_rel", &RunReport::final_deviation_rel)
        .def_readonly("final_deviation_abs", &RunReport::final_deviation_abs)
        .def_readonly("total_control_norm", &RunReport::total_control_norm)
        .def_readonly("total_time", &RunReport::total_time)
        .def_readonly("constants", &RunReport::constants)
        .def_readonly("t_r", &RunReport::t_r)
        .def_readonly("post_phase_norm_sq", &RunReport::post_phase_norm_sq)
        .def_readonly("gamma", &RunReport::gamma)
        .def_readonly("r1", &RunReport::r1);

    m.def(
        "run_local_control",
        [](const SpectralModel& model, const std::vector<double>& u0, double T,
           const std::string& mode, double target, int j_max, double c_bar,
           std::optional<double> c_k, std::optional<double> c_m, double tol, int samples,
           double r1, std::uint64_t seed) {
            return run_local_control(model, u0, T,
                                     make_run_config(mode, target, j_max, c_bar, c_k, c_m,
                                                     tol, samples, r1, seed));
        },
        py::arg("model"), py::arg("u0"), py::arg("T"), py::arg("mode") = "empirical",
        py::arg("target") = 1e-12, py::arg("j_max") = 12, py::arg("c_bar") = 1.0,
        py::arg("c_k") = std::nullopt, py::arg("c_m") = std::nullopt,
        py::arg("tol") = 1e-10, py::arg("samples") = 32, py::arg("r1") = 0.0,
        py::arg("seed") = 1, kRunKwDoc);
    m.def(
        "run_strip_control",
        [](const SpectralModel& model, const std::vector<double>& u0, double R,
           const std::string& mode, double target, int j_max, double c_bar,
           std::optional<double> c_k, std::optional<double> c_m, double tol, int samples,
           double r1, std::uint64_t seed) {
            return run_strip_control(model, u0, R,
                                     make_run_config(mode, target, j_max, c_bar, c_k, c_m,
                                                     tol, samples, r1, seed));
        },
        py::arg("model"), py::arg("u0"), py::arg("R"), py::arg("mode") = "empirical",
        py::arg("target") = 1e-12, py::arg("j_max") = 12, py::arg("c_bar") = 1.0,
        py::arg("c_k") = std::nullopt, py::arg("c_m") = std::nullopt,
        py::arg("tol") = 1e-10, py::arg("samples") = 32, py::arg("r1") = 0.0,
        py::arg("seed") = 1, kRunKwDoc);
    m.def(
        "run_cone_control",
        [](const SpectralModel& model, const std::vector<double>& u0, double R,
           const std::string& mode, double target, int j_max, double c_bar,
           std::optional<double> c_k, std::optional<double> c_m, double tol, int samples,
           double r1, std::uint64_t seed) {
            return run_cone_control(model, u0, R,
                                    make_run_config(mode, target, j_max, c_bar, c_k, c_m,
                                                    tol, samples, r1, seed));
        },
        py::arg("model"), py::arg("u0"), py::arg("R"), py::arg("mode") = "empirical",
        py::arg("target") = 1e-12, py::arg("j_max") = 12, py::arg("c_bar") = 1.0,
        py::arg("c_k") = std::nullopt, py::arg("c_m") = std::nullopt,
        py::arg("tol") = 1e-10, py::arg("samples") = 32, py::arg("r1") = 0.0,
        py::arg("seed") = 1, kRunKwDoc);
    m.def(
        "calibrate_r1",
        [](const SpectralModel& model, std::uint64_t seed, int random_dirs, int j_max) {
            RunConfig cfg;
            cfg.j_max = j_max;
            return calibrate_r1(model, cfg, seed, random_dirs);
        },
        py::arg("model"), py::arg("seed") = 1, py::arg("random_dirs") = 3,
        py::arg("j_max") = 12);

    py::class_<CheckResult>(m, "CheckResult")
        .def_readonly("name", &CheckResult::name)
        .def_readonly("stage", &CheckResult::stage)
        .def_readonly("passed", &CheckResult::passed)
        .def_readonly("asserted", &CheckResult::asserted)
        .def_readonly("lhs", &CheckResult::lhs)
        .def_readonly("rhs", &CheckResult::rhs)
        .def_readonly("slack", &CheckResult::slack);
    py::class_<EstimateChecks>(m, "EstimateChecks")
        .def_readonly("checks", &EstimateChecks::checks)
        .def_readonly("all_passed", &EstimateChecks::all_passed)
        .def_readonly("asserted_passed", &EstimateChecks::asserted_passed);
    m.def(
        "verify_run",
        [](const RunReport& rep, const SpectralModel& model, double c_bar) {
            ConstantsConfig cfg;
            cfg.c_bar = c_bar;
            return verify_run(rep, model, cfg);
        },
        py::arg("report"), py::arg("model"), py::arg("c_bar") = 1.0);

    py::class_<ContractionFit>(m, "ContractionFit")
        .def_readonly("exponents", &ContractionFit::exponents)
        .def_readonly("slope", &ContractionFit::slope)
        .def_readonly("intercept", &ContractionFit::intercept)
        .def_readonly("superexponential", &ContractionFit::superexponential)
        .def_readonly("excluded_floor", &ContractionFit::excluded_floor)
        .def_readonly("floor_reached", &ContractionFit::floor_reached);
    m.def("contraction_exponents", &contraction_exponents, py::arg("norm_sequence"),
          py::arg("floor") = -1.0);

    py::class_<SeriesIdentityReport>(m, "SeriesIdentityReport")
        .def_readonly("n_max", &SeriesIdentityReport::n_max)
        .def_readonly("exact_ok", &SeriesIdentityReport::exact_ok)
        .def_readonly("monotone_ok", &SeriesIdentityReport::monotone_ok)
        .def_readonly("remainder_ok", &SeriesIdentityReport::remainder_ok)
        .def_readonly("partial_sum", &SeriesIdentityReport::partial_sum)
        .def_readonly("remainder", &SeriesIdentityReport::remainder);
    m.def("verify_series_identities", &verify_series_identities, py::arg("n_max"));

    py::class_<GmBoundReport>(m, "GmBoundReport")
        .def_readonly("m", &GmBoundReport::m)
        .def_readonly("c_m", &GmBoundReport::c_m)
        .def_readonly("bound_ok", &GmBoundReport::bound_ok)
        .def_readonly("max_excess", &GmBoundReport::max_excess)
        .def_readonly("envelope_c_q", &GmBoundReport::envelope_c_q)
        .def_readonly("envelope_c_alpha_q", &GmBoundReport::envelope_c_alpha_q)
        .def_readonly("envelope_c_fit", &GmBoundReport::envelope_c_fit)
        .def_readonly("envelope_ok", &GmBoundReport::envelope_ok);
    m.def("verify_gm_bound", &verify_gm_bound, py::arg("model"), py::arg("c_bar") = 1.0,
          py::arg("t_min") = 1e-2, py::arg("t_max") = 1.0, py::arg("coarse_points") = 81);

    m.def(
        "run_scenario",
        [](const std::string& command, const std::string& config_path,
           const std::string& out_dir, std::optional<std::uint64_t> seed) {
            return run_scenario(command, config_path, out_dir, seed);
        },
        py::arg("command"), py::arg("config_path"), py::arg("out_dir") = std::string(),
        py::arg("seed") = std::nullopt,
        "CLI-equivalent entry point; returns the process exit code");
}
