#ifndef GSC_CONTROL_HPP
#define GSC_CONTROL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsc/errors.hpp"
#include "gsc/moment.hpp"
#include "gsc/simulate.hpp"
#include "gsc/spectral.hpp"

namespace gsc {

/// Shrinking stage schedule: T_f = min{T, T_alpha}, T_alpha = (pi^2/6)
/// min{1, 1/alpha^2}, stage lengths T_j = T_tilde / j^2 with T_tilde =
/// (6/pi^2) T_f, so the total schedule length telescopes to T_f.
struct StageSchedule {
    double requested_T = 0.0;
    double alpha = 0.0;
    double T_alpha = 0.0;
    double T_f = 0.0;
    double T_tilde = 0.0;
    int j_max = 0;
    std::vector<double> lengths;      // T_j, j = 1..j_max
    std::vector<double> breakpoints;  // tau_0 = 0, tau_1, ..., tau_{j_max}
};

StageSchedule stage_schedule(double T, double alpha, int j_max);

struct ConstantsConfig {
    double c_bar = 1.0;
    std::optional<double> c_k;  // calibrated when absent
    std::optional<double> c_m;  // calibrated when absent
};

/// Every theoretical constant evaluated at one horizon T, with N-term series
/// truncations and analytic geometric tail bounds reported separately.
struct ConstantsReport {
    double T = 0.0;
    double c_bar = 0.0, c_k = 0.0, c_m = 0.0, c_b = 0.0;
    bool c_k_calibrated = false, c_m_calibrated = false;
    double m = 0.0;               // M = c_bar (1 + 1/alpha^2)
    double lambda_T = 0.0;        // truncated Lambda_T
    double lambda_tail_sq = 0.0;  // tail bound on the squared series
    double c_alpha = 0.0;
    double c3 = 0.0, c4 = 0.0;
    double k_T = 0.0;             // K(T), +inf if it overflows
    double log_k_T = 0.0;
    double g_m = 0.0;             // G_M(T) truncated (+tail), +inf if overflowing
    double log_g_m = 0.0;
    double g_m_tail_sum = 0.0;    // tail bound on the inner series
    double gate_coefficient = 0.0;  // C_alpha(T) Lambda_T
    double t_f = 0.0, t_tilde = 0.0;
    double r_T = 0.0;             // e^{-pi^2 C_K / T_f}
    double control_bound_sq = 0.0;      // bound for ||p||^2 over the whole run
    double log_control_bound_sq = 0.0;
};

ConstantsReport theoretical_constants(const SpectralModel& model, double T,
                                      const ConstantsConfig& cfg = {});

/// C_alpha(T)^2 = c_bar (1/T + 1/(T^2 a^2)) e^{c_bar/(T a^2)} for T < 1/a^2,
/// c_bar^2 a^2 for T >= 1/a^2.
double c_alpha_of(double T, double alpha, double c_bar);

/// Truncated Lambda_T^2 = sum_k e^{-2 mu_k T} e^{c_bar sqrt(mu_k)/alpha} /
/// coupling(1,k)^2 plus its tail bound.
struct SeriesValue {
    double value = 0.0;  // truncated sum
    double tail = 0.0;   // analytic bound on the dropped tail (may be +inf)
};
SeriesValue lambda_sq_series(const SpectralModel& model, double T, double c_bar);
SeriesValue gm_inner_series(const SpectralModel& model, double T, double m);
SeriesValue dispersion_decay_series(const SpectralModel& model, double T);  // sum lam^{2q} e^{-lam T}
double log_g_m(const SpectralModel& model, double T, double m);

/// C_M = max over a log grid of T log G_M(T); C_K = 1.05 max(C_M, max of
/// T log K(T)) so that K(T) <= e^{C_K/T} on the probed grid.
double calibrate_c_m(const SpectralModel& model, double c_bar, double t_min = 1e-3,
                     double t_max = 1.0, int grid = 61);
double calibrate_c_k(const SpectralModel& model, double c_bar, double c_m,
                     double t_min = 1e-3, double t_max = 1.0, int grid = 61);

/// One stage of the moment-method control: weights d_k = v_k / coupling(1,k)
/// against the biorthogonal family on [0, stage_length].
struct StageControl {
    int index = 0;
    double t_begin = 0.0, t_end = 0.0;  // global clock
    std::vector<double> weights;
    BiorthogonalBasis basis;
    ControlSignal signal;  // local clock [0, t_end - t_begin]
    double l2_norm = 0.0;

    double length() const { return t_end - t_begin; }
};

StageControl synthesize_stage_control(const SpectralModel& shifted_model,
                                      const std::vector<double>& v_state,
                                      double stage_length, const PrecisionConfig& pc = {});

/// Stage controls on abutting intervals with zero extension past the last
/// breakpoint; evaluation is right-continuous at breakpoints.
struct PiecewiseControl {
    std::vector<StageControl> stages;
    double t_end = 0.0;

    double l2_norm() const;
    double operator()(double t) const;
};

double eval_control(const PiecewiseControl& control, double t);

enum class RunMode { Theory, Empirical };

std::string to_string(RunMode m);
RunMode run_mode_from_string(const std::string& s);

struct RunConfig {
    RunMode mode = RunMode::Empirical;
    double target = 1e-12;  // stop when ||v|| falls below this
    int j_max = 12;
    ConstantsConfig constants;
    PrecisionConfig precision;
    SimulateOptions sim;
    double r1 = 0.0;  // strip radius at T = 1; 0 requests calibration
    std::uint64_t seed = 1;
    int calibration_random_dirs = 3;
};

struct StageRecord {
    int stage = 0;
    double length = 0.0, t_begin = 0.0, t_end = 0.0;
    double norm_in = 0.0, norm_out = 0.0, sup_norm = 0.0;
    double control_norm = 0.0;
    double gate_value = 0.0;     // C_alpha(T_n) Lambda_{T_n} ||v(tau_{n-1})||
    double theory_bound = 0.0;   // e^{-(n^2+4n+6) C_K / T_tilde} for ||v(tau_n)||
    double moment_residual = 0.0;
    int precision_bits = 0;
    double contraction_exponent = 0.0;  // log||v_out|| / log||v_in|| when both < 1
};

struct RunReport {
    std::string status = "converged";
    bool converged = false;
    RunMode mode = RunMode::Empirical;
    int stages_executed = 0;
    std::vector<StageRecord> stages;
    PiecewiseControl control;
    Trajectory trajectory;  // global clock, physical u coordinates
    double lambda1 = 0.0;
    double initial_deviation = 0.0;
    double final_deviation_rel = 0.0;  // ||v|| at the final breakpoint
    double final_deviation_abs = 0.0;  // e^{-lambda_1 t} ||v||
    double total_control_norm = 0.0;
    double total_time = 0.0;
    StageSchedule schedule;
    ConstantsReport constants;
    double mild_bound_c = 0.0;  // measured sup||u|| / (||u_0|| + ||f||_{2,0})
    // strip / cone bookkeeping
    double t_r = 0.0;
    double post_phase_norm_sq = -1.0;
    double gamma = 1.0;
    double r1 = 0.0;
    double big_r = 0.0;
};

/// Control failures carry the diagnostic report assembled so far.
struct ControlFailureError : Error {
    RunReport report;
    ControlFailureError(const std::string& msg, RunReport r)
        : Error(msg), report(std::move(r)) {}
};
struct AdmissibilityViolated : ControlFailureError {
    using ControlFailureError::ControlFailureError;
};
struct ContractionFailure : ControlFailureError {
    using ControlFailureError::ControlFailureError;
};

/// Steers u to the ground state solution in time T by staged moment controls
/// on the shifted spectrum.
RunReport run_local_control(const SpectralModel& model, const std::vector<double>& u0,
                            double T, const RunConfig& cfg = {});

/// Free decay for t_R = log(R^2/r_1^2)/(2 mu_2), then the local strategy at
/// T = 1.
RunReport run_strip_control(const SpectralModel& model, const std::vector<double>& u0,
                            double R, const RunConfig& cfg = {});

/// Rescales by gamma = <u_0, phi_1> and runs the strip strategy on u_0/gamma;
/// by state-linearity the same control steers u_0 to gamma psi_1.
RunReport run_cone_control(const SpectralModel& model, const std::vector<double>& u0,
                           double R, const RunConfig& cfg = {});

/// Largest eps on the dyadic grid {2^-1..2^-20} sqrt(2) for which the local
/// run at T = 1 converges in the worst probed direction; r_1 = eps / sqrt(2).
double calibrate_r1(const SpectralModel& model, const RunConfig& cfg,
                    std::uint64_t seed, int random_dirs = 3);

}  // namespace gsc

#endif
