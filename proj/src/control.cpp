#include "gsc/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gsc/linalg.hpp"

namespace gsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Tail bound for sum_{k>N} f(sqrt(lambda_k)) when f is log-concave and the
/// square roots advance by at least alpha: sum_m f(s_N + m alpha) <=
/// f(s_1)/(1 - r) with r the first ratio, provided r < 1.
double geometric_tail(const std::function<double(double)>& f, double s_last, double alpha) {
    const double s1 = s_last + alpha;
    const double f1 = f(s1);
    if (f1 == 0.0) return 0.0;
    const double r = f(s1 + alpha) / f1;
    if (!(r < 1.0)) return kInf;
    return f1 / (1.0 - r);
}

std::vector<double> log_grid(double t_min, double t_max, int points) {
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) {
        const double s = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        g[i] = t_min * std::pow(t_max / t_min, s);
    }
    return g;
}

}  // namespace

StageSchedule stage_schedule(double T, double alpha, int j_max) {
    if (!(T > 0.0) || !(alpha > 0.0) || j_max < 1)
        throw ConfigError("stage_schedule requires T > 0, alpha > 0, j_max >= 1");
    StageSchedule s;
    s.requested_T = T;
    s.alpha = alpha;
    s.T_alpha = (M_PI * M_PI / 6.0) * std::min(1.0, 1.0 / (alpha * alpha));
    s.T_f = std::min(T, s.T_alpha);
    s.T_tilde = 6.0 / (M_PI * M_PI) * s.T_f;
    s.j_max = j_max;
    s.lengths.resize(j_max);
    s.breakpoints.assign(j_max + 1, 0.0);
    for (int j = 1; j <= j_max; ++j) {
        s.lengths[j - 1] = s.T_tilde / (static_cast<double>(j) * j);
        s.breakpoints[j] = s.breakpoints[j - 1] + s.lengths[j - 1];
    }
    return s;
}

double c_alpha_of(double T, double alpha, double c_bar) {
    const double a2 = alpha * alpha;
    if (T >= 1.0 / a2) return std::sqrt(c_bar * c_bar * a2);
    const double sq = c_bar * (1.0 / T + 1.0 / (T * T * a2)) * std::exp(c_bar / (T * a2));
    return std::sqrt(sq);
}

SeriesValue lambda_sq_series(const SpectralModel& model, double T, double c_bar) {
    SeriesValue out;
    const std::vector<double> c1 = model.ground_coupling();
    std::vector<double> terms(model.n_modes);
    for (int k = 0; k < model.n_modes; ++k) {
        const double lam = model.eigenvalues[k];
        terms[k] = std::exp(-2.0 * lam * T + c_bar * std::sqrt(lam) / model.gap_alpha) /
                   (c1[k] * c1[k]);
    }
    out.value = kahan_sum(terms);
    const double q = model.dispersion_q, b = model.dispersion_b;
    const double s_last = std::sqrt(model.eigenvalues.back());
    out.tail = geometric_tail(
        [&](double s) {
            return std::pow(s, 4.0 * q) *
                   std::exp(-2.0 * T * s * s + c_bar * s / model.gap_alpha) / (b * b);
        },
        s_last, model.gap_alpha);
    return out;
}

SeriesValue gm_inner_series(const SpectralModel& model, double T, double m) {
    SeriesValue out;
    const std::vector<double> c1 = model.ground_coupling();
    std::vector<double> terms(model.n_modes);
    for (int k = 0; k < model.n_modes; ++k) {
        const double lam = model.eigenvalues[k];
        terms[k] = std::exp(-2.0 * lam * T + m * std::sqrt(lam)) / (c1[k] * c1[k]);
    }
    out.value = kahan_sum(terms);
    const double q = model.dispersion_q, b = model.dispersion_b;
    const double s_last = std::sqrt(model.eigenvalues.back());
    out.tail = geometric_tail(
        [&](double s) {
            return std::pow(s, 4.0 * q) * std::exp(-2.0 * T * s * s + m * s) / (b * b);
        },
        s_last, model.gap_alpha);
    return out;
}

SeriesValue dispersion_decay_series(const SpectralModel& model, double T) {
    SeriesValue out;
    const double q = model.dispersion_q;
    std::vector<double> terms(model.n_modes);
    for (int k = 0; k < model.n_modes; ++k) {
        const double lam = model.eigenvalues[k];
        terms[k] = lam > 0.0 ? std::pow(lam, 2.0 * q) * std::exp(-lam * T) : 0.0;
    }
    out.value = kahan_sum(terms);
    const double s_last = std::sqrt(model.eigenvalues.back());
    out.tail = geometric_tail(
        [&](double s) { return std::pow(s, 4.0 * q) * std::exp(-T * s * s); }, s_last,
        model.gap_alpha);
    return out;
}

double log_g_m(const SpectralModel& model, double T, double m) {
    const SeriesValue inner = gm_inner_series(model, T, m);
    const double sum = inner.value + (std::isfinite(inner.tail) ? inner.tail : 0.0);
    return std::log(m / (T * T)) + m / T + std::log(sum);
}

double calibrate_c_m(const SpectralModel& model, double c_bar, double t_min, double t_max,
                     int grid) {
    const double a = model.gap_alpha;
    const double m = c_bar * (1.0 + 1.0 / (a * a));
    double c_m = 0.0;
    for (double T : log_grid(t_min, t_max, grid))
        c_m = std::max(c_m, T * log_g_m(model, T, m));
    return c_m;
}

namespace {

double log_k_of(const SpectralModel& model, double T, double c_bar, double c_b) {
    const double ca = c_alpha_of(T, model.gap_alpha, c_bar);
    const double l2 = lambda_sq_series(model, T, c_bar).value;
    const double x = c_b * ca * ca * l2;  // C_B C_alpha^2 Lambda^2
    // K^2 = C_B^2 e^{2 C_B sqrt(T) + (C_B+1) T} C_alpha^2 Lambda^2 (1 + x)
    return std::log(c_b) + 0.5 * (2.0 * c_b * std::sqrt(T) + (c_b + 1.0) * T) +
           std::log(ca) + 0.5 * std::log(l2) + 0.5 * std::log1p(x);
}

}  // namespace

double calibrate_c_k(const SpectralModel& model, double c_bar, double c_m, double t_min,
                     double t_max, int grid) {
    const double c_b = std::max(1.0, model.coupling_spectral_norm());
    double k_exp = 0.0;
    for (double T : log_grid(t_min, t_max, grid))
        k_exp = std::max(k_exp, T * log_k_of(model, T, c_bar, c_b));
    return 1.05 * std::max(c_m, k_exp);
}

ConstantsReport theoretical_constants(const SpectralModel& model, double T,
                                      const ConstantsConfig& cfg) {
    if (!(T > 0.0)) throw ConfigError("constants require T > 0");
    ConstantsReport r;
    r.T = T;
    r.c_bar = cfg.c_bar;
    r.c_b = std::max(1.0, model.coupling_spectral_norm());
    const double alpha = model.gap_alpha;
    r.m = cfg.c_bar * (1.0 + 1.0 / (alpha * alpha));

    r.c_m_calibrated = !cfg.c_m.has_value();
    r.c_m = cfg.c_m ? *cfg.c_m : calibrate_c_m(model, cfg.c_bar);
    r.c_k_calibrated = !cfg.c_k.has_value();
    r.c_k = cfg.c_k ? *cfg.c_k : calibrate_c_k(model, cfg.c_bar, r.c_m);

    const SeriesValue l2 = lambda_sq_series(model, T, cfg.c_bar);
    r.lambda_T = std::sqrt(l2.value);
    r.lambda_tail_sq = l2.tail;
    r.c_alpha = c_alpha_of(T, alpha, cfg.c_bar);
    r.c3 = 2.0 * std::sqrt(T) * r.c_b * r.c_alpha;
    r.c4 = r.c_b * r.c_alpha * r.c_alpha;
    r.gate_coefficient = r.c_alpha * r.lambda_T;

    r.log_k_T = log_k_of(model, T, cfg.c_bar, r.c_b);
    r.k_T = r.log_k_T < 700.0 ? std::exp(r.log_k_T) : kInf;

    const SeriesValue gm = gm_inner_series(model, std::min(T, 1.0), r.m);
    r.g_m_tail_sum = gm.tail;
    r.log_g_m = log_g_m(model, std::min(T, 1.0), r.m);
    r.g_m = r.log_g_m < 700.0 ? std::exp(r.log_g_m) : kInf;

    const StageSchedule sched = stage_schedule(T, alpha, 1);
    r.t_f = sched.T_f;
    r.t_tilde = sched.T_tilde;
    r.r_T = std::exp(-M_PI * M_PI * r.c_k / r.t_f);

    // ||p||^2 bound e^{-pi^2 C_K/T_f} / (e^{2 pi^2 C_K/(3 T_f)} - 1), in logs.
    const double x = 2.0 * M_PI * M_PI * r.c_k / (3.0 * r.t_f);
    r.log_control_bound_sq =
        -M_PI * M_PI * r.c_k / r.t_f - x - std::log1p(-std::exp(-x));
    r.control_bound_sq =
        r.log_control_bound_sq > -700.0 ? std::exp(r.log_control_bound_sq) : 0.0;
    return r;
}

StageControl synthesize_stage_control(const SpectralModel& shifted_model,
                                      const std::vector<double>& v_state,
                                      double stage_length, const PrecisionConfig& pc) {
    const int n = shifted_model.n_modes;
    if (v_state.size() != static_cast<size_t>(n))
        throw OutOfRange("state size does not match model");
    StageControl sc;
    sc.t_begin = 0.0;
    sc.t_end = stage_length;
    sc.weights.resize(n);
    const std::vector<double> c1 = shifted_model.ground_coupling();
    for (int k = 0; k < n; ++k) sc.weights[k] = v_state[k] / c1[k];
    sc.basis = biorthogonal_family(shifted_model.eigenvalues, stage_length, pc);
    // ratios divided at the basis precision: the linearized endpoint then
    // cancels down to the moment residual instead of the double rounding of
    // v_k / coupling(1,k)
    sc.signal = combine_ratios(sc.basis, v_state, c1);
    sc.l2_norm = sc.signal.l2_norm;
    return sc;
}

double PiecewiseControl::l2_norm() const {
    double s = 0.0;
    for (const StageControl& st : stages) s += st.l2_norm * st.l2_norm;
    return std::sqrt(s);
}

double PiecewiseControl::operator()(double t) const { return eval_control(*this, t); }

double eval_control(const PiecewiseControl& control, double t) {
    for (const StageControl& st : control.stages)
        if (t >= st.t_begin && t < st.t_end) return st.signal(t - st.t_begin);
    return 0.0;  // zero extension past the last breakpoint (and before the first)
}

std::string to_string(RunMode m) { return m == RunMode::Theory ? "theory" : "empirical"; }

RunMode run_mode_from_string(const std::string& s) {
    if (s == "theory") return RunMode::Theory;
    if (s == "empirical") return RunMode::Empirical;
    throw ConfigError("run mode must be 'theory' or 'empirical'");
}

namespace {

struct SteerOutcome {
    std::vector<StageRecord> records;
    PiecewiseControl control;
    Trajectory vtraj;  // global clock, v coordinates
    bool converged = false;
    std::string status = "converged";
    std::vector<double> v_final;
    double final_norm = 0.0;
    double reached_time = 0.0;  // last breakpoint simulated (global clock)
};

void append_samples(Trajectory& into, const Trajectory& seg, double offset) {
    for (size_t i = 0; i < seg.times.size(); ++i) {
        const double t = seg.times[i] + offset;
        if (!into.times.empty() && t <= into.times.back()) continue;
        into.times.push_back(t);
        into.states.push_back(seg.states[i]);
        into.norms.push_back(seg.norms[i]);
        into.control_values.push_back(seg.control_values[i]);
        into.step_errors.push_back(seg.step_errors[i]);
        into.sup_norm = std::max(into.sup_norm, seg.norms[i]);
    }
}

double theory_stage_bound(int n, double c_k, double t_tilde) {
    const double nn = static_cast<double>(n);
    return std::exp(-(nn * nn + 4.0 * nn + 6.0) * c_k / t_tilde);
}

/// The stage loop of the local strategy, in deviation coordinates on the
/// shifted spectrum. t_offset places stage clocks on the global axis.
SteerOutcome steer_to_ground(const SpectralModel& shifted, std::vector<double> v,
                             const StageSchedule& sched, const RunConfig& cfg,
                             const ConstantsConfig& pinned, double t_offset,
                             RunReport& partial) {
    SteerOutcome out;
    out.control.t_end = t_offset;
    const std::vector<double> bcol = shifted.ground_coupling();
    double norm_in = norm2(v);
    out.reached_time = t_offset;

    for (int n = 1; n <= sched.j_max; ++n) {
        if (norm_in <= cfg.target) break;
        const double T_n = sched.lengths[n - 1];
        const ConstantsReport cn = theoretical_constants(shifted, T_n, pinned);

        StageRecord rec;
        rec.stage = n;
        rec.length = T_n;
        rec.t_begin = t_offset + sched.breakpoints[n - 1];
        rec.t_end = t_offset + sched.breakpoints[n];
        rec.norm_in = norm_in;
        rec.gate_value = cn.gate_coefficient * norm_in;
        rec.theory_bound = theory_stage_bound(n, cn.c_k, sched.T_tilde);

        if (rec.gate_value > 1.0) {
            partial.stages = out.records;
            partial.status = "admissibility_violated";
            std::ostringstream os;
            os << "empirical gate C_alpha(T_n) Lambda_{T_n} ||v|| = " << rec.gate_value
               << " > 1 at stage " << n;
            throw AdmissibilityViolated(os.str(), partial);
        }
        if (cfg.mode == RunMode::Theory) {
            const double entry_bound = theory_stage_bound(n - 1, cn.c_k, sched.T_tilde);
            if (!(norm_in < entry_bound)) {
                partial.stages = out.records;
                partial.status = "admissibility_violated";
                std::ostringstream os;
                os << "theory gate ||v(tau_" << n - 1 << ")|| = " << norm_in
                   << " >= " << entry_bound << " at stage " << n;
                throw AdmissibilityViolated(os.str(), partial);
            }
        }

        StageControl sc = synthesize_stage_control(shifted, v, T_n, cfg.precision);
        sc.index = n;
        sc.t_begin = rec.t_begin;
        sc.t_end = rec.t_end;
        rec.control_norm = sc.l2_norm;
        rec.moment_residual = sc.basis.max_residual;
        rec.precision_bits = sc.basis.precision_bits;

        // A small memo ring absorbs the repeated substep times of the
        // step-doubled scheme; extended-precision signal evals dominate cost.
        const ControlSignal& sig = sc.signal;
        struct Memo {
            const ControlSignal& sig;
            std::array<double, 4> ts{}, vs{};
            int next = 0, filled = 0;
            double operator()(double t) {
                for (int i = 0; i < filled; ++i)
                    if (ts[i] == t) return vs[i];
                const double v = sig(t);
                ts[next] = t;
                vs[next] = v;
                next = (next + 1) % static_cast<int>(ts.size());
                filled = std::min<int>(filled + 1, ts.size());
                return v;
            }
        } memo{sig, {}, {}, 0, 0};
        Forcing forcing{nullptr, bcol};
        const Trajectory seg = simulate_bilinear(
            shifted, v, [&memo](double t) { return memo(t); }, 0.0, T_n, cfg.sim, &forcing);

        v = seg.final_state();
        rec.norm_out = norm2(v);
        rec.sup_norm = seg.sup_norm;
        rec.contraction_exponent =
            (rec.norm_in > 0.0 && rec.norm_in < 1.0 && rec.norm_out > 0.0 &&
             rec.norm_out < 1.0)
                ? std::log(rec.norm_out) / std::log(rec.norm_in)
                : std::numeric_limits<double>::quiet_NaN();

        append_samples(out.vtraj, seg, rec.t_begin);
        out.records.push_back(rec);
        out.control.stages.push_back(std::move(sc));
        out.control.t_end = rec.t_end;
        out.reached_time = rec.t_end;

        if (n > 2 && rec.norm_out >= rec.norm_in) {
            partial.stages = out.records;
            partial.status = "contraction_failure";
            std::ostringstream os;
            os << "||v(tau_" << n << ")|| = " << rec.norm_out
               << " did not contract from " << rec.norm_in;
            throw ContractionFailure(os.str(), partial);
        }
        norm_in = rec.norm_out;
    }

    out.v_final = std::move(v);
    out.final_norm = norm_in;
    out.converged = norm_in <= cfg.target;
    out.status = out.converged ? "converged" : "not_converged";
    return out;
}

/// Resolves calibrated constants once per run so every stage sees the same
/// C_K and C_M.
ConstantsConfig pin_constants(const SpectralModel& shifted, const ConstantsConfig& cfg) {
    ConstantsConfig pinned = cfg;
    if (!pinned.c_m) pinned.c_m = calibrate_c_m(shifted, cfg.c_bar);
    if (!pinned.c_k) pinned.c_k = calibrate_c_k(shifted, cfg.c_bar, *pinned.c_m);
    return pinned;
}

/// Maps a deviation-coordinate trajectory to physical u samples:
/// u(t) = e^{-lambda_1 t} (v + e_1), scaled by gamma for cone runs.
Trajectory to_physical(const Trajectory& vtraj, double lambda1, double gamma) {
    Trajectory u = vtraj;
    for (size_t i = 0; i < u.times.size(); ++i) {
        const double factor = gamma * std::exp(-lambda1 * u.times[i]);
        u.states[i][0] += 1.0;
        for (double& x : u.states[i]) x *= factor;
        // norms stay ||v||: the relative deviation from the target trajectory
    }
    return u;
}

void finish_report(RunReport& rep, const SteerOutcome& steer, double lambda1,
                   double gamma) {
    rep.stages = steer.records;
    rep.control = steer.control;
    rep.stages_executed = static_cast<int>(steer.records.size());
    rep.converged = steer.converged;
    rep.status = steer.status;
    rep.final_deviation_rel = steer.final_norm;
    rep.total_time = steer.reached_time;
    rep.final_deviation_abs =
        std::abs(gamma) * std::exp(-lambda1 * rep.total_time) * steer.final_norm;
    rep.total_control_norm = rep.control.l2_norm();
    rep.trajectory = to_physical(steer.vtraj, lambda1, gamma);
    if (!rep.trajectory.norms.empty()) {
        // measured mild-solution constant sup||u|| / (||u_0|| + ||f||_{2,0});
        // the affine term has L2 norm ||p|| * ||B phi_1||.
        double sup_u = 0.0;
        for (size_t i = 0; i < rep.trajectory.states.size(); ++i)
            sup_u = std::max(sup_u, norm2(rep.trajectory.states[i]));
        const double u0n = norm2(rep.trajectory.states.front());
        rep.mild_bound_c = sup_u / std::max(u0n + rep.total_control_norm, 1e-300);
    }
}

}  // namespace

RunReport run_local_control(const SpectralModel& model, const std::vector<double>& u0,
                            double T, const RunConfig& cfg) {
    if (u0.size() != static_cast<size_t>(model.n_modes))
        throw OutOfRange("u0 size does not match model");
    auto [shifted, lambda1] = shift_spectrum(model);
    const ConstantsConfig pinned = pin_constants(shifted, cfg.constants);
    const StageSchedule sched = stage_schedule(T, model.gap_alpha, cfg.j_max);

    std::vector<double> v0 = u0;
    v0[0] -= 1.0;  // v = z - phi_1 with z(0) = u_0

    RunReport rep;
    rep.mode = cfg.mode;
    rep.lambda1 = lambda1;
    rep.schedule = sched;
    rep.initial_deviation = norm2(v0);
    rep.constants = theoretical_constants(shifted, sched.T_f, pinned);

    if (cfg.mode == RunMode::Theory && !(rep.initial_deviation < rep.constants.r_T)) {
        rep.status = "admissibility_violated";
        std::ostringstream os;
        os << "||v_0|| = " << rep.initial_deviation << " is not inside R_T = "
           << rep.constants.r_T;
        throw AdmissibilityViolated(os.str(), rep);
    }

    const SteerOutcome steer =
        steer_to_ground(shifted, std::move(v0), sched, cfg, pinned, 0.0, rep);
    finish_report(rep, steer, lambda1, 1.0);
    return rep;
}

RunReport run_strip_control(const SpectralModel& model, const std::vector<double>& u0,
                            double R, const RunConfig& cfg) {
    if (u0.size() != static_cast<size_t>(model.n_modes))
        throw OutOfRange("u0 size does not match model");
    auto [shifted, lambda1] = shift_spectrum(model);

    RunConfig run_cfg = cfg;
    if (!(run_cfg.r1 > 0.0))
        run_cfg.r1 = calibrate_r1(model, cfg, cfg.seed, cfg.calibration_random_dirs);
    const double r1 = run_cfg.r1;

    const double ground = u0[0];
    std::vector<double> v0 = u0;
    v0[0] -= 1.0;
    double perp_sq = 0.0;
    for (size_t k = 1; k < v0.size(); ++k) perp_sq += v0[k] * v0[k];

    if (!(std::abs(ground - 1.0) < r1)) {
        std::ostringstream os;
        os << "strip condition fails: |<u0, phi_1> - 1| = " << std::abs(ground - 1.0)
           << " >= r1 = " << r1;
        throw StripViolated(os.str());
    }
    if (!(std::sqrt(perp_sq) <= R)) {
        std::ostringstream os;
        os << "strip condition fails: ||u0 - <u0,phi_1> phi_1|| = " << std::sqrt(perp_sq)
           << " > R = " << R;
        throw StripViolated(os.str());
    }

    const double mu2 = shifted.eigenvalues[1];
    const double t_r = std::max(0.0, std::log(R * R / (r1 * r1)) / (2.0 * mu2));

    RunReport rep;
    rep.mode = cfg.mode;
    rep.lambda1 = lambda1;
    rep.initial_deviation = norm2(v0);
    rep.t_r = t_r;
    rep.r1 = r1;
    rep.big_r = R;

    // Phase 1: free decay of the deviation on the shifted spectrum.
    Trajectory phase1;
    const int samples = std::max(2, cfg.sim.samples);
    for (int i = 0; i <= samples; ++i) {
        const double t = t_r * i / static_cast<double>(samples);
        std::vector<double> v = propagate_free(shifted, v0, t);
        phase1.times.push_back(t);
        phase1.norms.push_back(norm2(v));
        phase1.control_values.push_back(0.0);
        phase1.step_errors.push_back(0.0);
        phase1.sup_norm = std::max(phase1.sup_norm, phase1.norms.back());
        phase1.states.push_back(std::move(v));
    }
    std::vector<double> v_mid = propagate_free(shifted, v0, t_r);
    const double mid_sq = norm2(v_mid) * norm2(v_mid);
    rep.post_phase_norm_sq = mid_sq;
    if (!(mid_sq < 2.0 * r1 * r1)) {
        std::ostringstream os;
        os << "post-decay deviation^2 = " << mid_sq << " is not below 2 r1^2 = "
           << 2.0 * r1 * r1;
        throw StripViolated(os.str());
    }

    // Phase 2: the local strategy at T = 1 starting from v(t_R).
    const ConstantsConfig pinned = pin_constants(shifted, cfg.constants);
    const StageSchedule sched = stage_schedule(1.0, model.gap_alpha, cfg.j_max);
    rep.schedule = sched;
    rep.constants = theoretical_constants(shifted, sched.T_f, pinned);
    if (cfg.mode == RunMode::Theory && !(norm2(v_mid) < rep.constants.r_T)) {
        rep.status = "admissibility_violated";
        std::ostringstream os;
        os << "||v(t_R)|| = " << norm2(v_mid) << " is not inside R_T = "
           << rep.constants.r_T;
        throw AdmissibilityViolated(os.str(), rep);
    }

    SteerOutcome steer =
        steer_to_ground(shifted, std::move(v_mid), sched, run_cfg, pinned, t_r, rep);
    Trajectory joined = std::move(phase1);
    append_samples(joined, steer.vtraj, 0.0);  // stage samples already global
    steer.vtraj = std::move(joined);
    if (t_r > 0.0 && steer.records.empty()) steer.reached_time = t_r;
    finish_report(rep, steer, lambda1, 1.0);
    return rep;
}

RunReport run_cone_control(const SpectralModel& model, const std::vector<double>& u0,
                           double R, const RunConfig& cfg) {
    if (u0.size() != static_cast<size_t>(model.n_modes))
        throw OutOfRange("u0 size does not match model");
    const double gamma = u0[0];
    const double u0_norm = norm2(u0);

    if (u0_norm == 0.0) {
        // The zero state stays on the zero target with p = 0.
        RunReport rep;
        rep.mode = cfg.mode;
        rep.gamma = 0.0;
        rep.big_r = R;
        rep.converged = true;
        rep.status = "converged";
        auto [shifted, lambda1] = shift_spectrum(model);
        rep.lambda1 = lambda1;
        rep.trajectory.times = {0.0};
        rep.trajectory.states = {std::vector<double>(model.n_modes, 0.0)};
        rep.trajectory.norms = {0.0};
        rep.trajectory.control_values = {0.0};
        rep.trajectory.step_errors = {0.0};
        return rep;
    }
    if (gamma == 0.0)
        throw ConeViolated("cone condition fails: <u0, phi_1> = 0 with u0 != 0");
    double perp_sq = 0.0;
    for (size_t k = 1; k < u0.size(); ++k) perp_sq += u0[k] * u0[k];
    if (!(std::sqrt(perp_sq) <= R * std::abs(gamma))) {
        std::ostringstream os;
        os << "cone condition fails: ||u0 - <u0,phi_1> phi_1|| = " << std::sqrt(perp_sq)
           << " > R |<u0,phi_1>| = " << R * std::abs(gamma);
        throw ConeViolated(os.str());
    }

    std::vector<double> scaled = u0;
    for (double& x : scaled) x /= gamma;
    RunConfig strip_cfg = cfg;
    if (!(strip_cfg.r1 > 0.0))
        strip_cfg.r1 = calibrate_r1(model, cfg, cfg.seed, cfg.calibration_random_dirs);

    RunReport rep = run_strip_control(model, scaled, R, strip_cfg);
    rep.gamma = gamma;
    rep.big_r = R;
    // Rescale the physical trajectory: the same control steers u0 to
    // gamma psi_1 by linearity of the state equation in the state.
    for (auto& state : rep.trajectory.states)
        for (double& x : state) x *= gamma;
    rep.final_deviation_abs *= std::abs(gamma);
    return rep;
}

double calibrate_r1(const SpectralModel& model, const RunConfig& cfg, std::uint64_t seed,
                    int random_dirs) {
    const int n = model.n_modes;
    std::vector<std::vector<double>> dirs;
    for (int k = 1; k < n; ++k) {
        std::vector<double> d(n, 0.0);
        d[k] = 1.0;
        dirs.push_back(std::move(d));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < random_dirs; ++i) {
        std::vector<double> d(n, 0.0);
        for (int k = 1; k < n; ++k) d[k] = gauss(rng);
        const double nd = norm2(d);
        if (nd == 0.0) continue;
        for (double& x : d) x /= nd;
        dirs.push_back(std::move(d));
    }

    RunConfig probe = cfg;
    probe.r1 = 1.0;  // irrelevant for local probes
    double eps_worst = 0.0;
    bool worst_set = false;
    for (const auto& dir : dirs) {
        double eps_dir = 0.0;
        for (int p = 1; p <= 20; ++p) {
            const double eps = std::pow(2.0, -p) * std::sqrt(2.0);
            std::vector<double> u0(n, 0.0);
            u0[0] = 1.0;
            for (int k = 0; k < n; ++k) u0[k] += eps * dir[k];
            bool ok = false;
            try {
                ok = run_local_control(model, u0, 1.0, probe).converged;
            } catch (const ControlFailureError&) {
            } catch (const ResidualTooLarge&) {
            } catch (const ToleranceUnreachable&) {
            }
            if (ok) {
                eps_dir = eps;
                break;  // grid is scanned largest-first
            }
        }
        if (eps_dir == 0.0)
            throw StripViolated("r1 calibration failed: no probed amplitude converged");
        if (!worst_set || eps_dir < eps_worst) {
            eps_worst = eps_dir;
            worst_set = true;
        }
    }
    return eps_worst / std::sqrt(2.0);
}

}  // namespace gsc
