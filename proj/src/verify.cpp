#include "gsc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace gsc {

namespace {

constexpr double kRhsTol = 1.01;  // multiplicative tolerance on right-hand sides

CheckResult make_check(std::string name, int stage, double lhs, double rhs,
                       bool asserted) {
    CheckResult c;
    c.name = std::move(name);
    c.stage = stage;
    c.lhs = lhs;
    c.rhs = rhs;
    c.asserted = asserted;
    c.passed = lhs <= kRhsTol * rhs;
    c.slack = rhs > 0.0 ? 1.0 - lhs / rhs : (lhs <= 0.0 ? 1.0 : -1.0);
    return c;
}

}  // namespace

EstimateChecks verify_run(const RunReport& report, const SpectralModel& model,
                          const ConstantsConfig& cfg) {
    EstimateChecks out;
    const bool theory = report.mode == RunMode::Theory;
    auto [shifted, lambda1] = shift_spectrum(model);
    (void)lambda1;

    ConstantsConfig pinned = cfg;
    if (!pinned.c_m) pinned.c_m = report.constants.c_m;
    if (!pinned.c_k) pinned.c_k = report.constants.c_k;

    // Cumulative (estimvn) bookkeeping in logs: log||v(tau_n)|| <=
    // sum_j 2^{n-j} log K(T_j) + 2^n log||v_0||.
    double cum_log = report.initial_deviation > 0.0
                         ? std::log(report.initial_deviation)
                         : -std::numeric_limits<double>::infinity();

    for (const StageRecord& st : report.stages) {
        const ConstantsReport cn = theoretical_constants(shifted, st.length, pinned);

        out.checks.push_back(make_check(
            "pbound", st.stage, st.control_norm, cn.gate_coefficient * st.norm_in,
            theory));
        out.checks.push_back(make_check("gate", st.stage, st.gate_value, 1.0, true));

        const double unifv_rhs =
            std::exp(cn.c3 * cn.lambda_T * st.norm_in + cn.c_b * st.length) *
            (1.0 + cn.c4 * cn.lambda_T * cn.lambda_T) * st.norm_in * st.norm_in;
        out.checks.push_back(make_check("unifv", st.stage, st.sup_norm * st.sup_norm,
                                        unifv_rhs, theory));

        const double wt_rhs = cn.k_T * st.norm_in * st.norm_in;
        out.checks.push_back(make_check("wT", st.stage, st.norm_out, wt_rhs, theory));

        cum_log = cn.log_k_T + 2.0 * cum_log;
        const double log_lhs = st.norm_out > 0.0
                                   ? std::log(st.norm_out)
                                   : -std::numeric_limits<double>::infinity();
        CheckResult estim;
        estim.name = "estimvn";
        estim.stage = st.stage;
        estim.asserted = theory;
        estim.lhs = log_lhs;
        estim.rhs = cum_log;
        estim.passed = log_lhs <= cum_log + std::log(kRhsTol);
        estim.slack = cum_log - log_lhs;  // log-margin; positive means it holds
        out.checks.push_back(estim);

        if (theory)
            out.checks.push_back(
                make_check("prop33", st.stage, st.norm_out, st.theory_bound, true));
    }

    out.checks.push_back(make_check(
        "pestimate", 0, report.total_control_norm * report.total_control_norm,
        report.constants.control_bound_sq, theory));

    for (const CheckResult& c : out.checks) {
        out.all_passed = out.all_passed && c.passed;
        if (c.asserted) out.asserted_passed = out.asserted_passed && c.passed;
    }
    return out;
}

ContractionFit contraction_exponents(const std::vector<double>& norm_sequence,
                                     double floor) {
    if (norm_sequence.size() < 3)
        throw DegenerateSequence("need at least three norms to fit contraction");
    for (double x : norm_sequence)
        if (!std::isfinite(x) || x < 0.0)
            throw DegenerateSequence("norm sequence contains non-finite entries");

    if (floor < 0.0) floor = 1e-14 * norm_sequence.front();

    ContractionFit fit;
    std::vector<double> kept;
    for (double x : norm_sequence) {
        if (x == 0.0 || x < floor) {
            fit.floor_reached = true;  // reached exact floor
            break;
        }
        kept.push_back(x);
    }
    fit.excluded_floor = static_cast<int>(norm_sequence.size() - kept.size());
    if (kept.size() < 3)
        throw DegenerateSequence(
            "norm sequence reached exact floor before three usable entries");

    for (size_t i = 1; i < kept.size(); ++i)
        if (kept[i - 1] < 1.0 && kept[i] < 1.0)
            fit.exponents.push_back(std::log(kept[i]) / std::log(kept[i - 1]));

    // least squares on y_i = log(-log x_i) against the stage index
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t i = 0; i < kept.size(); ++i) {
        if (!(kept[i] < 1.0)) continue;
        const double y = std::log(-std::log(kept[i]));
        sx += static_cast<double>(i);
        sy += y;
        sxx += static_cast<double>(i) * i;
        sxy += static_cast<double>(i) * y;
        ++m;
    }
    if (m < 2) throw DegenerateSequence("not enough sub-unit norms for a slope fit");
    const double denom = m * sxx - sx * sx;
    fit.slope = (m * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / m;
    fit.superexponential = fit.slope >= 0.5 * std::log(2.0);
    return fit;
}

SeriesIdentityReport verify_series_identities(int n_max) {
    if (n_max < 1) throw OutOfRange("n_max must be at least 1");
    SeriesIdentityReport rep;
    rep.n_max = n_max;
    rep.exact_ok = true;
    rep.monotone_ok = true;
    rep.remainder_ok = true;

    double prev_sum = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        // exact check of 2^n sum_{j<=n} j^2/2^j == 6(2^n - 1) - n^2 - 4n
        std::int64_t lhs = 0;
        for (int j = 0; j <= n; ++j)
            lhs += static_cast<std::int64_t>(j) * j * (std::int64_t{1} << (n - j));
        const std::int64_t rhs = 6 * ((std::int64_t{1} << n) - 1) -
                                 static_cast<std::int64_t>(n) * n - 4 * n;
        if (lhs != rhs) rep.exact_ok = false;

        const double pow2 = std::pow(2.0, n);
        const double sum = static_cast<double>(rhs) / pow2;
        const double remainder = (static_cast<double>(n) * n + 4.0 * n + 6.0) / pow2;
        if (n > 0 && sum < prev_sum) rep.monotone_ok = false;
        if (std::abs(6.0 - sum - remainder) > 1e-12 * (1.0 + remainder))
            rep.remainder_ok = false;
        prev_sum = sum;
        if (n == n_max) {
            rep.partial_sum = sum;
            rep.remainder = 6.0 - sum;
        }
    }
    return rep;
}

GmBoundReport verify_gm_bound(const SpectralModel& model, double c_bar, double t_min,
                              double t_max, int coarse_points) {
    GmBoundReport rep;
    const double alpha = model.gap_alpha;
    rep.m = c_bar * (1.0 + 1.0 / (alpha * alpha));

    auto grid = [&](int points) {
        std::vector<double> g(points);
        for (int i = 0; i < points; ++i) {
            const double s = static_cast<double>(i) / (points - 1);
            g[i] = t_min * std::pow(t_max / t_min, s);
        }
        return g;
    };

    for (double T : grid(coarse_points))
        rep.c_m = std::max(rep.c_m, T * log_g_m(model, T, rep.m));

    rep.max_excess = -std::numeric_limits<double>::infinity();
    rep.bound_ok = true;
    for (double T : grid(10 * coarse_points)) {
        const double excess = T * log_g_m(model, T, rep.m) - rep.c_m;
        rep.max_excess = std::max(rep.max_excess, excess);
        // G_M <= 1.01 e^{C_M/T}  <=>  T log G_M <= C_M + T log(1.01)
        if (excess > T * std::log(kRhsTol)) rep.bound_ok = false;
    }

    // Inner-sum envelope sum_k lam^{2q} e^{-lam T} <= C_q/T^{2q} + C_{a,q}/T^{1+2q}
    // with the explicit constants from the integral comparison.
    const double q = model.dispersion_q;
    rep.envelope_c_q = 2.0 * std::pow(2.0 * q, 2.0 * q) * std::exp(-2.0 * q);
    rep.envelope_c_alpha_q =
        2.0 * std::tgamma(2.0 * q + 1.0) /
        (alpha * (std::sqrt(model.eigenvalues[1]) + std::sqrt(model.eigenvalues[0])));
    rep.envelope_ok = true;
    for (double T : grid(10 * coarse_points)) {
        const SeriesValue s = dispersion_decay_series(model, T);
        const double total = s.value + (std::isfinite(s.tail) ? s.tail : 0.0);
        const double envelope = rep.envelope_c_q * std::pow(T, -2.0 * q) +
                                rep.envelope_c_alpha_q * std::pow(T, -1.0 - 2.0 * q);
        rep.envelope_c_fit = std::max(
            rep.envelope_c_fit,
            total / (std::pow(T, -2.0 * q) + std::pow(T, -1.0 - 2.0 * q)));
        if (!std::isfinite(s.tail) || total > kRhsTol * envelope) rep.envelope_ok = false;
    }
    return rep;
}

}  // namespace gsc
