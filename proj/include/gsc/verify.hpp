#ifndef GSC_VERIFY_HPP
#define GSC_VERIFY_HPP

#include <string>
#include <vector>

#include "gsc/control.hpp"

namespace gsc {

struct CheckResult {
    std::string name;
    int stage = 0;  // 0 for run-level checks
    bool passed = false;
    bool asserted = false;  // enforced in theory mode, informative otherwise
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // 1 - lhs/rhs (relative margin before the tolerance)
};

struct EstimateChecks {
    std::vector<CheckResult> checks;
    bool all_passed = true;           // over every check
    bool asserted_passed = true;      // over asserted checks only
};

/// Re-derives every per-stage inequality from the recorded run data: the
/// control bound, the gate, the uniform bound on sup||v||, the quadratic
/// contraction bound, the cumulative product bound, and the total control
/// norm bound. Inequalities carry a 1% multiplicative tolerance on the
/// right-hand side.
EstimateChecks verify_run(const RunReport& report, const SpectralModel& model,
                          const ConstantsConfig& cfg = {});

struct ContractionFit {
    std::vector<double> exponents;  // log||v_n|| / log||v_{n-1}||
    double slope = 0.0;             // least-squares slope of log(-log||v_n||) vs n
    double intercept = 0.0;
    bool superexponential = false;  // slope >= 0.5 log 2
    int excluded_floor = 0;         // trailing entries treated as exact floor
    bool floor_reached = false;
};

/// Fits the doubling-exponent signature of quadratic contraction. Entries
/// below the floor (default 1e-14 x first entry) are excluded; zeros are
/// reported as reaching the exact floor. Throws DegenerateSequence.
ContractionFit contraction_exponents(const std::vector<double>& norm_sequence,
                                     double floor = -1.0);

struct SeriesIdentityReport {
    int n_max = 0;
    bool exact_ok = false;      // sum_{j<=n} j^2 2^{n-j} == 6(2^n - 1) - n^2 - 4n
    bool monotone_ok = false;   // partial sums increase toward 6
    bool remainder_ok = false;  // 6 - S_n <= (n^2 + 4n + 6)/2^n
    double partial_sum = 0.0;   // S_{n_max}
    double remainder = 0.0;     // 6 - S_{n_max}
};

/// Exact integer verification of the finite identity for n <= n_max plus the
/// limit diagnostics of the Basel-type control sum.
SeriesIdentityReport verify_series_identities(int n_max);

struct GmBoundReport {
    double m = 0.0;
    double c_m = 0.0;           // max over the coarse grid of T log G_M(T)
    bool bound_ok = false;      // G_M(T) <= 1.01 e^{C_M/T} on the 10x finer grid
    double max_excess = 0.0;    // max of T log G_M - C_M over the fine grid
    double envelope_c_q = 0.0;  // 2 (2q)^{2q} e^{-2q}
    double envelope_c_alpha_q = 0.0;  // 2 Gamma(2q+1) / (alpha (sqrt(l2)+sqrt(l1)))
    double envelope_c_fit = 0.0;      // fitted sup of S(T) / (T^{-2q} + T^{-1-2q})
    bool envelope_ok = false;
};

GmBoundReport verify_gm_bound(const SpectralModel& model, double c_bar = 1.0,
                              double t_min = 1e-2, double t_max = 1.0,
                              int coarse_points = 81);

}  // namespace gsc

#endif
