#ifndef GSC_MOMENT_HPP
#define GSC_MOMENT_HPP

#include <memory>
#include <vector>

namespace gsc {

/// Significand widths of the solver ladder. Gram matrices of exponential
/// families are Cauchy-like and catastrophically ill-conditioned; precision,
/// not pivoting, is the remedy.
enum class Precision : int { F64 = 53, F128 = 113, F256 = 237 };

struct GramMatrix {
    std::vector<double> exponents;  // mu_1..mu_N ascending, mu_1 >= 0
    double horizon = 0.0;           // T
    std::vector<double> entries;    // row-major; (1 - e^{-(mu_i+mu_j)T})/(mu_i+mu_j)
    double condition_estimate = 0.0;
    int precision_bits = 53;

    int size() const { return static_cast<int>(exponents.size()); }
    double at(int i, int j) const {  // 1-indexed
        return entries[static_cast<size_t>(i - 1) * exponents.size() + (j - 1)];
    }
};

/// Entries as defined above (entry = T when mu_i + mu_j = 0); condition
/// estimate from Cholesky diagnostics. Throws NotPositiveDefinite if the
/// factorization fails at the working precision.
GramMatrix gram_matrix(const std::vector<double>& exponents, double T,
                       Precision working = Precision::F64);

struct PrecisionConfig {
    double residual_tol = 1e-8;
    Precision max_precision = Precision::F256;
};

namespace detail {
struct BasisImpl;
struct SignalImpl;
}

struct MomentResidual {
    int n = 0;
    std::vector<double> entries;  // residual(k,j) = int sigma_k e^{mu_j t} dt - delta_kj
    double max_abs = 0.0;
};

/// Minimal-L2-norm truncated family {sigma_k} biorthogonal to {e^{mu_k t}}
/// on [0,T], represented as sigma_k(t) = sum_j C(k,j) e^{mu_j (t-T)} so that
/// every evaluated exponential stays <= 1. Coefficients are held at the
/// precision the ladder settled on.
struct BiorthogonalBasis {
    std::vector<double> exponents;
    double horizon = 0.0;
    double max_residual = 0.0;
    int precision_bits = 53;
    std::shared_ptr<const detail::BasisImpl> impl;

    int size() const { return static_cast<int>(exponents.size()); }
    double coefficient(int k, int j) const;  // 1-indexed, rounded to double
};

/// Solves Gram * c_k = e^{-mu_k T} e_k, escalating double -> 128 -> 256 bit
/// until the moment residual certifies below cfg.residual_tol. Throws
/// ResidualTooLarge or NotPositiveDefinite.
BiorthogonalBasis biorthogonal_family(const std::vector<double>& exponents, double T,
                                      const PrecisionConfig& cfg = {});

/// Wraps an explicit coefficient matrix (row-major) without enforcing the
/// residual invariant; the residual is still computed and reported.
BiorthogonalBasis basis_from_coefficients(const std::vector<double>& exponents, double T,
                                          const std::vector<double>& coefficients);

/// Residual matrix computed analytically through the Gram entries at one
/// precision rung above the stored coefficients.
MomentResidual moment_residual(const BiorthogonalBasis& basis);

/// sigma_k(t) with compensated summation at the basis precision.
double eval_sigma(const BiorthogonalBasis& basis, int k, double t);

/// || sum_k d_k sigma_k ||^2_{L2(0,T)} = sum_{k,l} d_k d_l e^{-(mu_k+mu_l)T}
/// (Gram^{-1})(k,l), evaluated through the stored factorization.
double control_norm_sq(const BiorthogonalBasis& basis, const std::vector<double>& weights);

/// A collapsed signal sum_k d_k sigma_k(t) = sum_j w_j e^{mu_j (t-T)}; cheap
/// to evaluate repeatedly inside the integrator.
struct ControlSignal {
    std::vector<double> exponents;
    double horizon = 0.0;
    double l2_norm = 0.0;
    std::shared_ptr<const detail::SignalImpl> impl;

    double operator()(double t) const;
};

ControlSignal combine(const BiorthogonalBasis& basis, const std::vector<double>& weights);

/// combine with weights numer_k / denom_k divided at the basis precision, so
/// that nulling is exact up to the moment residual rather than the double
/// rounding of the ratio.
ControlSignal combine_ratios(const BiorthogonalBasis& basis,
                             const std::vector<double>& numer,
                             const std::vector<double>& denom);

/// int_0^t e^{-decay (t-s)} p(s) ds in closed form (the removable
/// decay + mu_j = 0 case is handled by its limit).
double duhamel_convolution(const ControlSignal& p, double decay, double t);

/// e^{-decay_k t} v0_k - bcol_k int_0^t e^{-decay_k (t-s)} p(s) ds for every
/// mode, assembled at the signal's working precision so the cancellation at
/// a nulling time is resolved down to the moment residual.
std::vector<double> linearized_state(const ControlSignal& p,
                                     const std::vector<double>& decay,
                                     const std::vector<double>& v0,
                                     const std::vector<double>& bcol, double t);

}  // namespace gsc

#endif
