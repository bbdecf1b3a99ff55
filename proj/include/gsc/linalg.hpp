#ifndef GSC_LINALG_HPP
#define GSC_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace gsc {

// Dense symmetric matrices are stored row-major as n*n vectors; only small
// systems (N <= 16 modes) appear, so no sparse machinery is warranted.

/// Cholesky factor G = L L^T of a symmetric positive definite matrix.
/// Returns nothing if a pivot is nonpositive or not finite.
template <class R>
std::optional<std::vector<R>> cholesky_factor(const std::vector<R>& a, int n) {
    using std::isfinite;
    using std::sqrt;
    std::vector<R> l(static_cast<size_t>(n) * n, R(0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            R s = a[static_cast<size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                s -= l[static_cast<size_t>(i) * n + k] * l[static_cast<size_t>(j) * n + k];
            if (i == j) {
                if (!(s > R(0)) || !isfinite(static_cast<double>(s))) return std::nullopt;
                l[static_cast<size_t>(i) * n + i] = sqrt(s);
            } else {
                l[static_cast<size_t>(i) * n + j] = s / l[static_cast<size_t>(j) * n + j];
            }
        }
    }
    return l;
}

/// Solves L y = b in place (forward substitution only).
template <class R>
void cholesky_forward(const std::vector<R>& l, int n, std::vector<R>& b) {
    for (int i = 0; i < n; ++i) {
        R s = b[i];
        for (int k = 0; k < i; ++k) s -= l[static_cast<size_t>(i) * n + k] * b[k];
        b[i] = s / l[static_cast<size_t>(i) * n + i];
    }
}

/// Solves L L^T x = b in place.
template <class R>
void cholesky_solve(const std::vector<R>& l, int n, std::vector<R>& b) {
    cholesky_forward(l, n, b);
    for (int i = n - 1; i >= 0; --i) {
        R s = b[i];
        for (int k = i + 1; k < n; ++k) s -= l[static_cast<size_t>(k) * n + i] * b[k];
        b[i] = s / l[static_cast<size_t>(i) * n + i];
    }
}

/// (max_i L_ii / min_i L_ii)^2 -- a cheap lower bound on the 2-norm condition
/// number that is exactly nondecreasing under leading-principal extension.
template <class R>
double cholesky_condition_estimate(const std::vector<R>& l, int n) {
    R lo = l[0], hi = l[0];
    for (int i = 1; i < n; ++i) {
        const R d = l[static_cast<size_t>(i) * n + i];
        if (d < lo) lo = d;
        if (d > hi) hi = d;
    }
    const double r = static_cast<double>(hi / lo);
    return r * r;
}

inline double kahan_sum(std::span<const double> xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

inline double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

/// Spectral norm of a symmetric matrix by power iteration.
double spectral_norm_sym(const std::vector<double>& a, int n);

}  // namespace gsc

#endif
