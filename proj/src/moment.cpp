#include "gsc/moment.hpp"

#include <cmath>
#include <sstream>
#include <variant>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "gsc/errors.hpp"
#include "gsc/linalg.hpp"

namespace gsc {

namespace mp = boost::multiprecision;
using f128 = mp::cpp_bin_float_quad;
using f256 = mp::number<mp::cpp_bin_float<237, mp::digit_base_2>>;

namespace {

template <class R>
R rexp(const R& x) {
    using std::exp;
    return exp(x);
}

/// (e^y - 1)/y, series for small |y|.
template <class R>
R em1_over(const R& y) {
    using std::abs;
    if (abs(y) > R(0.5)) return (rexp(y) - R(1)) / y;
    R term(1), sum(1);
    for (int m = 2; m < 400; ++m) {
        term *= y / R(m);
        sum += term;
        if (abs(term) < abs(sum) * std::numeric_limits<R>::epsilon()) break;
    }
    return sum;
}

/// Gram entry (1 - e^{-x T}) / x with the exact limit T at x = 0.
template <class R>
R gram_entry(const R& x, const R& T) {
    if (x == R(0)) return T;
    return T * em1_over(-x * T);
}

template <class R>
std::vector<R> gram_entries(const std::vector<R>& mu, const R& T) {
    const int n = static_cast<int>(mu.size());
    std::vector<R> g(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            const R e = gram_entry(mu[i] + mu[j], T);
            g[static_cast<size_t>(i) * n + j] = e;
            g[static_cast<size_t>(j) * n + i] = e;
        }
    return g;
}

template <class R>
std::vector<R> upcast(const std::vector<double>& xs) {
    std::vector<R> r(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) r[i] = R(xs[i]);
    return r;
}

template <class R>
struct Store {
    int n = 0;
    std::vector<R> mu;
    R horizon{};
    std::vector<R> coeffs;  // row k holds sigma_k
    std::vector<R> chol;    // Cholesky factor of the Gram matrix
};

/// Solves for the coefficient rows at precision R. Returns nothing when the
/// factorization fails.
template <class R>
std::optional<Store<R>> solve_family(const std::vector<double>& exponents, double T) {
    Store<R> s;
    s.n = static_cast<int>(exponents.size());
    s.mu = upcast<R>(exponents);
    s.horizon = R(T);
    const std::vector<R> g = gram_entries(s.mu, s.horizon);
    auto chol = cholesky_factor(g, s.n);
    if (!chol) return std::nullopt;
    s.chol = std::move(*chol);
    s.coeffs.assign(static_cast<size_t>(s.n) * s.n, R(0));
    std::vector<R> rhs(s.n);
    for (int k = 0; k < s.n; ++k) {
        for (int j = 0; j < s.n; ++j) rhs[j] = R(0);
        rhs[k] = rexp(R(-s.mu[k] * s.horizon));
        cholesky_solve(s.chol, s.n, rhs);
        for (int j = 0; j < s.n; ++j) s.coeffs[static_cast<size_t>(k) * s.n + j] = rhs[j];
    }
    return s;
}

/// Residual of the stored coefficients evaluated at precision Q >= R:
/// residual(k,j) = e^{mu_j T} (G c_k)_j - delta_kj.
template <class Q, class R>
MomentResidual residual_at(const Store<R>& s) {
    MomentResidual res;
    res.n = s.n;
    res.entries.assign(static_cast<size_t>(s.n) * s.n, 0.0);
    std::vector<Q> mu(s.n), c(s.n);
    for (int i = 0; i < s.n; ++i) mu[i] = Q(s.mu[i]);
    const Q T = Q(s.horizon);
    const std::vector<Q> g = gram_entries(mu, T);
    for (int k = 0; k < s.n; ++k) {
        for (int i = 0; i < s.n; ++i) c[i] = Q(s.coeffs[static_cast<size_t>(k) * s.n + i]);
        for (int j = 0; j < s.n; ++j) {
            Q dot(0);
            for (int i = 0; i < s.n; ++i) dot += g[static_cast<size_t>(j) * s.n + i] * c[i];
            Q r = rexp(mu[j] * T) * dot - (j == k ? Q(1) : Q(0));
            const double rd = static_cast<double>(r);
            res.entries[static_cast<size_t>(k) * s.n + j] = rd;
            res.max_abs = std::max(res.max_abs, std::abs(rd));
        }
    }
    return res;
}

template <class R>
double sigma_value(const Store<R>& s, int k, double t) {
    const R rt = R(t);
    R sum(0), comp(0);
    for (int j = 0; j < s.n; ++j) {
        const R term = s.coeffs[static_cast<size_t>(k - 1) * s.n + j] *
                       rexp(s.mu[j] * (rt - s.horizon));
        const R y = term - comp;
        const R tmp = sum + y;
        comp = (tmp - sum) - y;
        sum = tmp;
    }
    return static_cast<double>(sum);
}

template <class R>
double norm_sq_of(const Store<R>& s, const std::vector<R>& d) {
    // s^T G^{-1} s = ||L^{-1} s||^2, which stays nonnegative in floating point
    std::vector<R> z(s.n);
    for (int k = 0; k < s.n; ++k) z[k] = d[k] * rexp(-s.mu[k] * s.horizon);
    cholesky_forward(s.chol, s.n, z);
    R acc(0);
    for (int k = 0; k < s.n; ++k) acc += z[k] * z[k];
    return static_cast<double>(acc);
}

template <class R>
struct SigStore {
    int n = 0;
    std::vector<R> mu;
    R horizon{};
    std::vector<R> w;
};

template <class R>
std::vector<R> collapse_weights(const Store<R>& s, const std::vector<R>& d) {
    std::vector<R> w(s.n, R(0));
    for (int j = 0; j < s.n; ++j) {
        R acc(0);
        for (int k = 0; k < s.n; ++k)
            acc += d[k] * s.coeffs[static_cast<size_t>(k) * s.n + j];
        w[j] = acc;
    }
    return w;
}

template <class Q, class R>
SigStore<Q> make_sig_store(const std::vector<double>& mu, double T,
                           const std::vector<R>& w) {
    SigStore<Q> sig;
    sig.n = static_cast<int>(mu.size());
    sig.mu = upcast<Q>(mu);
    sig.horizon = Q(T);
    sig.w.resize(w.size());
    for (size_t j = 0; j < w.size(); ++j) sig.w[j] = static_cast<Q>(w[j]);
    return sig;
}

template <class R>
double signal_value(const SigStore<R>& s, double t) {
    const R rt = R(t);
    R sum(0);
    for (int j = 0; j < s.n; ++j) sum += s.w[j] * rexp(s.mu[j] * (rt - s.horizon));
    return static_cast<double>(sum);
}

/// sum_j w_j e^{-mu_j T - a t} t em1((a + mu_j) t); all exponents <= 0.
template <class R>
R signal_convolution_r(const SigStore<R>& s, const R& a, const R& rt) {
    R sum(0);
    for (int j = 0; j < s.n; ++j) {
        const R conv = rexp(-s.mu[j] * s.horizon - a * rt) * rt * em1_over((a + s.mu[j]) * rt);
        sum += s.w[j] * conv;
    }
    return sum;
}

template <class R>
double signal_convolution(const SigStore<R>& s, double decay, double t) {
    return static_cast<double>(signal_convolution_r(s, R(decay), R(t)));
}

}  // namespace

namespace detail {

struct BasisImpl {
    std::variant<Store<double>, Store<f128>, Store<f256>> store;
};

// Point evaluation inside the integrator only needs the significand to cover
// the coefficient cancellation down to double accuracy of the value, so a
// cheaper rounded copy sits next to the full-precision weights used by the
// closed-form convolutions.
struct SignalImpl {
    std::variant<SigStore<double>, SigStore<f128>, SigStore<f256>> fast;
    std::variant<SigStore<double>, SigStore<f128>, SigStore<f256>> exact;
};

}  // namespace detail

GramMatrix gram_matrix(const std::vector<double>& exponents, double T, Precision working) {
    if (exponents.empty()) throw OutOfRange("gram_matrix needs at least one exponent");
    if (!(T > 0.0)) throw OutOfRange("gram_matrix horizon must be positive");
    for (size_t i = 0; i < exponents.size(); ++i) {
        if (exponents[i] < 0.0)
            throw OutOfRange("gram_matrix exponents must be nonnegative");
        if (i > 0 && !(exponents[i - 1] < exponents[i]))
            throw OutOfRange("gram_matrix exponents must be ascending");
    }
    GramMatrix g;
    g.exponents = exponents;
    g.horizon = T;
    g.precision_bits = static_cast<int>(working);
    const int n = static_cast<int>(exponents.size());

    auto fill = [&](auto tag) {
        using R = decltype(tag);
        const std::vector<R> mu = upcast<R>(exponents);
        const std::vector<R> entries = gram_entries(mu, R(T));
        g.entries.resize(entries.size());
        for (size_t i = 0; i < entries.size(); ++i)
            g.entries[i] = static_cast<double>(entries[i]);
        auto chol = cholesky_factor(entries, n);
        if (!chol)
            throw NotPositiveDefinite(
                "Gram matrix is not positive definite at working precision "
                "(N or T out of numerical range)");
        g.condition_estimate = cholesky_condition_estimate(*chol, n);
    };
    switch (working) {
        case Precision::F64: fill(double{}); break;
        case Precision::F128: fill(f128{}); break;
        case Precision::F256: fill(f256{}); break;
    }
    return g;
}

double BiorthogonalBasis::coefficient(int k, int j) const {
    if (k < 1 || k > size() || j < 1 || j > size())
        throw OutOfRange("coefficient index out of range");
    return std::visit(
        [&](const auto& s) {
            return static_cast<double>(
                s.coeffs[static_cast<size_t>(k - 1) * s.n + (j - 1)]);
        },
        impl->store);
}

BiorthogonalBasis biorthogonal_family(const std::vector<double>& exponents, double T,
                                      const PrecisionConfig& cfg) {
    if (exponents.empty()) throw OutOfRange("need at least one exponent");
    if (!(T > 0.0)) throw OutOfRange("horizon must be positive");

    BiorthogonalBasis b;
    b.exponents = exponents;
    b.horizon = T;

    bool factored_somewhere = false;
    double best_residual = std::numeric_limits<double>::infinity();

    auto attempt = [&](auto tag, auto eval_tag, Precision bits) -> bool {
        using R = decltype(tag);
        using Q = decltype(eval_tag);
        auto store = solve_family<R>(exponents, T);
        if (!store) return false;
        factored_somewhere = true;
        const MomentResidual res = residual_at<Q>(*store);
        best_residual = std::min(best_residual, res.max_abs);
        if (res.max_abs <= cfg.residual_tol) {
            b.max_residual = res.max_abs;
            b.precision_bits = static_cast<int>(bits);
            b.impl = std::make_shared<const detail::BasisImpl>(
                detail::BasisImpl{std::move(*store)});
            return true;
        }
        return false;
    };

    if (attempt(double{}, f128{}, Precision::F64)) return b;
    if (cfg.max_precision >= Precision::F128 && attempt(f128{}, f256{}, Precision::F128))
        return b;
    if (cfg.max_precision >= Precision::F256 && attempt(f256{}, f256{}, Precision::F256))
        return b;

    if (!factored_somewhere)
        throw NotPositiveDefinite(
            "Gram matrix not factorizable at any allowed precision");
    std::ostringstream os;
    os << "moment residual " << best_residual << " exceeds tolerance "
       << cfg.residual_tol << " at maximum precision; reduce N or adjust T";
    throw ResidualTooLarge(os.str());
}

BiorthogonalBasis basis_from_coefficients(const std::vector<double>& exponents, double T,
                                          const std::vector<double>& coefficients) {
    const int n = static_cast<int>(exponents.size());
    if (coefficients.size() != static_cast<size_t>(n) * n)
        throw OutOfRange("coefficient matrix must be N x N");
    Store<double> s;
    s.n = n;
    s.mu = exponents;
    s.horizon = T;
    s.coeffs = coefficients;
    const std::vector<double> g = gram_entries(s.mu, s.horizon);
    if (auto chol = cholesky_factor(g, n)) s.chol = std::move(*chol);

    BiorthogonalBasis b;
    b.exponents = exponents;
    b.horizon = T;
    b.precision_bits = static_cast<int>(Precision::F64);
    b.impl = std::make_shared<const detail::BasisImpl>(detail::BasisImpl{std::move(s)});
    b.max_residual = moment_residual(b).max_abs;
    return b;
}

MomentResidual moment_residual(const BiorthogonalBasis& basis) {
    return std::visit(
        [](const auto& s) -> MomentResidual {
            using R = std::decay_t<decltype(s.horizon)>;
            if constexpr (std::is_same_v<R, double>) return residual_at<f128>(s);
            else if constexpr (std::is_same_v<R, f128>) return residual_at<f256>(s);
            else return residual_at<f256>(s);
        },
        basis.impl->store);
}

double eval_sigma(const BiorthogonalBasis& basis, int k, double t) {
    if (k < 1 || k > basis.size()) throw OutOfRange("sigma index out of range");
    const double slack = 1e-9 * (1.0 + basis.horizon);
    if (t < -slack || t > basis.horizon + slack)
        throw OutOfRange("sigma evaluated outside [0, T]");
    t = std::clamp(t, 0.0, basis.horizon);
    return std::visit([&](const auto& s) { return sigma_value(s, k, t); },
                      basis.impl->store);
}

namespace {

/// Builds the collapsed signal for weights already lifted to the store's
/// precision. Evaluation precision is set by the cancellation in the
/// collapsed sum: coefficients of magnitude sum_abs cancel down to values of
/// order ||p|| / sqrt(T), so the significand must cover the ratio plus
/// double headroom.
template <class R>
ControlSignal finish_signal(const BiorthogonalBasis& basis, const Store<R>& s,
                            const std::vector<R>& d) {
    ControlSignal sig;
    sig.exponents = basis.exponents;
    sig.horizon = basis.horizon;
    if (s.chol.empty())
        throw NotPositiveDefinite("basis carries no Gram factorization");
    const double nsq = norm_sq_of(s, d);
    sig.l2_norm = nsq > 0.0 ? std::sqrt(nsq) : 0.0;

    const std::vector<R> w = collapse_weights(s, d);
    double sum_abs = 0.0;
    for (const auto& wj : w) sum_abs += std::abs(static_cast<double>(wj));
    const double scale = sig.l2_norm / std::sqrt(basis.horizon) + 1e-300;
    const double ratio = sum_abs / scale;
    const int bits =
        53 + 10 + (ratio > 1.0 ? static_cast<int>(std::ceil(std::log2(ratio))) : 0);
    detail::SignalImpl impl;
    impl.exact = make_sig_store<R>(basis.exponents, basis.horizon, w);
    if (bits <= 53)
        impl.fast = make_sig_store<double>(basis.exponents, basis.horizon, w);
    else if (bits <= 113)
        impl.fast = make_sig_store<f128>(basis.exponents, basis.horizon, w);
    else
        impl.fast = make_sig_store<f256>(basis.exponents, basis.horizon, w);
    sig.impl = std::make_shared<const detail::SignalImpl>(std::move(impl));
    return sig;
}

}  // namespace

double control_norm_sq(const BiorthogonalBasis& basis, const std::vector<double>& weights) {
    if (weights.size() != basis.exponents.size())
        throw OutOfRange("weight count must match basis size");
    return std::visit(
        [&](const auto& s) {
            using R = std::decay_t<decltype(s.horizon)>;
            if (s.chol.empty())
                throw NotPositiveDefinite("basis carries no Gram factorization");
            return norm_sq_of(s, upcast<R>(weights));
        },
        basis.impl->store);
}

ControlSignal combine(const BiorthogonalBasis& basis, const std::vector<double>& weights) {
    if (weights.size() != basis.exponents.size())
        throw OutOfRange("weight count must match basis size");
    return std::visit(
        [&](const auto& s) {
            using R = std::decay_t<decltype(s.horizon)>;
            return finish_signal(basis, s, upcast<R>(weights));
        },
        basis.impl->store);
}

ControlSignal combine_ratios(const BiorthogonalBasis& basis,
                             const std::vector<double>& numer,
                             const std::vector<double>& denom) {
    if (numer.size() != basis.exponents.size() || denom.size() != numer.size())
        throw OutOfRange("weight count must match basis size");
    return std::visit(
        [&](const auto& s) {
            using R = std::decay_t<decltype(s.horizon)>;
            std::vector<R> d(numer.size());
            for (size_t k = 0; k < numer.size(); ++k) d[k] = R(numer[k]) / R(denom[k]);
            return finish_signal(basis, s, d);
        },
        basis.impl->store);
}

double ControlSignal::operator()(double t) const {
    t = std::clamp(t, 0.0, horizon);
    return std::visit([&](const auto& s) { return signal_value(s, t); }, impl->fast);
}

double duhamel_convolution(const ControlSignal& p, double decay, double t) {
    t = std::clamp(t, 0.0, p.horizon);
    return std::visit([&](const auto& s) { return signal_convolution(s, decay, t); },
                      p.impl->exact);
}

std::vector<double> linearized_state(const ControlSignal& p,
                                     const std::vector<double>& decay,
                                     const std::vector<double>& v0,
                                     const std::vector<double>& bcol, double t) {
    if (decay.size() != v0.size() || decay.size() != bcol.size())
        throw OutOfRange("linearized_state arguments must agree in size");
    t = std::clamp(t, 0.0, p.horizon);
    std::vector<double> out(decay.size());
    std::visit(
        [&](const auto& s) {
            using R = std::decay_t<decltype(s.horizon)>;
            const R rt = R(t);
            for (size_t k = 0; k < decay.size(); ++k) {
                const R a = R(decay[k]);
                const R v = rexp(-a * rt) * R(v0[k]) -
                            R(bcol[k]) * signal_convolution_r(s, a, rt);
                out[k] = static_cast<double>(v);
            }
        },
        p.impl->exact);
    return out;
}

}  // namespace gsc
