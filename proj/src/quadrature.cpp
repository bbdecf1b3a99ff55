#include "gsc/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "gsc/errors.hpp"
#include "gsc/linalg.hpp"

namespace gsc {

static GaussLegendreRule compute_rule(int n) {
    GaussLegendreRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    // Newton iteration on P_n, symmetric roots.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        r.weights[n - 1 - i] = r.weights[i];
    }
    return r;
}

const GaussLegendreRule& gauss_legendre(int n) {
    static std::map<int, GaussLegendreRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

static double panel(const std::function<double(double)>& f, double a, double b,
                    const GaussLegendreRule& r) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    std::vector<double> terms(r.nodes.size());
    for (size_t i = 0; i < r.nodes.size(); ++i)
        terms[i] = r.weights[i] * f(mid + half * r.nodes[i]);
    return half * kahan_sum(terms);
}

static double refine(const std::function<double(double)>& f, double a, double b,
                     double whole, const GaussLegendreRule& r, double tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = panel(f, a, mid, r);
    const double right = panel(f, mid, b, r);
    const double split = left + right;
    if (std::abs(split - whole) < tol) return split;
    if (depth <= 0)
        throw QuadratureFailure("coupling integral did not converge to tolerance");
    return refine(f, a, mid, left, r, 0.5 * tol, depth - 1) +
           refine(f, mid, b, right, r, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& cfg) {
    const GaussLegendreRule& r = gauss_legendre(cfg.nodes);
    return refine(f, a, b, panel(f, a, b, r), r, cfg.tol, cfg.max_depth);
}

double spectral_norm_sym(const std::vector<double>& a, int n) {
    std::vector<double> v(n), w(n);
    for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * i;  // avoid symmetry traps
    double nv = norm2(v);
    for (double& x : v) x /= nv;
    double lambda = 0.0;
    for (int it = 0; it < 300; ++it) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += a[static_cast<size_t>(i) * n + j] * v[j];
            w[i] = s;
        }
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += v[i] * w[i];
        for (int i = 0; i < n; ++i) v[i] = w[i] / nw;
        if (it > 4 && std::abs(nw - std::abs(lambda)) < 1e-14 * nw) return nw;
        lambda = dot;
    }
    return std::abs(lambda);
}

}  // namespace gsc
