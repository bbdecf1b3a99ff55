#ifndef GSC_QUADRATURE_HPP
#define GSC_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace gsc {

struct QuadratureConfig {
    int nodes = 16;        // Gauss-Legendre nodes per panel
    double tol = 1e-12;    // refinement tolerance between bisection levels
    int max_depth = 28;
};

struct GaussLegendreRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Nodes and weights computed by Newton iteration on P_n; cached per order.
const GaussLegendreRule& gauss_legendre(int n);

/// Adaptive Gauss-Legendre with interval bisection; panels are split until
/// the refined value changes by less than cfg.tol. Throws QuadratureFailure
/// when max_depth is exhausted before reaching tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& cfg = {});

}  // namespace gsc

#endif
