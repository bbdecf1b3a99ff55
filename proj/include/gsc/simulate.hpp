#ifndef GSC_SIMULATE_HPP
#define GSC_SIMULATE_HPP

#include <functional>
#include <utility>
#include <vector>

#include "gsc/moment.hpp"
#include "gsc/spectral.hpp"

namespace gsc {

struct Trajectory {
    std::vector<double> times;                 // strictly increasing
    std::vector<std::vector<double>> states;   // modal coefficients per sample
    std::vector<double> norms;                 // Euclidean norms of states
    std::vector<double> control_values;
    std::vector<double> step_errors;           // local error estimate of the covering step
    double sup_norm = 0.0;

    const std::vector<double>& final_state() const { return states.back(); }
    double final_norm() const { return norms.back(); }
};

struct SimulateOptions {
    double tol = 1e-10;     // step-doubling local error tolerance (relative)
    int samples = 32;       // interior samples recorded per call
};

using Control = std::function<double(double)>;

/// Affine term f(t) = coefficient(t) * direction; a null coefficient reuses
/// the control value p(t), which covers the deviation system
/// v' + Av + pBv + pB phi_1 = 0 without evaluating the signal twice.
struct Forcing {
    Control coefficient;
    std::vector<double> direction;
};

/// Integrates x_k' = -mu_k x_k - p(t) (C x)_k - f_k(t) over [t0, t1] with the
/// stiff diagonal handled exactly per substep and the coupled term by an
/// embedded fourth-order exponential rule under step-doubling control.
/// Throws ToleranceUnreachable on step-size underflow.
Trajectory simulate_bilinear(const SpectralModel& model, const std::vector<double>& state0,
                             const Control& p, double t0, double t1,
                             const SimulateOptions& opts = {},
                             const Forcing* forcing = nullptr);

/// Linearized dynamics v_k' = -mu_k v_k - p(t) coupling(k,1); the Duhamel
/// integral is evaluated in closed form for stage controls.
Trajectory simulate_linearized(const SpectralModel& model, const std::vector<double>& v0,
                               const ControlSignal& p, const SimulateOptions& opts = {});

/// Same dynamics with an arbitrary control, Duhamel by adaptive quadrature.
Trajectory simulate_linearized_numeric(const SpectralModel& model,
                                       const std::vector<double>& v0, const Control& p,
                                       double T, const SimulateOptions& opts = {});

/// Componentwise e^{-mu_k dt} scaling (exact free decay).
std::vector<double> propagate_free(const SpectralModel& model,
                                   const std::vector<double>& state, double dt);

/// Replaces eigenvalues by mu_k = lambda_k - lambda_1 and returns lambda_1
/// for the inverse map u(t) = e^{-lambda_1 t} z(t).
std::pair<SpectralModel, double> shift_spectrum(const SpectralModel& model);

/// Low-level core: x' = -decay (.) x + g(t, x). Exposed for property checks
/// that integrate coupled systems outside the bilinear form.
using NonstiffRhs =
    std::function<void(double, const std::vector<double>&, std::vector<double>&)>;
Trajectory integrate_exponential(const std::vector<double>& decay, const NonstiffRhs& g,
                                 const std::vector<double>& x0, double t0, double t1,
                                 const SimulateOptions& opts,
                                 const Control* sampled_control = nullptr);

}  // namespace gsc

#endif
