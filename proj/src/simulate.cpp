#include "gsc/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "gsc/errors.hpp"
#include "gsc/linalg.hpp"
#include "gsc/quadrature.hpp"

namespace gsc {

namespace {

double phi1(double z) {
    if (std::abs(z) < 0.5) {
        double term = 1.0, sum = 1.0;
        for (int m = 2; m < 30; ++m) {
            term *= z / m;
            sum += term;
            if (std::abs(term) < 1e-20) break;
        }
        return sum;
    }
    return std::expm1(z) / z;
}

double phi2(double z) {
    if (std::abs(z) < 0.5) {
        double term = 0.5, sum = 0.5;  // 1/2 + z/6 + z^2/24 + ...
        for (int m = 3; m < 32; ++m) {
            term *= z / m;
            sum += term;
            if (std::abs(term) < 1e-20) break;
        }
        return sum;
    }
    return (std::expm1(z) - z) / (z * z);
}

double phi3(double z) {
    if (std::abs(z) < 0.5) {
        double term = 1.0 / 6.0, sum = 1.0 / 6.0;
        for (int m = 4; m < 34; ++m) {
            term *= z / m;
            sum += term;
            if (std::abs(term) < 1e-20) break;
        }
        return sum;
    }
    return (std::expm1(z) - z - 0.5 * z * z) / (z * z * z);
}

// Per-component tableau for one step size h of the fourth-order exponential
// Runge-Kutta scheme (Cox-Matthews coefficients in phi form).
struct EtdTableau {
    std::vector<double> e_full, e_half, q_half, b1, b23, b4;

    void build(const std::vector<double>& decay, double h) {
        const size_t n = decay.size();
        e_full.resize(n);
        e_half.resize(n);
        q_half.resize(n);
        b1.resize(n);
        b23.resize(n);
        b4.resize(n);
        for (size_t i = 0; i < n; ++i) {
            const double z = -decay[i] * h;
            e_full[i] = std::exp(z);
            e_half[i] = std::exp(0.5 * z);
            q_half[i] = 0.5 * h * phi1(0.5 * z);
            const double p1 = phi1(z), p2 = phi2(z), p3 = phi3(z);
            b1[i] = h * (p1 - 3.0 * p2 + 4.0 * p3);
            b23[i] = h * (2.0 * p2 - 4.0 * p3);
            b4[i] = h * (4.0 * p3 - p2);
        }
    }
};

struct Integrator {
    const std::vector<double>& decay;
    const NonstiffRhs& g;
    int n;
    std::vector<double> n1, n2, n3, n4, sa, sb, sc;
    EtdTableau tab;

    explicit Integrator(const std::vector<double>& d, const NonstiffRhs& rhs)
        : decay(d), g(rhs), n(static_cast<int>(d.size())) {
        n1.resize(n); n2.resize(n); n3.resize(n); n4.resize(n);
        sa.resize(n); sb.resize(n); sc.resize(n);
    }

    void step(double t, const std::vector<double>& x, double h, std::vector<double>& out) {
        tab.build(decay, h);
        g(t, x, n1);
        for (int i = 0; i < n; ++i) sa[i] = tab.e_half[i] * x[i] + tab.q_half[i] * n1[i];
        g(t + 0.5 * h, sa, n2);
        for (int i = 0; i < n; ++i) sb[i] = tab.e_half[i] * x[i] + tab.q_half[i] * n2[i];
        g(t + 0.5 * h, sb, n3);
        for (int i = 0; i < n; ++i)
            sc[i] = tab.e_half[i] * sa[i] + tab.q_half[i] * (2.0 * n3[i] - n1[i]);
        g(t + h, sc, n4);
        out.resize(n);
        for (int i = 0; i < n; ++i)
            out[i] = tab.e_full[i] * x[i] + tab.b1[i] * n1[i] +
                     tab.b23[i] * (n2[i] + n3[i]) + tab.b4[i] * n4[i];
    }
};

}  // namespace

Trajectory integrate_exponential(const std::vector<double>& decay, const NonstiffRhs& g,
                                 const std::vector<double>& x0, double t0, double t1,
                                 const SimulateOptions& opts, const Control* sampled_control) {
    if (x0.size() != decay.size()) throw OutOfRange("state size does not match system");
    if (!(t1 >= t0)) throw OutOfRange("simulation interval is reversed");

    Trajectory traj;
    auto record = [&](double t, const std::vector<double>& x, double err) {
        if (!traj.times.empty() && t <= traj.times.back()) return;
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.norms.push_back(norm2(x));
        traj.control_values.push_back(sampled_control ? (*sampled_control)(t) : 0.0);
        traj.step_errors.push_back(err);
        traj.sup_norm = std::max(traj.sup_norm, traj.norms.back());
    };

    record(t0, x0, 0.0);
    if (t1 == t0) return traj;

    std::vector<double> targets;
    for (int i = 1; i <= opts.samples; ++i)
        targets.push_back(t0 + (t1 - t0) * i / static_cast<double>(opts.samples));
    targets.back() = t1;

    Integrator integ(decay, g);
    std::vector<double> x = x0, full(x.size()), half(x.size()), two(x.size());
    double t = t0;
    double h = (t1 - t0) / 16.0;
    const double entry_scale = std::max(norm2(x0), 1e-300);
    const double h_min = (t1 - t0) * 1e-14;
    size_t next_target = 0;

    while (next_target < targets.size()) {
        const double target = targets[next_target];
        if (t >= target) {
            ++next_target;
            continue;
        }
        bool clipped = false;
        double hs = h;
        if (t + hs >= target) {
            hs = target - t;
            clipped = true;
        }

        integ.step(t, x, hs, full);
        integ.step(t, x, 0.5 * hs, half);
        integ.step(t + 0.5 * hs, half, 0.5 * hs, two);

        double err = 0.0;
        for (size_t i = 0; i < x.size(); ++i) err += (two[i] - full[i]) * (two[i] - full[i]);
        err = std::sqrt(err) / 15.0;
        const double scale = opts.tol * (norm2(two) + 0.01 * entry_scale) + 1e-300;

        if (err <= scale) {
            t += hs;
            x = two;
            if (t >= target - 1e-300) {
                record(target, x, err);
                t = target;
                ++next_target;
            }
            const double grow = err > 0.0 ? 0.9 * std::pow(scale / err, 0.2) : 5.0;
            const double hn = hs * std::clamp(grow, 0.2, 5.0);
            if (!clipped || hn > h) h = hn;
        } else {
            h = hs * std::clamp(0.9 * std::pow(scale / err, 0.2), 0.1, 0.7);
        }
        if (h < h_min)
            throw ToleranceUnreachable(
                "step size underflow: stiffness/precision mismatch at requested tolerance");
    }
    return traj;
}

Trajectory simulate_bilinear(const SpectralModel& model, const std::vector<double>& state0,
                             const Control& p, double t0, double t1,
                             const SimulateOptions& opts, const Forcing* forcing) {
    const int n = model.n_modes;
    if (state0.size() != static_cast<size_t>(n))
        throw OutOfRange("state size does not match model");
    NonstiffRhs g = [&, n](double t, const std::vector<double>& x, std::vector<double>& out) {
        const double pv = p(t);
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            if (pv != 0.0)
                for (int j = 0; j < n; ++j)
                    s += model.coupling[static_cast<size_t>(k) * n + j] * x[j];
            out[k] = -pv * s;
        }
        if (forcing) {
            const double fv = forcing->coefficient ? forcing->coefficient(t) : pv;
            for (int k = 0; k < n; ++k) out[k] -= fv * forcing->direction[k];
        }
    };
    return integrate_exponential(model.eigenvalues, g, state0, t0, t1, opts, &p);
}

Trajectory simulate_linearized(const SpectralModel& model, const std::vector<double>& v0,
                               const ControlSignal& p, const SimulateOptions& opts) {
    const int n = model.n_modes;
    if (v0.size() != static_cast<size_t>(n))
        throw OutOfRange("state size does not match model");
    const std::vector<double> bcol = model.ground_coupling();
    Trajectory traj;
    for (int i = 0; i <= opts.samples; ++i) {
        const double t = p.horizon * i / static_cast<double>(opts.samples);
        std::vector<double> v = linearized_state(p, model.eigenvalues, v0, bcol, t);
        traj.times.push_back(t);
        traj.norms.push_back(norm2(v));
        traj.control_values.push_back(p(t));
        traj.step_errors.push_back(0.0);
        traj.sup_norm = std::max(traj.sup_norm, traj.norms.back());
        traj.states.push_back(std::move(v));
    }
    return traj;
}

Trajectory simulate_linearized_numeric(const SpectralModel& model,
                                       const std::vector<double>& v0, const Control& p,
                                       double T, const SimulateOptions& opts) {
    const int n = model.n_modes;
    if (v0.size() != static_cast<size_t>(n))
        throw OutOfRange("state size does not match model");
    const std::vector<double> bcol = model.ground_coupling();
    QuadratureConfig qcfg;
    qcfg.tol = std::min(1e-12, opts.tol);
    Trajectory traj;
    for (int i = 0; i <= opts.samples; ++i) {
        const double t = T * i / static_cast<double>(opts.samples);
        std::vector<double> v(n);
        for (int k = 0; k < n; ++k) {
            const double mu = model.eigenvalues[k];
            double conv = 0.0;
            if (t > 0.0)
                conv = integrate([&](double s) { return std::exp(-mu * (t - s)) * p(s); },
                                 0.0, t, qcfg);
            v[k] = std::exp(-mu * t) * v0[k] - bcol[k] * conv;
        }
        traj.times.push_back(t);
        traj.norms.push_back(norm2(v));
        traj.control_values.push_back(p(t));
        traj.step_errors.push_back(0.0);
        traj.sup_norm = std::max(traj.sup_norm, traj.norms.back());
        traj.states.push_back(std::move(v));
    }
    return traj;
}

std::vector<double> propagate_free(const SpectralModel& model,
                                   const std::vector<double>& state, double dt) {
    if (state.size() != static_cast<size_t>(model.n_modes))
        throw OutOfRange("state size does not match model");
    if (dt < 0.0) throw OutOfRange("free propagation requires dt >= 0");
    std::vector<double> out(state.size());
    for (size_t k = 0; k < state.size(); ++k)
        out[k] = std::exp(-model.eigenvalues[k] * dt) * state[k];
    return out;
}

std::pair<SpectralModel, double> shift_spectrum(const SpectralModel& model) {
    SpectralModel shifted = model;
    const double lambda1 = model.eigenvalues.empty() ? 0.0 : model.eigenvalues[0];
    for (double& mu : shifted.eigenvalues) mu -= lambda1;
    if (!shifted.eigenvalues.empty()) shifted.eigenvalues[0] = 0.0;
    return {shifted, lambda1};
}

}  // namespace gsc
