#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gsc/control.hpp"
#include "gsc/errors.hpp"
#include "gsc/linalg.hpp"
#include "gsc/simulate.hpp"
#include "gsc/spectral.hpp"

using namespace gsc;

namespace {

SpectralModel identity_coupling_model(std::vector<double> eigenvalues) {
    SpectralModel m;
    m.kind = ModelKind::Custom;
    m.n_modes = static_cast<int>(eigenvalues.size());
    m.eigenvalues = std::move(eigenvalues);
    m.coupling.assign(static_cast<size_t>(m.n_modes) * m.n_modes, 0.0);
    for (int k = 0; k < m.n_modes; ++k)
        m.coupling[static_cast<size_t>(k) * m.n_modes + k] = 1.0;
    m.gap_alpha = 1.0;
    m.dispersion_q = 1.0;
    m.dispersion_b = 1.0;
    m.label = "identity coupling";
    return m;
}

}  // namespace

TEST_CASE("free dirichlet decay of the ground mode") {
    const SpectralModel m = build_model(ModelKind::DirichletHeat, 4);
    std::vector<double> e1(4, 0.0);
    e1[0] = 1.0;
    const Trajectory traj =
        simulate_bilinear(m, e1, [](double) { return 0.0; }, 0.0, 0.1);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.states.front() == e1);
    const double expected = std::exp(-M_PI * M_PI * 0.1);
    CHECK(expected == doctest::Approx(0.37273).epsilon(1e-4));
    CHECK(traj.final_state()[0] == doctest::Approx(expected).epsilon(1e-12));
    for (int k = 1; k < 4; ++k) CHECK(traj.final_state()[k] == 0.0);
}

TEST_CASE("state linearity: doubling the initial state doubles the trajectory") {
    const SpectralModel m = build_model(ModelKind::DirichletHeat, 4);
    const Control p = [](double t) { return 0.05 * std::sin(9.0 * t); };
    std::vector<double> x0 = {1.0, 0.3, -0.2, 0.05};
    std::vector<double> x2 = x0;
    for (double& v : x2) v *= 2.0;
    const Trajectory a = simulate_bilinear(m, x0, p, 0.0, 0.08);
    const Trajectory b = simulate_bilinear(m, x2, p, 0.0, 0.08);
    REQUIRE(a.times.size() == b.times.size());
    for (size_t i = 0; i < a.times.size(); ++i)
        for (int k = 0; k < 4; ++k)
            CHECK(b.states[i][k] ==
                  doctest::Approx(2.0 * a.states[i][k]).epsilon(1e-12));
}

TEST_CASE("identity coupling with p = 1 decays like e^{-(mu_k + 1) t}") {
    const SpectralModel m = identity_coupling_model({0.0, 1.0, 4.0, 9.0});
    SimulateOptions opts;
    opts.tol = 1e-12;
    for (int k = 0; k < 4; ++k) {
        std::vector<double> ek(4, 0.0);
        ek[k] = 1.0;
        const Trajectory traj =
            simulate_bilinear(m, ek, [](double) { return 1.0; }, 0.0, 0.7, opts);
        for (size_t i = 0; i < traj.times.size(); ++i) {
            const double expected = std::exp(-(m.eigenvalues[k] + 1.0) * traj.times[i]);
            CHECK(std::abs(traj.states[i][k] - expected) < 1e-10);
        }
    }
}

TEST_CASE("shift equivalence: z = e^{lambda_1 t} u componentwise to 1e-10") {
    const SpectralModel m = build_model(ModelKind::DirichletHeat, 4);
    auto [shifted, lambda1] = shift_spectrum(m);
    CHECK(lambda1 == doctest::Approx(M_PI * M_PI));
    CHECK(shifted.eigenvalues[0] == 0.0);
    CHECK(shifted.eigenvalues[1] == doctest::Approx(3 * M_PI * M_PI));
    CHECK(shifted.eigenvalues[2] == doctest::Approx(8 * M_PI * M_PI));
    CHECK(shifted.gap_alpha == m.gap_alpha);

    const Control p = [](double t) { return 0.02 * std::cos(7.0 * t); };
    std::vector<double> u0 = {1.0, 0.3, -0.1, 0.02};
    SimulateOptions opts;
    opts.tol = 1e-12;
    const double T = 0.101321;
    const Trajectory u = simulate_bilinear(m, u0, p, 0.0, T, opts);
    const Trajectory z = simulate_bilinear(shifted, u0, p, 0.0, T, opts);
    REQUIRE(u.times.size() == z.times.size());
    for (size_t i = 0; i < u.times.size(); ++i) {
        const double factor = std::exp(lambda1 * u.times[i]);
        for (int k = 0; k < 4; ++k)
            CHECK(std::abs(z.states[i][k] - factor * u.states[i][k]) < 1e-10);
    }
}

TEST_CASE("neumann shift is the identity") {
    const SpectralModel m = build_model(ModelKind::NeumannHeat, 4);
    auto [shifted, lambda1] = shift_spectrum(m);
    CHECK(lambda1 == 0.0);
    CHECK(shifted.eigenvalues == m.eigenvalues);
}

TEST_CASE("propagate_free") {
    const SpectralModel m = build_model(ModelKind::DirichletHeat, 4);
    std::vector<double> e2(4, 0.0);
    e2[1] = 1.0;
    const std::vector<double> out = propagate_free(m, e2, 0.1);
    CHECK(out[1] == doctest::Approx(std::exp(-4 * M_PI * M_PI * 0.1)).epsilon(1e-14));
    CHECK(out[1] == doctest::Approx(0.019305).epsilon(1e-4));
    CHECK(propagate_free(m, e2, 0.0) == e2);

    auto [shifted, l1] = shift_spectrum(m);
    (void)l1;
    std::vector<double> e1(4, 0.0);
    e1[0] = 1.0;
    CHECK(propagate_free(shifted, e1, 3.7) == e1);
    CHECK_THROWS_AS(propagate_free(m, e2, -0.5), OutOfRange);
}

TEST_CASE("linearized dynamics") {
    const SpectralModel m = build_model(ModelKind::DirichletHeat, 4);
    auto [shifted, l1] = shift_spectrum(m);
    (void)l1;

    SUBCASE("p = 0 reduces to diagonal decay") {
        const BiorthogonalBasis b = biorthogonal_family(shifted.eigenvalues, 0.1);
        const ControlSignal zero = combine(b, {0.0, 0.0, 0.0, 0.0});
        const std::vector<double> v0 = {0.2, -0.4, 0.1, 0.05};
        const Trajectory traj = simulate_linearized(shifted, v0, zero);
        for (size_t i = 0; i < traj.times.size(); ++i)
            for (int k = 0; k < 4; ++k)
                CHECK(traj.states[i][k] ==
                      doctest::Approx(std::exp(-shifted.eigenvalues[k] * traj.times[i]) *
                                      v0[k])
                          .epsilon(1e-13));
    }

    SUBCASE("synthesized stage control nulls the linearized endpoint") {
        std::vector<double> v0 = {0.0, 1e-3, 0.0, 0.0};
        const StageControl sc = synthesize_stage_control(shifted, v0, 0.101321);
        const Trajectory traj = simulate_linearized(shifted, v0, sc.signal);
        double minc = 1e300;
        for (int k = 1; k <= 4; ++k)
            minc = std::min(minc, std::abs(shifted.coupling_at(1, k)));
        CHECK(traj.final_norm() <= 10.0 * sc.basis.max_residual * 1e-3 / minc);
    }

    SUBCASE("identity coupling, p = 1, v0 = 0: ground Duhamel equals -t") {
        const SpectralModel idm = identity_coupling_model({0.0, 1.0, 4.0});
        const BiorthogonalBasis b = biorthogonal_family({0.0}, 0.5);
        // one constant exponent: sigma_1 = 1/T, weight T gives p = 1
        const ControlSignal one = combine(b, {0.5});
        CHECK(one(0.3) == doctest::Approx(1.0).epsilon(1e-14));
        const std::vector<double> v0 = {0.0, 0.0, 0.0};
        const Trajectory traj = simulate_linearized(idm, v0, one);
        CHECK(traj.final_state()[0] == doctest::Approx(-0.5).epsilon(1e-13));
    }

    SUBCASE("numeric quadrature path agrees with the closed form") {
        std::vector<double> v0 = {1e-2, -2e-3, 5e-4, 0.0};
        const StageControl sc = synthesize_stage_control(shifted, v0, 0.05);
        const ControlSignal& sig = sc.signal;
        const Trajectory closed = simulate_linearized(shifted, v0, sig);
        const Trajectory numeric = simulate_linearized_numeric(
            shifted, v0, [&sig](double t) { return sig(t); }, 0.05);
        REQUIRE(closed.times.size() == numeric.times.size());
        for (size_t i = 0; i < closed.times.size(); ++i)
            for (int k = 0; k < 4; ++k)
                CHECK(std::abs(closed.states[i][k] - numeric.states[i][k]) < 1e-9);
    }
}

TEST_CASE("superposition defect: w = v - vbar solves the w dynamics") {
    const SpectralModel m = build_model(ModelKind::DirichletHeat, 4);
    auto [shifted, l1] = shift_spectrum(m);
    (void)l1;
    const int n = 4;
    std::vector<double> v0 = {1e-2, 5e-3, -2e-3, 1e-3};
    const StageControl sc = synthesize_stage_control(shifted, v0, 0.05);
    const ControlSignal& sig = sc.signal;
    const std::vector<double> bcol = shifted.ground_coupling();

    // joint system x = [v; w]: v' = -Dv - p(Cv + b), w' = -Dw - p Cv
    std::vector<double> decay(2 * n);
    for (int k = 0; k < n; ++k) decay[k] = decay[n + k] = shifted.eigenvalues[k];
    NonstiffRhs g = [&](double t, const std::vector<double>& x, std::vector<double>& out) {
        const double pv = sig(t);
        for (int k = 0; k < n; ++k) {
            double cv = 0.0;
            for (int j = 0; j < n; ++j)
                cv += shifted.coupling[static_cast<size_t>(k) * n + j] * x[j];
            out[k] = -pv * (cv + bcol[k]);
            out[n + k] = -pv * cv;
        }
    };
    std::vector<double> x0(2 * n, 0.0);
    for (int k = 0; k < n; ++k) x0[k] = v0[k];
    SimulateOptions opts;
    opts.tol = 1e-11;
    const Trajectory joint = integrate_exponential(decay, g, x0, 0.0, 0.05, opts);

    // w(0) = 0, and w must reproduce v - vbar within integrator tolerance
    for (int k = 0; k < n; ++k) CHECK(joint.states.front()[n + k] == 0.0);
    const std::vector<double> vbar =
        linearized_state(sig, shifted.eigenvalues, v0, bcol, 0.05);
    for (int k = 0; k < n; ++k) {
        const double v_end = joint.final_state()[k];
        const double w_end = joint.final_state()[n + k];
        CHECK(std::abs(w_end - (v_end - vbar[k])) < 1e-9);
    }
}

TEST_CASE("halving the tolerance does not increase deviation from reference") {
    const SpectralModel m = build_model(ModelKind::DirichletHeat, 4);
    const Control p = [](double t) { return 0.4 * std::sin(25.0 * t); };
    const std::vector<double> x0 = {1.0, 0.4, -0.3, 0.1};
    SimulateOptions ref_opts;
    ref_opts.tol = 1e-13;
    const std::vector<double> ref =
        simulate_bilinear(m, x0, p, 0.0, 0.12, ref_opts).final_state();
    double prev = 1e300;
    for (double tol : {1e-5, 1e-7, 1e-9, 1e-11}) {
        SimulateOptions opts;
        opts.tol = tol;
        const std::vector<double> xs =
            simulate_bilinear(m, x0, p, 0.0, 0.12, opts).final_state();
        double dev = 0.0;
        for (int k = 0; k < 4; ++k) dev = std::hypot(dev, xs[k] - ref[k]);
        CHECK(dev <= prev * 1.05 + 1e-14);
        prev = dev;
    }
}

TEST_CASE("trajectory invariants: increasing samples, norms, error estimates") {
    const SpectralModel m = build_model(ModelKind::DirichletHeat, 4);
    SimulateOptions opts;
    opts.samples = 16;
    const std::vector<double> x0 = {0.5, 0.2, 0.1, -0.3};
    const Trajectory traj =
        simulate_bilinear(m, x0, [](double) { return 0.1; }, 0.0, 0.05, opts);
    CHECK(traj.times.size() == 17);
    for (size_t i = 1; i < traj.times.size(); ++i) {
        CHECK(traj.times[i] > traj.times[i - 1]);
        CHECK(traj.norms[i] == doctest::Approx(norm2(traj.states[i])).epsilon(1e-15));
    }
    CHECK(traj.sup_norm >= traj.norms.back());
}

TEST_CASE("argument validation") {
    const SpectralModel m = build_model(ModelKind::DirichletHeat, 4);
    const std::vector<double> bad(3, 0.0);
    CHECK_THROWS_AS(simulate_bilinear(m, bad, [](double) { return 0.0; }, 0.0, 0.1),
                    OutOfRange);
    const std::vector<double> ok(4, 0.0);
    CHECK_THROWS_AS(simulate_bilinear(m, ok, [](double) { return 0.0; }, 0.1, 0.0),
                    OutOfRange);
}
