import json
import math

import pytest

gsc = pytest.importorskip("gsctrl")


def test_dirichlet_model_values():
    m = gsc.build_model("dirichlet-heat", 4)
    assert m.n_modes == 4
    assert m.eigenvalues[0] == pytest.approx(math.pi**2, rel=1e-15)
    c11 = (2 * math.pi**2 - 3) / (6 * math.pi**2)
    assert m.coupling(1, 1) == pytest.approx(c11, abs=1e-10)
    assert m.coupling(1, 2) == pytest.approx(-16 / (9 * math.pi**2), abs=1e-10)
    rep = gsc.verify_spectral_hypotheses(m)
    assert rep.all_ok()
    assert rep.min_gap == pytest.approx(math.pi, abs=1e-13)


def test_gram_and_biorthogonal_family():
    g = gsc.gram_matrix([0.0, 3.0], 1.0)
    assert g.at(1, 1) == pytest.approx(1.0)
    assert g.at(1, 2) == pytest.approx((1 - math.exp(-3)) / 3, rel=1e-14)

    b = gsc.biorthogonal_family([1.0], 1.0)
    c = 2 / (math.exp(2) - 1)
    assert gsc.eval_sigma(b, 1, 0.0) == pytest.approx(c, rel=1e-13)
    assert gsc.eval_sigma(b, 1, 1.0) == pytest.approx(c * math.e, rel=1e-13)

    mu = [(k * k - 1) * math.pi**2 for k in range(1, 9)]
    b8 = gsc.biorthogonal_family(mu, 0.1)
    assert b8.max_residual <= 1e-8
    _, max_abs = gsc.moment_residual(b8)
    assert max_abs <= 1e-8


def test_schedule_and_constants():
    s = gsc.stage_schedule(1.0, math.pi, 8)
    assert s.T_f == pytest.approx(1 / 6, rel=1e-15)
    assert s.T_tilde == pytest.approx(1 / math.pi**2, rel=1e-15)
    assert s.lengths[1] == pytest.approx(s.T_tilde / 4)

    m = gsc.build_model("dirichlet-heat", 8)
    c = gsc.theoretical_constants(m, 0.5, c_bar=1.0, c_k=1.0, c_m=0.9)
    assert c.c_alpha == pytest.approx(math.pi, rel=1e-12)
    assert c.lambda_T == pytest.approx(0.0420, rel=2e-2)


def test_local_run_converges():
    m = gsc.build_model("dirichlet-heat", 6)
    u0 = [1.0, 1e-3, 0.0, 0.0, 0.0, 0.0]
    rep = gsc.run_local_control(m, u0, 1.0, j_max=8)
    assert rep.converged
    assert rep.final_deviation_rel <= 1e-12
    assert all(s.gate_value <= 1.0 for s in rep.stages)
    checks = gsc.verify_run(rep, m)
    names = {c.name for c in checks.checks}
    assert {"gate", "wT", "estimvn", "pestimate"} <= names

    fit = gsc.contraction_exponents([1e-2, 1e-4, 1e-8, 1e-16], 0.0)
    assert fit.slope == pytest.approx(math.log(2), abs=1e-12)
    assert fit.superexponential


def test_theory_gate_rejects_large_deviation():
    m = gsc.build_model("dirichlet-heat", 6)
    u0 = [1.0, 1e-3, 0.0, 0.0, 0.0, 0.0]
    with pytest.raises(gsc.AdmissibilityError):
        gsc.run_local_control(m, u0, 1.0, mode="theory", c_k=1.0, c_m=0.9)


def test_series_identities():
    rep = gsc.verify_series_identities(30)
    assert rep.exact_ok and rep.monotone_ok and rep.remainder_ok
    assert rep.remainder < 1e-6


def test_run_scenario_roundtrip(tmp_path):
    cfg = {
        "schema": 1,
        "model": {"kind": "dirichlet-heat", "n_modes": 4},
        "control": {"T": 1.0, "mode": "empirical", "j_max": 8},
        "simulator": {"tol": 1e-10, "samples_per_stage": 8},
        "u0": {"ground_plus": {"2": 1e-3}},
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    assert gsc.run_scenario("local", str(cfg_path), str(out)) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["status"] == "converged"
    assert (out / "trajectory.csv").read_text().startswith("t,p,norm_dev,")
