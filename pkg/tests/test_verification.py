import json
import math

import numpy as np
import pytest

from doublephase.cylinder import Cylinder, shrink_cylinder
from doublephase.exponents import ExponentSet
from doublephase.grid import GridField
from doublephase.verification import (
    COLUMNS, ConvergenceSetup, check_I_decomposition, check_jensen_gradient, check_star_chain, csv_to_rows,
    eps_quad, fit_rate, gradient_blowup_rate, regime_slope_bound, run_convergence, time_modulus,
)
from doublephase.weights import constant_weight, ramp_power_weight

SQUARE = Cylinder((0.0, 0.0), 1.0, 0.0, 1.0)
LINE = Cylinder((0.0,), 1.0, 0.0, 1.0)
EXPS2 = ExponentSet(2, 2.0, 2.5, 1.0)


def _field(func, domain, nx, nt):
    return GridField.from_function(func, domain, nx, nt)


def _inner(domain, h):
    return shrink_cylinder(domain, h)


def test_eps_budget_and_rate_fit():
    g = _field(lambda X, T: X[..., 0], LINE, 11, 11)
    assert eps_quad(g, 2.0) == pytest.approx(10 * (0.2 ** 2 + 0.1 ** 2) * 2)
    h = np.array([0.4, 0.2, 0.1, 0.05, 0.025])
    slope, pref = fit_rate(h, 3 * h ** 1.5)
    assert slope == pytest.approx(1.5) and pref == pytest.approx(3.0)
    assert fit_rate(h, np.zeros(5)) == (0.0, 0.0)
    assert math.isnan(fit_rate(h, [1, 0, 1, 1, 1])[0])
    with pytest.raises(ValueError):
        fit_rate([0.1], [1.0])


def test_jensen_equality_for_affine_and_zero_for_constant():
    w = _field(lambda X, T: 1 + X[..., 0] - 2 * X[..., 1] + T, SQUARE, 33, 33)
    res = check_jensen_gradient(w, 0.25, _inner(SQUARE, 0.25), 2.0)
    assert abs(res.margin) <= 1e-12 and res.passed
    c = _field(lambda X, T: np.full(T.shape, 4.0), SQUARE, 33, 33)
    assert check_jensen_gradient(c, 0.25, _inner(SQUARE, 0.25), 3.0).margin == 0.0


def test_jensen_strict_on_curved_field():
    w = _field(lambda X, T: np.sin(np.pi * X[..., 0]), LINE, 201, 201)
    Q = Cylinder((0.0,), 0.7, 0.3, 0.7)
    res = check_jensen_gradient(w, 0.2, Q, 2.0)
    assert res.passed
    # the margin is positive wherever |Dw|^2 curves; check on a finer grid keeps the sign
    fine = _field(lambda X, T: np.sin(np.pi * X[..., 0]), LINE, 801, 201)
    assert check_jensen_gradient(fine, 0.2, Q, 2.0).margin >= -1e-12


def test_star_chain_constant_weight_and_smooth_field():
    w = _field(lambda X, T: np.sin(0.5 * X[..., 0]) * (1 + T), SQUARE, 33, 33)
    Q = _inner(SQUARE, 0.25)
    res = check_star_chain(w, constant_weight(2.0, 1.0), EXPS2, 0.25, Q)
    assert res.coeff_margin == 0.0  # [a] h^alpha - (a - a_h) with both sides zero
    assert res.identity_err == 0.0
    assert res.passed
    ramp = check_star_chain(w, ramp_power_weight(1.0, 1.0, offset=0.1), EXPS2, 0.25, Q)
    assert ramp.passed and ramp.coeff_margin >= 0.0
    half = check_star_chain(w, ramp_power_weight(1.0, 1.0, offset=0.1), EXPS2, 0.125, Q, strict_time=False)
    assert half.passed


def test_star_chain_flags_violated_condition():
    w = _field(lambda X, T: X[..., 0] * T, SQUARE, 33, 33)
    bad = ExponentSet(2, 2.0, 3.0, 1.0)
    res = check_star_chain(w, ramp_power_weight(1.0, 1.0), bad, 0.25, _inner(SQUARE, 0.25))
    assert not res.condition_satisfied and res.passed


def test_gradient_rate_of_smooth_field_is_flat():
    w = _field(lambda X, T: np.cos(X[..., 0]) * (1 + T), LINE, 129, 2049)
    hs = [0.25, 0.125, 0.0625, 0.03125]
    Q = Cylinder((0.0,), 0.7, 0.1, 0.9)
    for regime, exps in [("general", ExponentSet(1, 2.0, 2.5, 1.0)), ("bounded", ExponentSet(1, 2.0, 2.5, 1.0)),
                         ("s-integrable", ExponentSet(1, 2.0, 2.5, 1.0, s=4.0))]:
        res = gradient_blowup_rate(w, regime, exps, hs, Q)
        assert abs(res.slope) < 0.05 and res.passed
    with pytest.raises(ValueError, match="at least 3"):
        gradient_blowup_rate(w, "general", ExponentSet(1, 2.0, 2.5, 1.0), hs[:2], Q)


def test_slope_bounds_per_regime():
    assert regime_slope_bound("general", ExponentSet(2, 2.0, 2.5, 1.0)) == -2.0
    assert regime_slope_bound("bounded", ExponentSet(2, 2.0, 2.5, 1.0)) == -1.0
    assert regime_slope_bound("s-integrable", ExponentSet(1, 2.0, 2.5, 1.0, s=4.0)) == -1.25
    assert regime_slope_bound("s-integrable", ExponentSet(1, 2.0, 2.5, 1.0, s=math.inf)) == -1.0


def test_modulus_of_linear_time_ramp_on_unit_ball():
    # |B| = 1 for the interval (-1/2, 1/2), so omega(delta) = delta exactly
    dom = Cylinder((0.0,), 1.0, 0.0, 1.0)
    w = _field(lambda X, T: T * np.ones_like(X[..., 0]), dom, 201, 101)
    Q = Cylinder((0.0,), 0.5, 0.3, 0.7)
    tab = time_modulus(w, Q, [0.0, 0.01, 0.05, 0.2])
    np.testing.assert_allclose(tab.omega, [0.0, 0.01, 0.05, 0.2], rtol=1e-12, atol=1e-15)
    assert tab.to_csv_text().startswith("delta,omega\n")
    with pytest.raises(ValueError, match="exceeds"):
        time_modulus(w, Q, [0.5])


def test_modulus_zero_for_static_field_and_monotone_generally():
    w = _field(lambda X, T: np.sin(3 * X[..., 0]), LINE, 51, 101)
    Q = Cylinder((0.0,), 0.5, 0.3, 0.7)
    assert time_modulus(w, Q, [0.0, 0.1, 0.2]).omega == (0.0, 0.0, 0.0)
    g = _field(lambda X, T: np.sin(3 * X[..., 0] + 5 * T ** 2), LINE, 51, 101)
    om = np.array(time_modulus(g, Q, np.linspace(0, 0.25, 12)).omega)
    assert om[0] == 0.0 and np.all(np.diff(om) >= 0) and om[-1] > 0


def test_decomposition_parts_vanish_for_separated_fields():
    Q = Cylinder((0.0,), 0.6, 0.3, 0.7)
    static = _field(lambda X, T: np.sin(3 * X[..., 0]), LINE, 129, 513)
    d = check_I_decomposition(static, 0.2, Q)
    assert np.all(d.I2 == 0.0) and d.split_ok and d.ftc_ok and d.modulus_ok
    assert d.gap_sup > 0
    spatial_const = _field(lambda X, T: np.full(T.shape, 1.0) * T ** 2, LINE, 129, 513)
    e = check_I_decomposition(spatial_const, 0.2, Q)
    assert np.all(e.I1 == 0.0) and e.split_ok and e.modulus_ok
    assert e.I2_sup <= e.omega_h2 + e.eps
    with pytest.raises(ValueError):
        check_I_decomposition(static, 0.2, Q, p=1.5)


def test_decomposition_I1_slope_for_p4():
    w = _field(lambda X, T: np.sin(np.pi * X[..., 0]) * (1 + T), Cylinder((0.0,), 1.0, 0.0, 0.25), 129, 513)
    hs = [0.25, 0.125, 0.0625, 0.03125]
    Q = shrink_cylinder(w.domain, hs[0])
    I1 = [check_I_decomposition(w, h, Q, p=4.0).I1_sup for h in hs]
    slope, _ = fit_rate(hs, I1)
    assert slope >= 1 - 2 / 4 - 0.1


def _setup(func, exps, weight, domain=SQUARE, nx=33, nt=33, hs=(0.5, 0.25, 0.125), **kw):
    w = _field(func, domain, nx, nt)
    return ConvergenceSetup("t", w, weight, exps, kw.pop("regime", "general"), list(hs),
                            shrink_cylinder(domain, hs[0]), strict_time=False, **kw)


def test_constant_field_gives_zero_gaps():
    rep = run_convergence(_setup(lambda X, T: np.full(T.shape, 3.0), EXPS2, ramp_power_weight(1.0, 1.0)))
    for c in ("norm_gap_Lp", "norm_gap_LpW1p", "norm_gap_CL2", "energy_gap_P", "energy_gap_F", "l2_sup_gap",
              "I1_sup", "I2_sup", "grad_sup", "integrand_L1_gap", "dominator_L1_gap"):
        assert np.all(rep.column(c) == 0.0), c
    assert rep.exit_code == 0


def test_affine_field_energy_gaps_vanish():
    rep = run_convergence(_setup(lambda X, T: 0.3 * X[..., 0] + X[..., 1] - T, EXPS2, ramp_power_weight(1.0, 1.0)))
    assert np.all(rep.column("norm_gap_CL2") < 1e-13)
    assert np.all(rep.column("energy_gap_P") < 1e-12)
    assert np.all(np.abs(rep.column("jensen_margin")) < 1e-12)


def test_smooth_energy_gap_has_second_order_rate():
    dom = Cylinder((0.0,), 1.0, 0.0, 1.0)
    s = _setup(lambda X, T: np.sin(np.pi * 0.5 * X[..., 0]) * (1 + T), ExponentSet(1, 2.0, 2.5, 1.0),
               ramp_power_weight(1.0, 1.0), domain=dom, nx=257, nt=257, hs=(0.5, 0.25, 0.125, 0.0625, 0.03125))
    rep = run_convergence(s)
    assert 1.7 <= rep.fitted_rates["energy_gap_P"]["rate"] <= 2.3
    assert rep.verdicts["convergence"] == "PASS"
    assert all(v == "PASS" for v in rep.verdicts.values())


def test_report_csv_round_trip_and_determinism():
    s = _setup(lambda X, T: np.cos(X[..., 0]) * T, EXPS2, ramp_power_weight(1.0, 1.0))
    a = run_convergence(s)
    text = a.to_csv_text()
    assert text.splitlines()[0] == ",".join(COLUMNS)
    from doublephase.verification import rows_to_csv
    assert rows_to_csv(csv_to_rows(text)) == text
    b = run_convergence(s)
    assert b.to_csv_text() == text
    summary = json.loads(a.summary_json())
    assert set(summary) >= {"verdicts", "fitted_rates", "gap", "exit_code", "annotations"}


def test_report_rejects_non_decreasing_h():
    with pytest.raises(ValueError, match="decreasing"):
        run_convergence(_setup(lambda X, T: T, EXPS2, ramp_power_weight(1.0, 1.0), hs=(0.25, 0.25, 0.125)))


def test_violated_condition_annotated(caplog):
    bad = ExponentSet(1, 2.0, 2.0 + 4.0 / 3.0, 1.0)
    dom = Cylinder((0.0,), 1.0, 0.0, 1.0)
    s = _setup(lambda X, T: np.sin(X[..., 0]) * (1 + T), bad, ramp_power_weight(1.0, 1.0),
               domain=dom, nx=65, nt=65, hs=(0.5, 0.25, 0.125))
    with caplog.at_level("WARNING"):
        rep = run_convergence(s)
    assert "condition-failed" in rep.annotations and rep.exit_code == 2
    assert "diverges" in caplog.text
    assert rep.blowup_exponent == pytest.approx(-1.0)
