import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from doublephase.cylinder import Cylinder
from doublephase.grid import GridField
from doublephase.kernel import (
    MollifierKernel, ParabolicMollifier, build_stencil, dump_profile, kernel_eval, kernel_mass, mollify,
    mollify_gradient_commute_check, normalization_constant,
)

# independent oracle: 30-digit mpmath quadrature of exp(1/(s^2-1)) (scratch script, frozen here)
C_ORACLE = {1: 2.25228362104358101, 2: 2.14356577579223660, 3: 2.26711673960832646}
# per-coordinate second moments of the normalized profiles, same oracle
SECOND_MOMENT_1D = 0.158113636263798230
SECOND_MOMENT_2D = 0.130655601710279323


@pytest.mark.parametrize("m", [1, 2, 3])
def test_normalization_constants_match_oracle(m):
    assert normalization_constant(m) == pytest.approx(C_ORACLE[m], rel=1e-10, abs=1e-8)


def test_normalization_rejects_bad_dimension():
    with pytest.raises(ValueError):
        normalization_constant(0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_kernel_has_unit_mass(n):
    for h in (0.2, 0.1, 0.05):
        assert abs(kernel_mass(h, n) - 1.0) < 1e-6


def test_support_and_peak():
    k = MollifierKernel(2)
    h = 0.3
    assert kernel_eval(h, np.array([0.0, 0.0]), 0.0) == pytest.approx(k.peak(h))
    assert kernel_eval(h, np.array([0.3, 0.0]), 0.0) == 0.0
    assert kernel_eval(h, np.array([0.0, 0.0]), 0.09) == 0.0
    assert kernel_eval(h, np.array([0.29, 0.0]), 0.0) > 0.0
    with pytest.raises(ValueError):
        kernel_eval(0.0, np.zeros(2), 0.0)


@given(h=st.floats(0.05, 2.0), x=st.floats(-3, 3), t=st.floats(-3, 3))
def test_parabolic_scaling(h, x, t):
    # kappa_h(x, t) = h^{-3} kappa_1(x/h, t/h^2) in one space dimension
    assert kernel_eval(h, x, t, n=1) == pytest.approx(h ** -3 * kernel_eval(1.0, x / h, t / h ** 2, n=1),
                                                      rel=1e-12, abs=1e-300)


def test_dump_profile(tmp_path):
    p = tmp_path / "k.csv"
    dump_profile(p, 1, 11)
    rows = p.read_text().splitlines()
    assert rows[0] == "s,kappa_1" and len(rows) == 12
    assert float(rows[1].split(",")[1]) == 0.0


def test_stencil_is_normalized_symmetric_and_resolution_checked():
    st_ = build_stencil(0.25, 0.05, 0.01, 2)
    assert st_.spatial_weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert st_.temporal_weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all(st_.spatial_weights > 0)
    np.testing.assert_array_equal(st_.temporal_offsets, -st_.temporal_offsets[::-1])
    with pytest.raises(ValueError, match="under-resolved by the grid"):
        build_stencil(0.09, 0.05, 0.001, 1)
    with pytest.raises(ValueError, match="under-resolved in time"):
        build_stencil(0.1, 0.05, 0.01, 1)
    loose = build_stencil(0.1, 0.05, 0.01, 1, strict_time=False)
    assert not loose.time_resolved


def _field(func, n, nx, nt, T=1.0):
    return GridField.from_function(func, Cylinder((0.0,) * n, 1.0, 0.0, T), nx, nt)


def test_affine_fields_are_reproduced_exactly():
    w = _field(lambda X, T: 0.5 + 2 * X[..., 0] - X[..., 1] + 3 * T, 2, 33, 33)
    m = mollify(w, 0.25)
    X, T = m.points()
    np.testing.assert_allclose(m.values, 0.5 + 2 * X[..., 0] - X[..., 1] + 3 * T, atol=1e-13)


def test_quadratic_picks_up_kernel_second_moment():
    h = 0.4
    w = _field(lambda X, T: X[..., 0] ** 2, 1, 401, 41)
    m = mollify(w, h)
    X, _ = m.points()
    shift = m.values - X[..., 0] ** 2
    np.testing.assert_allclose(shift, h * h * SECOND_MOMENT_1D, rtol=1e-6)
    w2 = _field(lambda X, T: X[..., 1] ** 2, 2, 161, 11, T=2.0)
    m2 = mollify(w2, 0.5, strict_time=False)
    X2, _ = m2.points()
    np.testing.assert_allclose(m2.values - X2[..., 1] ** 2, 0.25 * SECOND_MOMENT_2D, rtol=1e-4)


def test_time_quadratic_uses_h_squared_scale():
    h = 0.3
    w = _field(lambda X, T: T ** 2 * np.ones_like(X[..., 0]), 1, 21, 1001)
    m = mollify(w, h)
    _, T = m.points()
    np.testing.assert_allclose(m.values - T ** 2, h ** 4 * SECOND_MOMENT_1D, rtol=1e-6)


def test_box_profile_also_reproduces_affine():
    w = _field(lambda X, T: X[..., 0] + 2 * X[..., 1], 2, 33, 33)
    m = mollify(w, 0.25, spatial_profile="box")
    X, _ = m.points()
    np.testing.assert_allclose(m.values, X[..., 0] + 2 * X[..., 1], atol=1e-13)


def test_commutes_with_gradient():
    w = _field(lambda X, T: X[..., 0] ** 2 + T * X[..., 0], 2, 33, 33)
    assert mollify_gradient_commute_check(w, 0.25) < 1e-12


def test_containment_violation_raises():
    w = _field(lambda X, T: X[..., 0], 1, 41, 101)
    with pytest.raises(ValueError, match="containment"):
        mollify(w, 0.2, Cylinder((0.0,), 0.9, 0.5, 0.6))
    with pytest.raises(ValueError, match="containment"):
        mollify(w, 0.2, Cylinder((0.0,), 0.5, 0.01, 0.6))


def test_estimator_protocol():
    w = _field(lambda X, T: np.sin(X[..., 0]) * T, 1, 41, 41)
    est = ParabolicMollifier(h=0.2)
    assert est.get_params() == {"h": 0.2, "target": None, "spatial_profile": "radial", "strict_time": True}
    with pytest.raises(NotFittedError):
        est.transform(w)
    fresh = clone(est.set_params(h=0.25))
    assert fresh.h == 0.25
    out = fresh.fit(w).transform(w)
    assert np.array_equal(out.values, fresh.fit_transform(w).values)
    other = _field(lambda X, T: X[..., 0], 1, 21, 41)
    with pytest.raises(ValueError, match="different grid"):
        fresh.transform(other)
    with pytest.raises(TypeError):
        fresh.fit(np.zeros((4, 4)))


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-5, 5), scale=st.floats(0.1, 10))
def test_mollification_is_linear_and_preserves_constants(c, scale):
    w = _field(lambda X, T: np.cos(3 * X[..., 0]) * (1 + T), 1, 41, 81)
    base = mollify(w, 0.2).values
    shifted = mollify(w.with_values(scale * w.values + c), 0.2).values
    np.testing.assert_allclose(shifted, scale * base + c, atol=1e-12 * (1 + abs(c) + scale))
