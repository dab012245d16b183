import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chv import forms
from chv.errors import NonPositiveU, ZeroPoint
from chv.numerics import fd_gradient, fd_hessian

from conftest import E1, E2, E3, random_ball

finite = st.floats(-2.0, 2.0, allow_nan=False)
points = arrays(np.float64, 5, elements=finite).filter(lambda x: np.linalg.norm(x) > 0.05)


@pytest.mark.parametrize(
    "x, expected",
    [(E1, 1.0), (E2, 0.0), (np.array([0.6, 0, 0.8, 0, 0]), 0.792)],
)
def test_cartan_cubic_examples(x, expected):
    assert forms.cartan_cubic(x) == pytest.approx(expected, abs=1e-15)


def test_grad_cartan_examples():
    np.testing.assert_allclose(forms.grad_cartan(E1), [3, 0, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(forms.grad_cartan(E3), [1.5, 1.5 * math.sqrt(3), 0, 0, 0], atol=1e-15)


def test_hess_cartan_at_e1_is_diagonal():
    np.testing.assert_array_equal(forms.hess_cartan(E1), np.diag([6.0, -6.0, 3.0, 3.0, -6.0]))


def test_cartan_is_harmonic(rng):
    x = random_ball(rng, 10000, 0.0, 2.0)
    tr = np.trace(forms.hess_cartan(x), axis1=-2, axis2=-1)
    assert np.max(np.abs(tr)) < 1e-12


def test_closed_forms_match_finite_differences(rng):
    for x in random_ball(rng, 50, 0.3, 1.0):
        np.testing.assert_allclose(forms.grad_cartan(x), fd_gradient(forms.cartan_cubic, x), atol=1e-8)
        np.testing.assert_allclose(forms.hess_cartan(x), fd_hessian(forms.cartan_cubic, x), atol=1e-6)


@given(points, st.floats(0.1, 3.0))
def test_cartan_homogeneous_of_degree_three(x, lam):
    assert forms.cartan_cubic(lam * x) == pytest.approx(lam**3 * forms.cartan_cubic(x), rel=1e-12, abs=1e-12)


@given(points)
def test_eiconal_constant_is_nine(x):
    g = forms.grad_cartan(x)
    assert g @ g / np.dot(x, x) ** 2 == pytest.approx(9.0, rel=1e-10)


@pytest.mark.parametrize("delta", [0.0, 0.25, 0.5, 0.9])
def test_w_at_e1_is_one(delta):
    assert forms.w_value(E1, delta) == 1.0


def test_w_examples():
    assert forms.w_value(2 * E1, 0.5) == pytest.approx(2**1.5, rel=1e-15)
    assert forms.w_value(E2, 0.5) == 0.0


def test_u_examples():
    assert forms.u_value(E1, 0.5, 240000.0) == 240001.0
    assert forms.u_value(E2, 0.5, 240000.0) == 240000.0
    assert forms.u_value(np.array([0.6, 0, 0.8, 0, 0]), 0.5, 240000.0) == pytest.approx(240000.792, abs=1e-9)


def test_zero_point_rejected():
    with pytest.raises(ZeroPoint):
        forms.w_value(np.zeros(5), 0.5)
    with pytest.raises(ZeroPoint):
        forms.hess_w(np.array([1e-4, 0, 0, 0, 0]), 0.5)
    # the threshold is configurable
    assert forms.w_value(np.array([1e-4, 0, 0, 0, 0]), 0.5, r_min=1e-5) > 0


@pytest.mark.parametrize("delta, expected", [(0.5, 1.5), (0.0, 2.0)])
def test_grad_w_at_e1(delta, expected):
    np.testing.assert_allclose(forms.grad_w(E1, delta), [expected, 0, 0, 0, 0], atol=1e-15)


@pytest.mark.parametrize("delta", [0.0, 0.5, 0.8])
def test_w_derivatives_match_finite_differences(rng, delta):
    f = lambda x: forms.w_value(x, delta)
    for x in random_ball(rng, 40, 0.5, 1.0):
        np.testing.assert_allclose(forms.grad_w(x, delta), fd_gradient(f, x), atol=1e-8)
        np.testing.assert_allclose(forms.hess_w(x, delta), fd_hessian(f, x), atol=1e-6)


@given(points, st.floats(0.2, 3.0), st.sampled_from([0.0, 0.5, 0.75]))
def test_w_homogeneity(x, lam, delta):
    # degree 2 - delta for w, 1 - delta for Dw, -delta for D2w
    np.testing.assert_allclose(forms.w_value(lam * x, delta), lam ** (2 - delta) * forms.w_value(x, delta), rtol=1e-11, atol=1e-12)
    np.testing.assert_allclose(forms.grad_w(lam * x, delta), lam ** (1 - delta) * forms.grad_w(x, delta), rtol=1e-10, atol=1e-11)
    np.testing.assert_allclose(forms.hess_w(lam * x, delta), lam ** (-delta) * forms.hess_w(x, delta), rtol=1e-10, atol=1e-10)


@given(points, st.sampled_from([0.0, 0.25, 0.5, 0.9]))
def test_euler_identities(x, delta):
    w, g, h = forms.w_value(x, delta), forms.grad_w(x, delta), forms.hess_w(x, delta)
    scale = 1 + abs(w) + np.linalg.norm(g)
    assert abs(x @ g - (2 - delta) * w) <= 1e-10 * scale
    np.testing.assert_allclose(h @ x, (1 - delta) * g, atol=1e-10 * scale)


@given(points, st.sampled_from([0.0, 0.25, 0.5, 0.9]))
def test_trace_identity(x, delta):
    r = np.linalg.norm(x)
    expected = (1 + delta) * (delta - 8) * forms.cartan_cubic(x) * r ** (-3 - delta)
    assert np.trace(forms.hess_w(x, delta)) == pytest.approx(expected, rel=1e-9, abs=1e-10 * r ** (-delta))


def test_batched_shapes(rng):
    x = random_ball(rng, 7)
    assert forms.w_value(x, 0.5).shape == (7,)
    assert forms.grad_w(x, 0.5).shape == (7, 5)
    assert forms.hess_w(x, 0.5).shape == (7, 5, 5)
    assert forms.conformal_hessian(x, 0.5).shape == (7, 5, 5)
    np.testing.assert_array_equal(forms.hess_w(x, 0.5)[3], forms.hess_w(x[3], 0.5))


def test_conformal_hessian_of_constant_is_zero():
    assert np.all(forms.conformal_hessian_from(240000.0, np.zeros(5), np.zeros((5, 5))) == 0.0)


def test_conformal_hessian_at_e1():
    expected = 240001.0 * forms.hess_w(E1, 0.5) - 9.0 / 8.0 * np.eye(5)
    np.testing.assert_allclose(forms.conformal_hessian(E1, 0.5, 240000.0), expected, rtol=1e-15, atol=1e-15)


def test_conformal_hessian_rejects_non_positive_u():
    with pytest.raises(NonPositiveU):
        forms.conformal_hessian(-E1, 0.5, 0.5)


def test_reference_grad_norm_examples():
    assert forms.grad_norm_sq_reference(1.0, 1.0) == pytest.approx(1.125)
    assert forms.grad_norm_sq_reference(0.0, 1.0) == pytest.approx(4.5)


def test_reference_grad_norm_is_half_the_oracle(rng):
    g = forms.grad_w(E1, 0.5)
    assert g @ g == pytest.approx(2.25)
    from chv.spectra import recover_orbit_param

    x = random_ball(rng, 200, 0.2, 1.0)
    s = np.linalg.norm(x, axis=1)
    g = forms.grad_w(x, 0.5)
    oracle = np.sum(g * g, axis=1)
    ref = forms.grad_norm_sq_reference(recover_orbit_param(x), s)
    np.testing.assert_allclose(oracle, 2 * ref, rtol=1e-9)


@pytest.mark.parametrize("bad", [-0.1, 1.0, 1.5, float("nan")])
def test_delta_validation(bad):
    with pytest.raises(ValueError):
        forms.check_delta(bad)


def test_delta_zero_gate():
    assert forms.check_delta(0.0) == 0.0
    with pytest.raises(ValueError):
        forms.check_delta(0.0, allow_zero=False)
    with pytest.raises(ValueError):
        forms.check_shift(0.0)
