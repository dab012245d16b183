import numpy as np
import pytest

from chv import forms, spectra, verify
from chv.errors import InsufficientSamples
from chv.numerics import RngState, jacobi_eigen, operator_norm, orthogonality_defect

from conftest import E1

N = 3000


# -- sampling --------------------------------------------------------------------------


def test_sample_pair_is_reproducible():
    a = verify.sample_pair(RngState(42, 0))
    b = verify.sample_pair(RngState(42, 0))
    assert a.a.tobytes() == b.a.tobytes() and a.O.tobytes() == b.O.tobytes()


def test_sample_pair_invariants():
    a, b, o = verify.draw_pairs(3, 0, 2000, 1e-3)
    for x in (a, b):
        r = np.linalg.norm(x, axis=1)
        assert np.all((r >= 1e-3) & (r <= 1.0))
    assert np.max(orthogonality_defect(o)) < 1e-12
    assert np.all(np.abs(np.linalg.det(o) - 1) < 1e-12)


def test_sample_radius_distribution():
    r_min = 0.2
    a, _, _ = verify.draw_pairs(11, 0, 20000, r_min)
    frac = np.mean(np.linalg.norm(a, axis=1) <= 0.5)
    expected = (0.5**5 - r_min**5) / (1 - r_min**5)
    sigma = np.sqrt(expected * (1 - expected) / len(a))
    assert abs(frac - expected) <= 3 * sigma


@pytest.mark.parametrize("bad", [0.0, 0.5, -1.0])
def test_sample_pair_rejects_bad_r_min(bad):
    with pytest.raises(ValueError):
        verify.sample_pair(RngState(0, 0), bad)


def test_samples_do_not_depend_on_range():
    a1, _, _ = verify.draw_pairs(5, 0, 50)
    a2, _, _ = verify.draw_pairs(5, 30, 40)
    np.testing.assert_array_equal(a1[30:40], a2)


def test_sample_points_cached_and_read_only():
    x = verify.sample_points(0, 10)
    assert x is verify.sample_points(0, 10)
    with pytest.raises(ValueError):
        x[0, 0] = 1.0
    u = verify.sample_points(0, 10, unit=True)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0)


# -- decomposition ------------------------------------------------------------------------


def test_decomposition_identity_on_samples():
    a, b, o = verify.draw_pairs(0, 0, 500)
    d = verify.diff_matrices(a, b, o, 0.5)
    norm = np.max(np.abs(d.A_diff), axis=(-2, -1))
    assert np.all(d.residual(240000.0) <= 1e-9 * norm)


def test_unit_weight_leaves_half_the_gradient_term():
    a, b, o = verify.draw_pairs(0, 0, 200)
    d = verify.diff_matrices(a, b, o, 0.5)
    np.testing.assert_allclose(d.residual(240000.0, grad_weight=1.0), np.abs(d.grad_diff) / 2, rtol=1e-6, atol=1e-9)


def test_identical_pair_gives_zero_difference():
    x = np.array([0.3, -0.2, 0.5, 0.1, 0.4])
    d = verify.diff_matrices(x, x, np.eye(5), 0.5)
    assert np.all(d.M1 == 0) and np.all(d.M2 == 0) and d.grad_diff == 0 and np.all(d.A_diff == 0)


# -- pair checkers --------------------------------------------------------------------------


def test_lemma33_same_ray_example():
    a, b = E1, 0.5 * E1
    ga, gb = forms.grad_w(a, 0.5), forms.grad_w(b, 0.5)
    diff = ga @ ga - gb @ gb
    K = spectra.k_metric(1.0, 1.0, 1.0, 0.5)
    assert K == 0.5
    assert diff == pytest.approx(1.125)
    assert diff / K == pytest.approx(2.25)


def test_lemma33_sampled():
    r = verify.check_lemma33(N)
    assert r.passed and r.worst <= 16 and r.samples == N


def test_lemma34_same_ray_example():
    # O = I, b = a/2: D2w(b) = 2^(1/2) D2w(a), so |M1| = (sqrt2 - 1) |D2w(a)|
    d = verify.diff_matrices(E1, 0.5 * E1, np.eye(5), 0.5)
    m = operator_norm(jacobi_eigen(d.M1))
    assert m == pytest.approx((np.sqrt(2) - 1) * 7.5, rel=1e-12)


def test_lemma34_sampled():
    r = verify.check_lemma34(N)
    assert r.passed and r.worst >= 0.125
    assert "skipped_K0=0" in r.notes


def test_lemma35_identity_pair_vanishes():
    x = np.array([0.1, 0.5, -0.3, 0.2, 0.2])
    assert np.all(verify.diff_matrices(x, x, np.eye(5), 0.5).M2 == 0)


def test_lemma35_same_ray_factorisation(rng):
    # M2 = (s - t) w(x) D2w(x) for a = s x, b = t x with |x| = 1
    x = rng.standard_normal((100, 5))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    s = rng.uniform(0.01, 1, 100)
    t = rng.uniform(0.01, 1, 100)
    d = verify.diff_matrices(s[:, None] * x, t[:, None] * x, np.broadcast_to(np.eye(5), (100, 5, 5)), 0.5)
    expected = (s - t)[:, None, None] * forms.w_value(x, 0.5)[:, None, None] * forms.hess_w(x, 0.5)
    np.testing.assert_allclose(d.M2, expected, atol=1e-12)
    m2 = operator_norm(jacobi_eigen(d.M2))
    assert np.all(m2 <= 7.5 * np.abs(s - t) + 1e-12)


def test_same_ray_constant_is_seven_and_a_half():
    d = verify.diff_matrices(E1, 0.5 * E1, np.eye(5), 0.5)
    assert operator_norm(jacobi_eigen(d.M2)) == pytest.approx(7.5 * 0.5)


def test_lemma35_reports_counterexamples():
    r = verify.check_lemma35(N)
    # the rotated pairs break the bound; the checker must say so
    assert not r.passed
    assert r.worst > 10
    assert set(r.witness) >= {"a", "b", "O", "K"}
    d = verify.diff_matrices(np.array(r.witness["a"]), np.array(r.witness["b"]), np.array(r.witness["O"]), 0.5)
    assert operator_norm(jacobi_eigen(d.M2)) / r.witness["K"] == pytest.approx(r.worst, rel=1e-9)


def test_prop21_constants():
    assert verify.prop21_formula(0.5) == pytest.approx(5000.0)
    assert verify.prop21_constant(0.5) == 1000.0


def test_prop21_sampled():
    r = verify.check_prop21(0.5, N)
    assert r.passed and 1 <= r.worst <= 1000


def test_hyperbolicity_sampled():
    r = verify.check_hyperbolicity(0.5, 240000.0, N)
    assert r.passed and r.worst <= 60006.5
    assert "6007" in r.notes


def test_hyperbolicity_rejects_delta_zero():
    with pytest.raises(ValueError):
        verify.check_hyperbolicity(0.0, 240000.0, 10)


def test_hyperbolicity_ratio_helper():
    np.testing.assert_array_equal(verify.hyperbolicity_ratio([2.0, 1.0, 0.0], [-1.0, -4.0, -1.0]), [2.0, 4.0, np.inf])


def test_decomposition_check():
    r = verify.check_decomposition(0.5, 240000.0, N)
    assert r.passed and r.worst <= 1e-9


def test_search_dominates_sampling():
    mc = verify.check_hyperbolicity(0.5, 240000.0, N)
    r = verify.worst_ratio_search(0.5, 240000.0, iters=10, restarts=4, n=N)
    assert r.passed and r.worst >= mc.worst
    for key in ("a", "b"):
        radius = np.linalg.norm(r.witness[key])
        assert 1e-3 <= radius <= 1.0 + 1e-15


def test_search_without_restarts_reports_seed_sample():
    mc = verify.check_hyperbolicity(0.5, 240000.0, N)
    r = verify.worst_ratio_search(0.5, 240000.0, iters=5, restarts=0, n=N)
    assert r.worst == pytest.approx(mc.worst, rel=1e-12)
    with pytest.raises(ValueError):
        verify.worst_ratio_search(iters=0, n=N)


def test_pair_statistics_independent_of_workers():
    one = verify.pair_statistics(9, 5000, workers=1)
    two = verify.pair_statistics(9, 5000, workers=2)
    for k in one:
        assert one[k].tobytes() == two[k].tobytes(), k


def test_zero_samples_rejected():
    with pytest.raises(InsufficientSamples):
        verify.check_spectrum_match(0.5, 0)
    with pytest.raises(InsufficientSamples):
        verify.pair_statistics(0, 0)


# -- point and grid checkers ------------------------------------------------------------


def test_spectrum_match_single_point():
    r = verify.check_spectrum_match(0.5, 1, points=E1[None, :])
    assert r.passed and r.worst < 1e-9


def test_spectrum_variant_fails_near_one():
    r = verify.check_spectrum_match(0.5, 1, variant=True, points=E1[None, :])
    assert not r.passed and r.worst >= 1.0


def test_arbitration():
    r = verify.check_arbitration(500)
    assert r.passed


@pytest.mark.parametrize("delta", [0.0, 0.25, 0.5, 0.9])
def test_trace_identity_check(delta):
    assert verify.check_trace_identity(delta, 1000).passed


def test_trace_identity_examples():
    assert np.trace(forms.hess_w(E1, 0.0)) == pytest.approx(-8.0)
    assert sum([2, 2, 2, -7, -7]) == -8
    assert np.trace(forms.hess_w(spectra.orbit_point(1.0), 0.5)) == pytest.approx(-11.25)
    assert np.trace(forms.hess_w(spectra.orbit_point(0.0), 0.5)) == pytest.approx(0.0, abs=1e-14)


def test_identity_checks():
    assert verify.check_harmonicity(1000).passed
    assert verify.check_euler(0.5, 1000).passed
    r = verify.check_eiconal(1000)
    assert r.passed and "9" in r.notes


def test_weyl_trivial_pairs():
    a = np.diag([3.0, 1.0, 0.0, -2.0, -5.0])
    r = verify._weyl_report(a[None], np.zeros((1, 5, 5)))
    assert r.passed and abs(r.worst) < 1e-12
    b = np.diag([1.0, 2.0, -1.0, 0.5, 0.0])
    assert verify._weyl_report(a[None], b[None]).passed


def test_weyl_sampled():
    assert verify.check_weyl(1000).passed


def test_delta0_construction():
    r = verify.counterexample_delta0()
    np.testing.assert_allclose(r.witness["spectrum_hess_w_a"], [2, 2, 2, -7, -7], atol=1e-12)
    # the exact difference is (1 - 1/4) D2w(a) - (4 - 1)/2 I, which touches zero
    np.testing.assert_allclose(r.witness["spectrum_difference"], [0, 0, 0, -6.75, -6.75], atol=1e-12)
    assert "semidefinite" in r.notes


def test_delta0_difference_does_not_depend_on_c():
    a = verify.counterexample_delta0(1.0).witness["spectrum_difference"]
    b = verify.counterexample_delta0(240000.0).witness["spectrum_difference"]
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_grid_checks():
    assert verify.check_ordering_table(1e-4).passed
    assert verify.check_oddness(1e-4).passed
    assert verify.check_discriminant().passed
    assert verify.check_p0().passed
    r = verify.check_derivatives(1e-4)
    assert r.passed and 81 / 16 < r.worst < 10
    with pytest.raises(ValueError):
        verify.check_ordering_table(0.01)


def test_remark31_spot_check():
    assert verify.check_remark31(n=1000).passed


def test_reports_serialise():
    r = verify.check_p0()
    d = r.to_dict()
    assert d["name"] == "p0" and d["passed"] is True
