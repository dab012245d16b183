"""Eigenvalues of D2w on the unit sphere as functions of the orbit parameter p.

On the unit sphere the spectrum of ``hess_w`` depends only on ``p``, which is
recovered from the value of P through ``P(x/|x|) = (3p - p^3) / 2``. For
``delta = 1/2`` the five branches ``mu_1..mu_5`` are known in closed form and the
ordered spectrum is assembled from them by a case table switching at
``p0 = 5^(-1/4)``.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .errors import RangeViolation
from .forms import cartan_cubic

P0_HALF = 5.0 ** -0.25
ORBIT_MAXITER = 80
ORBIT_TOL = 1e-14


def _p(p):
    return np.asarray(p, dtype=float)


def mu_spectrum_half(p):
    """The five unordered branches (mu_1, ..., mu_5) at delta = 1/2, stacked on the last axis."""
    p = _p(p)
    p2 = p * p
    root3 = np.sqrt(12.0 - 3.0 * p2)
    root5 = np.sqrt(105.0 * p2**3 - 630.0 * p2**2 + 945.0 * p2 + 64.0)
    return np.stack(
        [
            3.0 * p * (p2 + 1.0) / 4.0,
            (3.0 * p * (p2 - 5.0) + 6.0 * root3) / 4.0,
            (3.0 * p * (p2 - 5.0) - 6.0 * root3) / 4.0,
            (27.0 * p * (p2 - 3.0) + 3.0 * root5) / 16.0,
            (27.0 * p * (p2 - 3.0) - 3.0 * root5) / 16.0,
        ],
        axis=-1,
    )


def discriminant(p, delta):
    p = _p(p)
    return (6.0 - delta) * (4.0 - delta) * (2.0 - delta) * delta * (p * p - 3.0) ** 2 * p * p + 144.0 * (
        delta - 2.0
    ) ** 2


def mu_spectrum_general(p, delta):
    """The general-delta branches in their reference form.

    These do not reduce to :func:`mu_spectrum_half` at ``delta = 1/2`` and fail
    the trace identity; they are evaluated verbatim so the eigenvalue oracle can
    show the disagreement.
    """
    p = _p(p)
    p2 = p * p
    root3 = 3.0 * np.sqrt(12.0 - 3.0 * p2)
    rootd = np.sqrt(discriminant(p, delta))
    lin = p * (p2 * delta - 3.0 - 3.0 * delta)
    quad = p * delta * (6.0 - delta) * (3.0 - p2)
    return np.stack(
        [
            p * (p2 * delta + 6.0 - 3.0 * delta) / 2.0,
            (lin + root3) / 2.0,
            (lin - root3) / 2.0,
            -(quad + rootd) / 4.0,
            -(quad - rootd) / 4.0,
        ],
        axis=-1,
    )


def p0_general(delta):
    delta = _p(delta)
    return 3.0**0.25 * np.sqrt(1.0 - delta) / (3.0 + 2.0 * delta - delta * delta) ** 0.25


def crossing_p0():
    """Root of mu_1 - mu_4 in (0, 1), found numerically."""
    def gap(p):
        mu = mu_spectrum_half(p)
        return float(mu[0] - mu[3])

    return brentq(gap, 0.1, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def ordered_spectrum_half(p, p0: float = P0_HALF):
    """lambda_1 >= ... >= lambda_5 assembled from the branches by the case table.

    Intervals are closed; at ``p = +-p0`` the two candidate branches coincide.
    """
    p = _p(p)
    mu1, mu2, mu3, mu4, mu5 = np.moveaxis(mu_spectrum_half(p), -1, 0)
    lam2 = np.where(p <= p0, mu4, mu1)
    lam3 = np.where(p <= -p0, mu5, np.where(p <= p0, mu1, mu4))
    lam4 = np.where(p <= -p0, mu1, mu5)
    return np.stack([mu2, lam2, lam3, lam4, mu3], axis=-1)


def _derivative_terms(p):
    p = _p(p)
    p2 = p * p
    root3 = np.sqrt(12.0 - 3.0 * p2)
    root5 = np.sqrt(105.0 * p2**3 - 630.0 * p2**2 + 945.0 * p2 + 64.0)
    base = -3.0 * (5.0 - 3.0 * p2) / 4.0
    tilt = 9.0 * p / (2.0 * root3)
    frac = 35.0 * p * (3.0 - p2) / (3.0 * root5)
    k = 81.0 * (1.0 - p2) / 16.0
    return p2, base, tilt, frac, k


def mu_derivatives(p):
    """d mu_i / dp for the delta = 1/2 branches."""
    p2, base, tilt, frac, k = _derivative_terms(p)
    return np.stack(
        [3.0 * (3.0 * p2 + 1.0) / 4.0, base - tilt, base + tilt, k * (frac - 1.0), -k * (frac + 1.0)],
        axis=-1,
    )


def mu_derivatives_reference(p):
    """The reference derivative list, kept verbatim.

    Its second and third entries carry the opposite sign on the square-root term,
    so they are the derivatives of mu_3 and mu_2 respectively.
    """
    p2, base, tilt, frac, k = _derivative_terms(p)
    return np.stack(
        [3.0 * (3.0 * p2 + 1.0) / 4.0, base + tilt, base - tilt, k * (frac - 1.0), -k * (frac + 1.0)],
        axis=-1,
    )


def derivative_bound(grid_step: float = 1e-4):
    """Max of |d_i(p)| over a uniform grid of [-1, 1].

    Returns ``(value, p_at_max, branch_index)`` with a 0-based branch index.
    """
    if not 0.0 < grid_step <= 1e-3:
        raise ValueError("grid_step must lie in (0, 1e-3]")
    grid = p_grid(grid_step)
    d = np.abs(mu_derivatives(grid))
    flat = int(np.argmax(d))
    i, j = np.unravel_index(flat, d.shape)
    return float(d[i, j]), float(grid[i]), int(j)


def p_grid(grid_step: float):
    n = int(round(2.0 / grid_step))
    return np.linspace(-1.0, 1.0, n + 1)


def orbit_value(p):
    """P on the reference circle point (p, 0, sqrt(1-p^2), 0, 0)."""
    p = _p(p)
    return (3.0 * p - p * p * p) / 2.0


def orbit_point(p):
    p = _p(p)
    z = np.zeros_like(p)
    return np.stack([p, z, np.sqrt(np.maximum(1.0 - p * p, 0.0)), z, z], axis=-1)


def recover_orbit_param(x):
    """The p in [-1, 1] whose reference-circle point shares the spectrum of D2w at x.

    Solves ``(3p - p^3)/2 = P(x/|x|)``. The left side is increasing on [-1, 1],
    so Newton steps are kept inside a shrinking bisection bracket. The start is
    the trigonometric root ``2 sin(asin(v)/3)``, which stays accurate at the
    double roots p = +-1 where Newton alone stalls near sqrt(eps).
    """
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    v = cartan_cubic(x) / r**3
    if np.any(~(np.abs(v) <= 1.0 + 1e-12)):
        raise RangeViolation(f"|P(x/|x|)| = {np.max(np.abs(v))!r} exceeds 1")
    v = np.clip(v, -1.0, 1.0)

    lo = np.full(v.shape, -1.0)
    hi = np.full(v.shape, 1.0)
    p = 2.0 * np.sin(np.arcsin(v) / 3.0)
    for _ in range(ORBIT_MAXITER):
        g = orbit_value(p) - v
        lo = np.where(g < 0.0, p, lo)
        hi = np.where(g > 0.0, p, hi)
        slope = 1.5 * (1.0 - p * p)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = p - g / slope
        inside = (slope > 0.0) & (newton > lo) & (newton < hi)
        nxt = np.where(inside, newton, 0.5 * (lo + hi))
        nxt = np.where(g == 0.0, p, nxt)
        done = np.abs(nxt - p) <= ORBIT_TOL
        p = nxt
        if np.all(done):
            break
    return p


def oddness_check(p, tol: float = 1e-10) -> bool:
    """lambda_1(-p) = -lambda_5(p), lambda_2(-p) = -lambda_4(p), lambda_3(-p) = -lambda_3(p)."""
    p = _p(p)
    lam = ordered_spectrum_half(p)
    mirrored = ordered_spectrum_half(-p)
    return bool(np.all(np.abs(mirrored + lam[..., ::-1]) <= tol))


def k_metric(p, q, s, t):
    return np.abs(_p(s) - _p(t)) + np.abs(_p(p) - _p(q))
