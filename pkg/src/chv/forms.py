"""Closed forms for the Cartan cubic, the singular candidate and its conformal Hessian.

Points are arrays whose last axis has length 5, ordered ``(x1, x2, z1, z2, z3)``.
Every function broadcasts over leading axes, so a batch of ``N`` points is an
``(N, 5)`` array and the matching Hessians are ``(N, 5, 5)``.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import NonPositiveU, ZeroPoint

SQRT3 = math.sqrt(3.0)
R_MIN = 1e-3
DEFAULT_C = 240000.0


def check_delta(delta: float, allow_zero: bool = True) -> float:
    delta = float(delta)
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta!r}")
    if delta == 0.0 and not allow_zero:
        raise ValueError("delta = 0 is only admitted on the counterexample path")
    return delta


def check_shift(c: float) -> float:
    c = float(c)
    if not c > 0.0:
        raise ValueError(f"shift constant c must be positive, got {c!r}")
    return c


def _components(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 5:
        raise ValueError(f"expected points of R^5, got trailing shape {x.shape[-1]}")
    return x, np.moveaxis(x, -1, 0)


def cartan_cubic_parts(x1, x2, z1, z2, z3):
    """P evaluated on separate coordinates.

    Only ring operations are used, so the same expression serves plain floats,
    arrays and the jets of :mod:`chv.numerics`.
    """
    return (
        x1 * x1 * x1
        + 1.5 * x1 * (z1 * z1 + z2 * z2 - 2.0 * z3 * z3 - 2.0 * x2 * x2)
        + 1.5 * SQRT3 * (x2 * z1 * z1 - x2 * z2 * z2 + 2.0 * z1 * z2 * z3)
    )


def w_expression(xs, delta: float):
    """w = P / |x|^(1+delta) on a sequence of five coordinates (floats, arrays or jets)."""
    x1, x2, z1, z2, z3 = xs
    r2 = x1 * x1 + x2 * x2 + z1 * z1 + z2 * z2 + z3 * z3
    return cartan_cubic_parts(x1, x2, z1, z2, z3) * r2 ** (-(1.0 + delta) / 2.0)


def cartan_cubic(x):
    _, xs = _components(x)
    return cartan_cubic_parts(*xs)


def grad_cartan(x):
    x, (x1, x2, z1, z2, z3) = _components(x)
    k = 1.5 * SQRT3
    return np.stack(
        [
            3.0 * x1 * x1 + 1.5 * (z1 * z1 + z2 * z2 - 2.0 * z3 * z3 - 2.0 * x2 * x2),
            -6.0 * x1 * x2 + k * (z1 * z1 - z2 * z2),
            3.0 * x1 * z1 + 2.0 * k * (x2 * z1 + z2 * z3),
            3.0 * x1 * z2 + 2.0 * k * (z1 * z3 - x2 * z2),
            -6.0 * x1 * z3 + 2.0 * k * z1 * z2,
        ],
        axis=-1,
    )


def hess_cartan(x):
    x, (x1, x2, z1, z2, z3) = _components(x)
    k = 3.0 * SQRT3
    h = np.empty(x.shape + (5,))
    upper = {
        (0, 0): 6.0 * x1,
        (0, 1): -6.0 * x2,
        (0, 2): 3.0 * z1,
        (0, 3): 3.0 * z2,
        (0, 4): -6.0 * z3,
        (1, 1): -6.0 * x1,
        (1, 2): k * z1,
        (1, 3): -k * z2,
        (1, 4): np.zeros_like(x1),
        (2, 2): 3.0 * x1 + k * x2,
        (2, 3): k * z3,
        (2, 4): k * z2,
        (3, 3): 3.0 * x1 - k * x2,
        (3, 4): k * z1,
        (4, 4): -6.0 * x1,
    }
    for (i, j), v in upper.items():
        h[..., i, j] = v
        h[..., j, i] = v
    return h


def _radius(x, r_min: float):
    r = np.linalg.norm(x, axis=-1)
    if np.any(~(r >= r_min)):
        raise ZeroPoint(f"point within r_min={r_min:g} of the origin (|x| = {np.min(r):.3g})")
    return r


def w_value(x, delta: float, r_min: float = R_MIN):
    x = np.asarray(x, dtype=float)
    r = _radius(x, r_min)
    return cartan_cubic(x) / r ** (1.0 + delta)


def u_value(x, delta: float, c: float = DEFAULT_C, r_min: float = R_MIN):
    return c + w_value(x, delta, r_min)


def grad_w(x, delta: float, r_min: float = R_MIN):
    x = np.asarray(x, dtype=float)
    r = _radius(x, r_min)[..., None]
    P = cartan_cubic(x)[..., None]
    return grad_cartan(x) * r ** (-1.0 - delta) - (1.0 + delta) * P * r ** (-3.0 - delta) * x


def hess_w(x, delta: float, r_min: float = R_MIN):
    """Hessian of P * r^a with a = -(1+delta).

    D2 = r^a H + a r^(a-2) (g x^T + x g^T) + P (a r^(a-2) I + a (a-2) r^(a-4) x x^T)
    """
    x = np.asarray(x, dtype=float)
    r = _radius(x, r_min)[..., None, None]
    a = -(1.0 + delta)
    P = cartan_cubic(x)[..., None, None]
    g = grad_cartan(x)
    cross = g[..., :, None] * x[..., None, :]
    xx = x[..., :, None] * x[..., None, :]
    return (
        hess_cartan(x) * r**a
        + a * r ** (a - 2.0) * (cross + np.swapaxes(cross, -1, -2))
        + P * (a * r ** (a - 2.0) * np.eye(5) + a * (a - 2.0) * r ** (a - 4.0) * xx)
    )


# u = c + w differs from w by a constant
grad_u = grad_w
hess_u = hess_w


def conformal_hessian_from(u, grad, hess):
    """u D2u - |Du|^2 I / 2 from precomputed pieces."""
    u = np.asarray(u, dtype=float)[..., None, None]
    grad = np.asarray(grad, dtype=float)
    g2 = np.sum(grad * grad, axis=-1)[..., None, None]
    return u * np.asarray(hess, dtype=float) - 0.5 * g2 * np.eye(grad.shape[-1])


def conformal_hessian(x, delta: float, c: float = DEFAULT_C, r_min: float = R_MIN):
    x = np.asarray(x, dtype=float)
    u = u_value(x, delta, c, r_min)
    if np.any(~(u > 0.0)):
        raise NonPositiveU(f"u = c + w is not positive (min {np.min(u):.6g}); increase c")
    return conformal_hessian_from(u, grad_w(x, delta, r_min), hess_w(x, delta, r_min))


def grad_norm_sq_reference(p, s):
    """|Du|^2 on the orbit of parameter p at radius s, in the reference closed form.

    Kept verbatim. It is half of the value obtained by differentiating P directly,
    so consumers compare it against ``|grad_w|^2`` instead of trusting it.
    """
    p = np.asarray(p, dtype=float)
    return 9.0 * s * (16.0 - 3.0 * p * p * (p * p - 3.0) ** 2) / 32.0
