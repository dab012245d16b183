"""Independent numerical oracles.

Nothing here knows about the closed forms it is used to check: eigenvalues come
from cyclic Jacobi rotations, derivatives from forward-mode jets or central
differences, and orthogonal matrices from QR of Gaussian draws or from the
exponential of a skew-symmetric matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonConvergence

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


# -- symmetric eigensolver ---------------------------------------------------


def _offdiag_norm(a):
    n = a.shape[-1]
    off = a * (1.0 - np.eye(n))
    return np.sqrt(np.sum(off * off, axis=(-2, -1)))


def _sweep(a, v):
    n = a.shape[-1]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[:, p, q]
            nz = apq != 0.0
            with np.errstate(over="ignore"):
                # |theta| overflowing to inf gives t = 0, the correct limit
                theta = np.where(nz, (a[:, q, q] - a[:, p, p]) / (2.0 * np.where(nz, apq, 1.0)), 0.0)
                t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            t = np.where(nz, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            c_ = c[:, None]
            s_ = s[:, None]
            rp = a[:, p, :].copy()
            rq = a[:, q, :].copy()
            a[:, p, :] = c_ * rp - s_ * rq
            a[:, q, :] = s_ * rp + c_ * rq
            cp = a[:, :, p].copy()
            cq = a[:, :, q].copy()
            a[:, :, p] = c_ * cp - s_ * cq
            a[:, :, q] = s_ * cp + c_ * cq
            a[:, p, q] = 0.0
            a[:, q, p] = 0.0
            if v is not None:
                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = c_ * vp - s_ * vq
                v[:, :, q] = s_ * vp + c_ * vq


def jacobi_eigen(m, vectors: bool = False, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigenvalues of symmetric matrices in non-increasing order, by cyclic Jacobi.

    ``m`` may be a single matrix or a stack ``(..., n, n)``. Only the symmetric
    part is used. Each matrix stops rotating as soon as its own off-diagonal
    Frobenius norm drops below ``tol * ||m||_F``, so a result never depends on
    what else is in the batch.

    Returns ``w`` or ``(w, V)`` with ``m = V diag(w) V^T``.
    """
    m = np.asarray(m, dtype=float)
    batch = m.shape[:-2]
    n = m.shape[-1]
    a = m.reshape((-1, n, n))
    a = 0.5 * (a + np.swapaxes(a, -1, -2))
    v = np.broadcast_to(np.eye(n), a.shape).copy() if vectors else None
    scale = np.sqrt(np.sum(a * a, axis=(-2, -1)))

    active = np.arange(a.shape[0])
    for _ in range(max_sweeps + 1):
        off = _offdiag_norm(a[active])
        # NaN compares False, so non-finite matrices stay active and end in NonConvergence
        active = active[~(off <= tol * scale[active])]
        if active.size == 0:
            break
        sub = a[active]
        subv = v[active] if vectors else None
        _sweep(sub, subv)
        a[active] = sub
        if vectors:
            v[active] = subv
    else:
        raise NonConvergence(f"{active.size} matrices not diagonalised after {max_sweeps} sweeps")

    w = np.diagonal(a, axis1=-2, axis2=-1)
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1).reshape(batch + (n,))
    if not vectors:
        return w
    v = np.take_along_axis(v, order[:, None, :], axis=-1).reshape(batch + (n, n))
    return w, v


def operator_norm(spectrum):
    """|A| = max |eigenvalue|, given a spectrum along the last axis."""
    return np.max(np.abs(spectrum), axis=-1)


def congruence(o, h):
    """O^T H O, symmetrised so rounding cannot leave an asymmetric result."""
    r = np.swapaxes(o, -1, -2) @ h @ o
    return 0.5 * (r + np.swapaxes(r, -1, -2))


# -- forward-mode jets ---------------------------------------------------------


class Jet:
    """Truncated second-order Taylor jet: value, gradient and Hessian.

    ``val`` has the batch shape ``B``, ``grad`` is ``B + (n,)`` and ``hess`` is
    ``B + (n, n)``. Arithmetic propagates all three exactly (up to rounding),
    and every Hessian update is a symmetric expression.
    """

    __slots__ = ("val", "grad", "hess")
    __array_priority__ = 1000

    def __init__(self, val, grad, hess):
        self.val = val
        self.grad = grad
        self.hess = hess

    @classmethod
    def variables(cls, x):
        """One jet per coordinate of ``x`` (shape ``B + (n,)``), seeded with unit gradients."""
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        zeros_h = np.zeros(x.shape[:-1] + (n, n))
        out = []
        for i in range(n):
            g = np.zeros(x.shape)
            g[..., i] = 1.0
            out.append(cls(x[..., i], g, zeros_h))
        return out

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        other = np.asarray(other, dtype=float)
        n = self.grad.shape[-1]
        return Jet(
            np.broadcast_to(other, np.shape(self.val)),
            np.zeros(self.grad.shape),
            np.zeros(self.hess.shape[:-2] + (n, n)),
        )

    def _chain(self, f, d1, d2):
        g = self.grad
        outer = g[..., :, None] * g[..., None, :]
        return Jet(f, d1[..., None] * g, d1[..., None, None] * self.hess + d2[..., None, None] * outer)

    def __add__(self, other):
        o = self._lift(other)
        return Jet(self.val + o.val, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            k = np.asarray(other, dtype=float)
            return Jet(self.val * k, self.grad * k[..., None], self.hess * k[..., None, None])
        a, b = self, other
        cross = a.grad[..., :, None] * b.grad[..., None, :]
        return Jet(
            a.val * b.val,
            a.grad * b.val[..., None] + b.grad * a.val[..., None],
            a.hess * b.val[..., None, None]
            + b.hess * a.val[..., None, None]
            + cross
            + np.swapaxes(cross, -1, -2),
        )

    __rmul__ = __mul__

    def __pow__(self, k):
        if isinstance(k, Jet):
            raise TypeError("jet exponents are not supported")
        k = float(k)
        v = np.asarray(self.val, dtype=float)
        if k == 0.0:
            return self._lift(np.ones_like(v))
        if k.is_integer():
            if k < 0 and np.any(v == 0.0):
                raise DomainError(f"power {k:g} differentiated at zero")
        elif np.any(v <= 0.0):
            raise DomainError(f"real power {k:g} differentiated at a non-positive base")
        d1 = k * v ** (k - 1.0)
        d2 = k * (k - 1.0) * v ** (k - 2.0) if k != 1.0 else np.zeros_like(v)
        return self._chain(v**k, d1, d2)

    def reciprocal(self):
        v = np.asarray(self.val, dtype=float)
        if np.any(v == 0.0):
            raise DomainError("reciprocal of a jet with zero value")
        inv = 1.0 / v
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def sqrt(self):
        v = np.asarray(self.val, dtype=float)
        if np.any(v <= 0.0):
            raise DomainError("square root differentiated at a non-positive value")
        r = np.sqrt(v)
        return self._chain(r, 0.5 / r, -0.25 / (r * v))


def _jet_of(f, x):
    x = np.asarray(x, dtype=float)
    out = f(Jet.variables(x))
    if not isinstance(out, Jet):
        raise TypeError("field did not depend on its arguments")
    return out


def ad_gradient(f, x):
    """Gradient of the scalar field ``f`` at ``x``.

    ``f`` receives a list of five coordinates and may use ``+ - * /``, real
    powers and :meth:`Jet.sqrt`.
    """
    return _jet_of(f, x).grad


def ad_hessian(f, x):
    """Hessian of ``f`` at ``x``, averaged with its transpose so it is exactly symmetric."""
    h = _jet_of(f, x).hess
    return 0.5 * (h + np.swapaxes(h, -1, -2))


# -- central differences -------------------------------------------------------


def _call(f, x):
    return np.asarray(f(list(np.moveaxis(x, -1, 0))), dtype=float)


def fd_gradient(f, x, h: float = 1e-5):
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    e = np.eye(n) * h
    return np.stack([(_call(f, x + e[i]) - _call(f, x - e[i])) / (2.0 * h) for i in range(n)], axis=-1)


def fd_hessian(f, x, h: float = 1e-4):
    """Four-point central second differences. Accuracy degrades near singular points."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    e = np.eye(n) * h
    out = np.empty(x.shape + (n,))
    for i in range(n):
        for j in range(i, n):
            v = (
                _call(f, x + e[i] + e[j])
                - _call(f, x + e[i] - e[j])
                - _call(f, x - e[i] + e[j])
                + _call(f, x - e[i] - e[j])
            ) / (4.0 * h * h)
            out[..., i, j] = v
            out[..., j, i] = v
    return out


# -- randomness ------------------------------------------------------------------


@dataclass(frozen=True)
class RngState:
    """A reproducible random stream addressed by ``(seed, stream)``.

    The generator is rebuilt from the pair on every call, so a draw depends only
    on its address and never on which process or in which order it is made.
    """

    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and 0 <= v < 2**64):
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.Philox(ss))


def haar_from_gaussian(g):
    """Map standard Gaussian matrices to Haar-distributed rotations (det = +1)."""
    g = np.asarray(g, dtype=float)
    q, r = np.linalg.qr(g)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d = np.where(d == 0.0, 1.0, d)
    q = q * d[..., None, :]
    neg = np.linalg.det(q) < 0.0
    q[..., :, 0] = np.where(neg[..., None], -q[..., :, 0], q[..., :, 0])
    return q


def haar_so5(rng: RngState):
    return haar_from_gaussian(rng.generator().standard_normal((5, 5)))


# -- skew-symmetric chart of SO(5) -------------------------------------------------

_IU = np.triu_indices(5, k=1)


def skew_matrix(s):
    """Assemble 5x5 skew-symmetric matrices from their 10 strict-upper entries (row-major)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape[:-1] + (5, 5))
    out[..., _IU[0], _IU[1]] = s
    out[..., _IU[1], _IU[0]] = -s
    return out


def _expm_scaled(a, k: int, terms: int = 18):
    a = a / 2.0**k
    result = np.broadcast_to(np.eye(a.shape[-1]), a.shape).copy()
    term = result.copy()
    for j in range(1, terms + 1):
        term = term @ a / j
        result = result + term
    for _ in range(k):
        result = result @ result
    return result


def skew_exp(s):
    """exp of the skew-symmetric matrix with parameters ``s`` (scaling and squaring)."""
    a = skew_matrix(s)
    batch = a.shape[:-2]
    flat = a.reshape((-1, 5, 5))
    norm = np.max(np.sum(np.abs(flat), axis=-1), axis=-1)
    ks = np.where(norm > 0.5, np.ceil(np.log2(np.maximum(norm, 1e-300) / 0.5)), 0).astype(int)
    out = np.empty_like(flat)
    for k in np.unique(ks):
        sel = ks == k
        out[sel] = _expm_scaled(flat[sel], int(k))
    return out.reshape(batch + (5, 5))


def orthogonality_defect(o):
    o = np.asarray(o, dtype=float)
    return np.max(np.abs(np.swapaxes(o, -1, -2) @ o - np.eye(o.shape[-1])), axis=(-2, -1))
