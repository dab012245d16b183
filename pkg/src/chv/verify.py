"""Checkers: each claim about the singular candidate becomes a sampled or gridded statistic.

A checker returns a :class:`CheckReport`. Passing means no violation was found
among the samples drawn, not that the claim is proved. Samples are addressed by
``(seed, index)`` and evaluated in fixed-size chunks, so a report is the same
whichever number of worker processes computed it.
"""
from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import forms, spectra
from .errors import InsufficientSamples
from .forms import DEFAULT_C, R_MIN
from .numerics import (
    RngState,
    ad_hessian,
    congruence,
    haar_from_gaussian,
    jacobi_eigen,
    operator_norm,
    skew_exp,
)

# disjoint stream ranges per kind of draw
PAIR_STREAM = 0
POINT_STREAM = 1 << 60
SYM_STREAM = 2 << 60
UNIT_STREAM = 3 << 60

CHUNK = 2048
K_EPS = 1e-12
N_EPS = 1e-10
A_EPS = 1e-8

LEMMA33_BOUND = 16.0
LEMMA34_BOUND = 1.0 / 8.0
LEMMA35_BOUND = 10.0
PROP21_BOUND = 1000.0
HYPERBOLICITY_BOUND = 240026.0 / 4.0
REFERENCE_C = 6007.0
REFERENCE_DELTA0_HESSIAN = np.array([2.0, 2.0, 2.0, -7.0, -7.0])
REFERENCE_DELTA0_DIFFERENCE = np.array([-5.75, -5.75, -5.75, -10.25, -10.25])


@dataclass
class CheckReport:
    name: str
    passed: bool
    samples: int
    worst: float
    bound: float | None
    tolerance: float
    witness: dict = field(default_factory=dict)
    notes: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PairSample:
    a: np.ndarray
    b: np.ndarray
    O: np.ndarray

    def to_dict(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist(), "O": self.O.tolist()}


@dataclass
class DiffMatrices:
    """Pieces of A^u(a) - O^T A^u(b) O, each computed on its own."""

    M1: np.ndarray
    M2: np.ndarray
    grad_diff: np.ndarray
    A_diff: np.ndarray

    def rebuild(self, c: float, grad_weight: float = 0.5):
        """c M1 + M2 - grad_weight * grad_diff * I.

        The conformal Hessian carries |Du|^2 / 2, so 0.5 reproduces A_diff; the
        reference display uses weight 1.
        """
        return c * self.M1 + self.M2 - grad_weight * np.asarray(self.grad_diff)[..., None, None] * np.eye(5)

    def residual(self, c: float, grad_weight: float = 0.5):
        """Entrywise max |A_diff - rebuild(c, grad_weight)|."""
        return np.max(np.abs(self.A_diff - self.rebuild(c, grad_weight)), axis=(-2, -1))


# -- sampling ------------------------------------------------------------------------


def _ball_point(gen: np.random.Generator, r_min: float):
    d = gen.standard_normal(5)
    d /= np.linalg.norm(d)
    u = gen.random()
    return d * (r_min**5 + u * (1.0 - r_min**5)) ** 0.2


def sample_pair(rng: RngState, r_min: float = R_MIN) -> PairSample:
    """a, b uniform on the annulus r_min <= |x| <= 1 and O Haar on SO(5)."""
    if not 0.0 < r_min < 0.5:
        raise ValueError("r_min must lie in (0, 0.5)")
    gen = rng.generator()
    a = _ball_point(gen, r_min)
    b = _ball_point(gen, r_min)
    o = haar_from_gaussian(gen.standard_normal((5, 5)))
    return PairSample(a, b, o)


def draw_pairs(seed: int, start: int, stop: int, r_min: float = R_MIN):
    pairs = [sample_pair(RngState(seed, PAIR_STREAM + i), r_min) for i in range(start, stop)]
    if not pairs:
        return np.empty((0, 5)), np.empty((0, 5)), np.empty((0, 5, 5))
    return (
        np.array([s.a for s in pairs]),
        np.array([s.b for s in pairs]),
        np.array([s.O for s in pairs]),
    )


@functools.lru_cache(maxsize=8)
def sample_points(seed: int, n: int, r_min: float = R_MIN, unit: bool = False):
    """n points, uniform on the annulus or (``unit=True``) on the unit sphere."""
    base = UNIT_STREAM if unit else POINT_STREAM
    out = np.empty((n, 5))
    for i in range(n):
        gen = RngState(seed, base + i).generator()
        if unit:
            d = gen.standard_normal(5)
            out[i] = d / np.linalg.norm(d)
        else:
            out[i] = _ball_point(gen, r_min)
    out.setflags(write=False)
    return out


def _require(n: int):
    if n < 1:
        raise InsufficientSamples("at least one sample is required")


# -- pair statistics -------------------------------------------------------------------


def diff_matrices(a, b, o, delta: float, c: float = DEFAULT_C, r_min: float = R_MIN) -> DiffMatrices:
    ha = forms.hess_w(a, delta, r_min)
    hbo = congruence(o, forms.hess_w(b, delta, r_min))
    wa = forms.w_value(a, delta, r_min)[..., None, None]
    wb = forms.w_value(b, delta, r_min)[..., None, None]
    ga = forms.grad_w(a, delta, r_min)
    gb = forms.grad_w(b, delta, r_min)
    return DiffMatrices(
        M1=ha - hbo,
        M2=wa * ha - wb * hbo,
        grad_diff=np.sum(ga * ga, axis=-1) - np.sum(gb * gb, axis=-1),
        A_diff=forms.conformal_hessian(a, delta, c, r_min)
        - congruence(o, forms.conformal_hessian(b, delta, c, r_min)),
    )


def _closed_spectrum(x, delta: float, p):
    """Ordered spectrum of D2w at x from the delta = 1/2 closed forms and homogeneity."""
    r = np.linalg.norm(x, axis=-1)
    return spectra.ordered_spectrum_half(p) * r[..., None] ** (-delta)


def _pair_chunk(seed: int, start: int, stop: int, r_min: float, delta: float, c: float):
    a, b, o = draw_pairs(seed, start, stop, r_min)
    s = np.linalg.norm(a, axis=-1)
    t = np.linalg.norm(b, axis=-1)
    p = spectra.recover_orbit_param(a)
    q = spectra.recover_orbit_param(b)
    d = diff_matrices(a, b, o, delta, c, r_min)
    ev1 = jacobi_eigen(d.M1)
    ev2 = jacobi_eigen(d.M2)
    evA = jacobi_eigen(d.A_diff)
    out = {
        "index": np.arange(start, stop),
        "s": s,
        "t": t,
        "p": p,
        "q": q,
        "K": spectra.k_metric(p, q, s, t),
        "m1_top": ev1[:, 0],
        "m1_bottom": ev1[:, -1],
        "m1_norm": operator_norm(ev1),
        "m2_norm": operator_norm(ev2),
        "grad_diff": d.grad_diff,
        "grad_a": np.sum(forms.grad_w(a, delta, r_min) ** 2, axis=-1),
        "a_top": evA[:, 0],
        "a_bottom": evA[:, -1],
        "a_norm": operator_norm(evA),
        "residual": d.residual(c),
        "residual_unit_weight": d.residual(c, grad_weight=1.0),
        "wa": forms.w_value(a, delta, r_min),
        "wb": forms.w_value(b, delta, r_min),
    }
    if delta == 0.5:
        la = _closed_spectrum(a, delta, p)
        lb = _closed_spectrum(b, delta, q)
        out["m2_aligned"] = np.max(np.abs(out["wa"][:, None] * la - out["wb"][:, None] * lb), axis=-1)
    return out


def _chunks(n: int):
    return [(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]


def _run_chunks(fn, n: int, workers: int):
    ranges = _chunks(n)
    if workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, *zip(*ranges)))
    else:
        parts = [fn(lo, hi) for lo, hi in ranges]
    return parts


@functools.lru_cache(maxsize=4)
def _pair_stats_cached(seed, n, r_min, delta, c, workers):
    fn = functools.partial(_pair_chunk_args, seed, r_min, delta, c)
    parts = _run_chunks(fn, n, workers)
    if not parts:
        return {}
    return {k: np.concatenate([part[k] for part in parts]) for k in parts[0]}


def _pair_chunk_args(seed, r_min, delta, c, start, stop):
    return _pair_chunk(seed, start, stop, r_min, delta, c)


def pair_statistics(seed: int, n: int, r_min: float = R_MIN, delta: float = 0.5, c: float = DEFAULT_C, workers: int = 1):
    """Per-sample quantities shared by the pair checkers, keyed by sample index."""
    _require(n)
    return _pair_stats_cached(int(seed), int(n), float(r_min), float(delta), float(c), max(1, int(workers)))


def hyperbolicity_ratio(top, bottom):
    """max(rho, 1/rho) with rho = -top/bottom; inf when the extremes do not straddle 0."""
    top = np.asarray(top, dtype=float)
    bottom = np.asarray(bottom, dtype=float)
    ok = (top > 0.0) & (bottom < 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(ok, -top / np.where(ok, bottom, -1.0), 1.0)
    return np.where(ok, np.maximum(rho, 1.0 / rho), np.inf)


def _pair_witness(seed: int, idx: int, r_min: float, **extra) -> dict:
    sample = sample_pair(RngState(seed, PAIR_STREAM + int(idx)), r_min)
    w = {"index": int(idx)}
    w.update(sample.to_dict())
    w.update({k: float(v) for k, v in extra.items()})
    return w


def _argworst(values, mode: str):
    v = np.asarray(values, dtype=float)
    if mode == "max":
        v = np.where(np.isnan(v), -np.inf, v)
        return int(np.argmax(v))
    v = np.where(np.isnan(v), np.inf, v)
    return int(np.argmin(v))


def _fmt(x) -> str:
    return repr(float(x))


# -- checkers on sampled pairs -----------------------------------------------------


def _ratio_check(name, stats, ratio, mode, bound, seed, r_min, notes=""):
    valid = stats["K"] > K_EPS
    skipped = int(np.count_nonzero(~valid))
    ratio = np.where(valid, ratio, np.nan)
    i = _argworst(ratio, mode)
    worst = float(ratio[i])
    passed = worst <= bound if mode == "max" else worst >= bound
    violations = int(np.count_nonzero(ratio > bound if mode == "max" else ratio < bound))
    witness = _pair_witness(
        seed, stats["index"][i], r_min,
        p=stats["p"][i], q=stats["q"][i], s=stats["s"][i], t=stats["t"][i], K=stats["K"][i], statistic=worst,
    )
    text = f"violations={violations}; skipped_K0={skipped}; no violation found in {len(ratio)} samples" if passed else (
        f"violations={violations} of {len(ratio)}; skipped_K0={skipped}"
    )
    return CheckReport(name, bool(passed), len(ratio), worst, bound, 0.0, witness, "; ".join(filter(None, [text, notes])))


def check_lemma33(n: int = 100000, seed: int = 0, delta: float = 0.5, r_min: float = R_MIN, workers: int = 1) -> CheckReport:
    """| |Du(a)|^2 - |Du(b)|^2 | <= 16 K."""
    delta = forms.check_delta(delta, allow_zero=False)
    st = pair_statistics(seed, n, r_min, delta, DEFAULT_C, workers)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(st["grad_diff"]) / st["K"]
    ref = forms.grad_norm_sq_reference(st["p"], st["s"])
    factor = st["grad_a"] / ref
    notes = (
        f"|Du|^2 oracle / reference closed form: min={_fmt(factor.min())} max={_fmt(factor.max())}"
        if delta == 0.5 else "constant 16 applies to delta=1/2 only"
    )
    return _ratio_check("lemma33", st, ratio, "max", LEMMA33_BOUND, seed, r_min, notes)


def check_lemma34(n: int = 100000, seed: int = 0, delta: float = 0.5, r_min: float = R_MIN, workers: int = 1) -> CheckReport:
    """|D2u(a) - O^T D2u(b) O| >= K / 8."""
    delta = forms.check_delta(delta, allow_zero=False)
    st = pair_statistics(seed, n, r_min, delta, DEFAULT_C, workers)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = st["m1_norm"] / st["K"]
    return _ratio_check("lemma34", st, ratio, "min", LEMMA34_BOUND, seed, r_min)


def check_lemma35(n: int = 100000, seed: int = 0, delta: float = 0.5, r_min: float = R_MIN, workers: int = 1) -> CheckReport:
    """|w(a) D2u(a) - O^T w(b) D2u(b) O| <= 10 K.

    K ignores O, so any pair with a = b and O not commuting with D2u(a) gives
    K = 0 with a non-zero left side. The notes record that witness, the same
    ratio with O replaced by the eigenframe-aligning rotation, and the bound
    |M2| <= |w(a)| |M1| + |w(a) - w(b)| |D2u(b)| that does hold.
    """
    delta = forms.check_delta(delta, allow_zero=False)
    st = pair_statistics(seed, n, r_min, delta, DEFAULT_C, workers)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = st["m2_norm"] / st["K"]
        joint = st["m2_norm"] / (st["K"] + st["m1_norm"])
    report = _ratio_check("lemma35", st, ratio, "max", LEMMA35_BOUND, seed, r_min)

    wit = report.witness
    a = np.array(wit["a"])
    o = np.array(wit["O"])
    same = diff_matrices(a, a, o, delta, DEFAULT_C, r_min)
    extra = [
        f"a=b witness (K=0): |M2|={_fmt(operator_norm(jacobi_eigen(same.M2)))}",
        f"max |M2|/(K+|M1|)={_fmt(np.nanmax(joint))}",
    ]
    if "m2_aligned" in st:
        valid = st["K"] > K_EPS
        extra.append(f"eigenframe-aligned max |M2|/K={_fmt(np.max(st['m2_aligned'][valid] / st['K'][valid]))}")
    report.notes = "; ".join([report.notes] + extra)
    return report


def prop21_constant(delta: float) -> float:
    """Hyperbolicity constant for differences of D2w: 1000 for delta >= 1/2, else the delta formula."""
    if delta >= 0.5:
        return PROP21_BOUND
    return prop21_formula(delta)


def prop21_formula(delta: float) -> float:
    return 1000.0 * (delta + 1.0) * (3.0 - delta) / (3.0 * (1.0 - delta) ** 2)


def check_prop21(delta: float = 0.5, n: int = 100000, seed: int = 0, r_min: float = R_MIN, workers: int = 1) -> CheckReport:
    """1/C <= -L1/L5 <= C for N = D2w(a) - O^T D2w(b) O != 0, plus L1, |L5| >= |N|/C."""
    delta = forms.check_delta(delta, allow_zero=False)
    bound = prop21_constant(delta)
    st = pair_statistics(seed, n, r_min, delta, DEFAULT_C, workers)
    valid = st["m1_norm"] > N_EPS
    stat = np.where(valid, hyperbolicity_ratio(st["m1_top"], st["m1_bottom"]), np.nan)
    i = _argworst(stat, "max")
    worst = float(stat[i])
    norm = np.where(valid, st["m1_norm"], np.nan)
    cor_top = np.nanmin(st["m1_top"] / norm)
    cor_bottom = np.nanmin(np.abs(st["m1_bottom"]) / norm)
    cor_ok = cor_top >= 1.0 / bound and cor_bottom >= 1.0 / bound
    passed = worst <= bound and cor_ok
    witness = _pair_witness(seed, st["index"][i], r_min, p=st["p"][i], q=st["q"][i], statistic=worst)
    notes = (
        f"skipped_zero={int(np.count_nonzero(~valid))}; min L1/|N|={_fmt(cor_top)}; min |L5|/|N|={_fmt(cor_bottom)}; "
        f"C(delta) formula={_fmt(prop21_formula(delta))}"
    )
    return CheckReport("prop21", bool(passed), len(stat), worst, bound, 0.0, witness, notes)


def _reject_delta0_for_hyperbolicity(delta):
    if float(delta) == 0.0:
        raise ValueError("hyperbolicity fails at delta = 0; use the counterexample check instead")
    return forms.check_delta(delta)


def check_hyperbolicity(delta: float = 0.5, c: float = DEFAULT_C, n: int = 100000, seed: int = 0, r_min: float = R_MIN, workers: int = 1) -> CheckReport:
    """-L1/L5 of A^u(a) - O^T A^u(b) O within [4/240026, 240026/4]."""
    delta = _reject_delta0_for_hyperbolicity(delta)
    c = forms.check_shift(c)
    st = pair_statistics(seed, n, r_min, delta, c, workers)
    valid = st["a_norm"] > A_EPS
    stat = np.where(valid, hyperbolicity_ratio(st["a_top"], st["a_bottom"]), np.nan)
    i = _argworst(stat, "max")
    worst = float(stat[i])
    K = st["K"]
    weak = np.minimum(np.abs(st["a_top"]), np.abs(st["a_bottom"])) < 4.0 * K
    chain = c * st["m1_norm"] / 1000.0 - 26.0 * K >= 4.0 * K
    witness = _pair_witness(seed, st["index"][i], r_min, p=st["p"][i], q=st["q"][i], s=st["s"][i], t=st["t"][i], statistic=worst)
    notes = "; ".join(
        [
            f"empirical max ratio={_fmt(worst)} (reference C={REFERENCE_C:g}, {'below' if worst <= REFERENCE_C else 'above'})",
            f"skipped_zero={int(np.count_nonzero(~valid))}",
            f"samples with min(|L1|,|L5|)<4K: {int(np.count_nonzero(weak & valid))}",
            f"c|M1|/1000-26K>=4K holds in {int(np.count_nonzero(chain))}/{len(stat)}",
            f"no violation found in {len(stat)} samples" if worst <= HYPERBOLICITY_BOUND else "violation found",
        ]
    )
    return CheckReport("hyperbolicity", bool(worst <= HYPERBOLICITY_BOUND), len(stat), worst, HYPERBOLICITY_BOUND, 0.0, witness, notes)


def check_decomposition(delta: float = 0.5, c: float = DEFAULT_C, n: int = 100000, seed: int = 0, r_min: float = R_MIN, workers: int = 1) -> CheckReport:
    """A_diff = c M1 + M2 - (|Du(a)|^2 - |Du(b)|^2) I / 2, relative to |A_diff|."""
    delta = forms.check_delta(delta)
    c = forms.check_shift(c)
    st = pair_statistics(seed, n, r_min, delta, c, workers)
    norm = np.maximum(st["a_norm"], np.finfo(float).tiny)
    rel = st["residual"] / norm
    i = _argworst(rel, "max")
    tol = 1e-9
    unit = st["residual_unit_weight"] / norm
    half_gap = np.max(np.abs(st["residual_unit_weight"] - 0.5 * np.abs(st["grad_diff"])))
    notes = (
        f"with weight 1 on the gradient term: max relative residual={_fmt(unit.max())}, "
        f"equal to |grad_diff|/2 up to {_fmt(half_gap)}"
    )
    witness = _pair_witness(seed, st["index"][i], r_min, statistic=rel[i])
    return CheckReport("decomposition", bool(rel[i] <= tol), len(rel), float(rel[i]), 0.0, tol, witness, notes)


# -- worst-case search -------------------------------------------------------------------

_DIRECTIONS = np.concatenate([np.eye(20), -np.eye(20)])


def _project(x, r_min):
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    r_safe = np.where(r > 0.0, r, 1.0)
    fallback = np.zeros_like(x)
    fallback[..., 0] = r_min
    return np.where(r > 0.0, x * np.clip(r_safe, r_min, 1.0) / r_safe, fallback)


def _search_objective(params, o0, delta, c, r_min):
    a = _project(params[:, :5], r_min)
    b = _project(params[:, 5:10], r_min)
    o = o0 @ skew_exp(params[:, 10:])
    A = forms.conformal_hessian(a, delta, c, r_min) - congruence(o, forms.conformal_hessian(b, delta, c, r_min))
    ev = jacobi_eigen(A)
    stat = hyperbolicity_ratio(ev[:, 0], ev[:, -1])
    return np.where(operator_norm(ev) > A_EPS, stat, -np.inf)


def worst_ratio_search(
    delta: float = 0.5,
    c: float = DEFAULT_C,
    iters: int = 200,
    restarts: int = 100,
    seed: int = 0,
    n: int = 100000,
    r_min: float = R_MIN,
    workers: int = 1,
    step0: float = 0.1,
    floor: float = 1e-6,
) -> CheckReport:
    """Push the hyperbolicity ratio up by compass search over (a, b, O).

    The ``restarts`` worst Monte-Carlo samples seed the search, so the result
    never falls below the sampled worst. Each iteration polls +-step along all
    20 coordinates (a, b and the skew chart O = O_seed exp(S)), moves to the best
    improving poll point, and halves the step when none improves.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    if restarts < 0:
        raise ValueError("restarts must be non-negative")
    delta = _reject_delta0_for_hyperbolicity(delta)
    c = forms.check_shift(c)
    st = pair_statistics(seed, n, r_min, delta, c, workers)
    stat = np.where(st["a_norm"] > A_EPS, hyperbolicity_ratio(st["a_top"], st["a_bottom"]), -np.inf)
    order = np.lexsort((st["index"], -stat))
    mc_worst = float(stat[order[0]])
    n_start = max(1, restarts)
    seeds = [sample_pair(RngState(seed, PAIR_STREAM + int(st["index"][j])), r_min) for j in order[:n_start]]
    o0 = np.array([s_.O for s_ in seeds])
    x = np.concatenate([np.array([s_.a for s_ in seeds]), np.array([s_.b for s_ in seeds]), np.zeros((n_start, 10))], axis=1)
    f = _search_objective(x, o0, delta, c, r_min)
    evaluations = 0

    if restarts > 0:
        step = np.full(n_start, float(step0))
        for _ in range(iters):
            live = np.flatnonzero(step >= floor)
            if live.size == 0:
                break
            cand = x[live, None, :] + step[live, None, None] * _DIRECTIONS[None, :, :]
            vals = _search_objective(
                cand.reshape(-1, 20), np.repeat(o0[live], len(_DIRECTIONS), axis=0), delta, c, r_min
            ).reshape(live.size, len(_DIRECTIONS))
            evaluations += vals.size
            best = np.argmax(vals, axis=1)
            best_val = vals[np.arange(live.size), best]
            improved = best_val > f[live]
            moved = live[improved]
            x[moved] = cand[np.flatnonzero(improved), best[improved]]
            f[moved] = best_val[improved]
            step[live[~improved]] *= 0.5

    k = int(np.argmax(f))
    worst = float(f[k])
    a = _project(x[k, :5], r_min)
    b = _project(x[k, 5:10], r_min)
    o = o0[k] @ skew_exp(x[k, 10:])
    witness = {"a": a.tolist(), "b": b.tolist(), "O": o.tolist(), "seed_index": int(st["index"][order[k]]), "statistic": worst}
    notes = (
        f"monte-carlo worst={_fmt(mc_worst)}; searched worst={_fmt(worst)}; reference C={REFERENCE_C:g}; "
        f"restarts={restarts}; evaluations={evaluations}"
    )
    return CheckReport("search", bool(worst <= HYPERBOLICITY_BOUND), n + evaluations, worst, HYPERBOLICITY_BOUND, 0.0, witness, notes)


# -- checkers on points and grids ------------------------------------------------------


def _w_field(delta):
    return functools.partial(_w_of, delta=delta)


def _w_of(xs, delta):
    return forms.w_expression(xs, delta)


def check_spectrum_match(delta: float = 0.5, n: int = 10000, seed: int = 0, variant: bool = False, points=None) -> CheckReport:
    """Jacobi eigenvalues of the jet Hessian of w against the closed-form ordered spectrum.

    ``variant=True`` uses the general-delta branches instead, sorted; those are
    expected to disagree.
    """
    delta = forms.check_delta(delta)
    if not variant and delta != 0.5:
        raise ValueError("the ordered closed-form spectrum exists for delta = 1/2 only")
    if points is None:
        _require(n)
        x = sample_points(seed, n, unit=True)
    else:
        x = np.atleast_2d(np.asarray(points, dtype=float))
        x = x / np.linalg.norm(x, axis=-1, keepdims=True)
        _require(len(x))
    numeric = jacobi_eigen(ad_hessian(_w_field(delta), x))
    p = spectra.recover_orbit_param(x)
    if variant:
        closed = -np.sort(-spectra.mu_spectrum_general(p, delta), axis=-1)
    else:
        closed = spectra.ordered_spectrum_half(p)
    dev = np.max(np.abs(numeric - closed), axis=-1)
    i = int(np.argmax(dev))
    tol = 1e-7
    witness = {"x": x[i].tolist(), "p": float(p[i]), "numeric": numeric[i].tolist(), "closed_form": closed[i].tolist()}
    name = "spectrum-variant" if variant else "spectrum"
    return CheckReport(name, bool(dev[i] < tol), len(x), float(dev[i]), 0.0, tol, witness)


def check_arbitration(n: int = 10000, seed: int = 0) -> CheckReport:
    """The delta = 1/2 closed forms must agree with the oracle and the general-delta ones must not."""
    good = check_spectrum_match(0.5, n, seed)
    bad = check_spectrum_match(0.5, n, seed, variant=True)
    p = np.linspace(-1.0, 1.0, 2001)
    trace = (1.5) * (0.5 - 8.0) * spectra.orbit_value(p)
    trace_half = np.max(np.abs(spectra.mu_spectrum_half(p).sum(axis=-1) - trace))
    trace_general = np.max(np.abs(spectra.mu_spectrum_general(p, 0.5).sum(axis=-1) - trace))
    separation = 1.0
    passed = good.passed and not bad.passed and bad.worst >= separation
    notes = (
        f"delta=1/2 forms: worst={_fmt(good.worst)} (agree); general forms at delta=1/2: worst={_fmt(bad.worst)} "
        f"(disagree); trace error: delta=1/2 forms {_fmt(trace_half)}, general forms {_fmt(trace_general)}"
    )
    return CheckReport("arbitration", bool(passed), good.samples, bad.worst, separation, good.tolerance, bad.witness, notes)


def check_trace_identity(delta: float = 0.5, n: int = 10000, seed: int = 0, r_min: float = R_MIN) -> CheckReport:
    """trace D2w = (1+delta)(delta-8) P |x|^(-3-delta), relative to |D2w|_F."""
    delta = forms.check_delta(delta)
    _require(n)
    x = sample_points(seed, n, r_min)
    h = forms.hess_w(x, delta, r_min)
    r = np.linalg.norm(x, axis=-1)
    expected = (1.0 + delta) * (delta - 8.0) * forms.cartan_cubic(x) * r ** (-3.0 - delta)
    rel = np.abs(np.trace(h, axis1=-2, axis2=-1) - expected) / np.linalg.norm(h, axis=(-2, -1))
    i = int(np.argmax(rel))
    tol = 1e-9
    notes = ""
    passed = rel[i] <= tol
    if delta == 0.5:
        p = np.linspace(-1.0, 1.0, 1001)
        musum = np.max(np.abs(spectra.mu_spectrum_half(p).sum(axis=-1) - 45.0 * p * (p * p - 3.0) / 8.0))
        passed = passed and musum <= 1e-10
        notes = f"mu-sum vs 45p(p^2-3)/8: {_fmt(musum)}"
    return CheckReport("trace", bool(passed), n, float(rel[i]), 0.0, tol, {"x": x[i].tolist()}, notes)


def check_harmonicity(n: int = 10000, seed: int = 0, r_min: float = R_MIN) -> CheckReport:
    _require(n)
    x = sample_points(seed, n, r_min)
    tr = np.abs(np.trace(forms.hess_cartan(x), axis1=-2, axis2=-1))
    i = int(np.argmax(tr))
    tol = 1e-12
    return CheckReport("harmonicity", bool(tr[i] < tol), n, float(tr[i]), 0.0, tol, {"x": x[i].tolist()})


def check_euler(delta: float = 0.5, n: int = 10000, seed: int = 0, r_min: float = R_MIN) -> CheckReport:
    """<grad P, x> = 3P and <grad w, x> = (2-delta) w, relative to |grad||x|."""
    delta = forms.check_delta(delta)
    _require(n)
    x = sample_points(seed, n, r_min)
    r = np.linalg.norm(x, axis=-1)
    gp = forms.grad_cartan(x)
    gw = forms.grad_w(x, delta, r_min)
    e_p = np.abs(np.sum(gp * x, axis=-1) - 3.0 * forms.cartan_cubic(x)) / (np.linalg.norm(gp, axis=-1) * r)
    e_w = np.abs(np.sum(gw * x, axis=-1) - (2.0 - delta) * forms.w_value(x, delta, r_min)) / (
        np.linalg.norm(gw, axis=-1) * r
    )
    err = np.maximum(e_p, e_w)
    i = int(np.argmax(err))
    tol = 1e-10
    notes = f"P: {_fmt(e_p.max())}; w: {_fmt(e_w.max())}"
    return CheckReport("euler", bool(err[i] <= tol), n, float(err[i]), 0.0, tol, {"x": x[i].tolist()}, notes)


def check_eiconal(n: int = 10000, seed: int = 0, r_min: float = R_MIN) -> CheckReport:
    """|grad P|^2 / |x|^4 is constant; the constant is recorded (9 for this normalisation of P)."""
    _require(n)
    x = sample_points(seed, n, r_min)
    g = forms.grad_cartan(x)
    ratio = np.sum(g * g, axis=-1) / np.sum(x * x, axis=-1) ** 2
    mean = float(np.mean(ratio))
    spread = np.abs(ratio - mean) / mean
    i = int(np.argmax(spread))
    tol = 1e-10
    notes = f"constant={_fmt(mean)}; the unit-constant form |DP|^2 = |x|^4 does not hold"
    return CheckReport("eiconal", bool(spread[i] <= tol), n, float(spread[i]), 0.0, tol, {"x": x[i].tolist(), "ratio": float(ratio[i])}, notes)


def check_weyl(n: int = 10000, seed: int = 0) -> CheckReport:
    """L1(A-B) >= max_i (l_i - l'_i) and L5(A-B) <= min_i (l_i - l'_i)."""
    _require(n)
    mats = np.empty((n, 2, 5, 5))
    for i in range(n):
        g = RngState(seed, SYM_STREAM + i).generator().standard_normal((2, 5, 5))
        mats[i] = 0.5 * (g + np.swapaxes(g, -1, -2))
    return _weyl_report(mats[:, 0], mats[:, 1])


def _weyl_report(A, B) -> CheckReport:
    la = jacobi_eigen(A)
    lb = jacobi_eigen(B)
    ld = jacobi_eigen(A - B)
    diff = la - lb
    slack = np.minimum(ld[:, 0] - diff.max(axis=-1), diff.min(axis=-1) - ld[:, -1])
    i = int(np.argmin(slack))
    tol = 1e-10
    witness = {"A": A[i].tolist(), "B": B[i].tolist()}
    return CheckReport("weyl", bool(slack[i] >= -tol), len(slack), float(slack[i]), 0.0, tol, witness)


def counterexample_delta0(c: float = DEFAULT_C) -> CheckReport:
    """At delta = 0 the conformal-Hessian difference along a ray is negative definite.

    a = e1, b = e1/2, O = I. Passing means the counterexample stands, i.e. the
    construction is not hyperbolic at delta = 0.
    """
    c = forms.check_shift(c)
    a = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
    b = 0.5 * a
    spec_a = jacobi_eigen(forms.hess_w(a, 0.0))
    ga = forms.grad_w(a, 0.0)
    gb = forms.grad_w(b, 0.0)
    diff = forms.conformal_hessian(a, 0.0, c) - forms.conformal_hessian(b, 0.0, c)
    spec_diff = jacobi_eigen(diff)
    tol = 1e-9
    ok_a = np.max(np.abs(spec_a - REFERENCE_DELTA0_HESSIAN)) <= tol
    ok_grad = abs(gb @ gb - (ga @ ga) / 4.0) <= tol
    m1 = operator_norm(jacobi_eigen(forms.hess_w(a, 0.0) - forms.hess_w(b, 0.0)))
    passed = bool(spec_diff[0] < 0.0 and ok_a and ok_grad)
    witness = {
        "a": a.tolist(), "b": b.tolist(), "O": np.eye(5).tolist(),
        "spectrum_hess_w_a": spec_a.tolist(), "spectrum_difference": spec_diff.tolist(),
    }
    notes = "; ".join(
        [
            f"|Dw(a)|^2={_fmt(ga @ ga)}; |Dw(b)|^2={_fmt(gb @ gb)}",
            f"difference spectrum deviates from the reference {REFERENCE_DELTA0_DIFFERENCE.tolist()} by "
            f"{_fmt(np.max(np.abs(spec_diff - REFERENCE_DELTA0_DIFFERENCE)))}",
            f"same-ray |M1|={_fmt(m1)} with K=0.5, so the K/8 separation also fails at delta=0",
            f"w(b)={_fmt(forms.w_value(b, 0.0))}; the difference equals (1-w(b)) D2w(a) - (|Dw(a)|^2-|Dw(b)|^2)/2 I "
            f"and c cancels",
            f"largest eigenvalue {_fmt(spec_diff[0])}: negative semidefinite, not definite, so -Lambda_1/Lambda_5 "
            f"is still not bounded away from 0",
        ]
    )
    return CheckReport("counterexample-delta0", passed, 1, float(spec_diff[0]), 0.0, tol, witness, notes)


def check_ordering_table(grid_step: float = 1e-4) -> CheckReport:
    """The case table assigns each lambda_i the branch a descending sort would."""
    if not 0.0 < grid_step <= 1e-3:
        raise ValueError("grid_step must lie in (0, 1e-3]")
    p = spectra.p_grid(grid_step)
    table = spectra.ordered_spectrum_half(p)
    ordered = -np.sort(-spectra.mu_spectrum_half(p), axis=-1)
    dev = np.max(np.abs(table - ordered), axis=-1)
    i = int(np.argmax(dev))
    tol = 1e-10
    return CheckReport("ordering", bool(dev[i] <= tol), len(p), float(dev[i]), 0.0, tol, {"p": float(p[i])})


def check_derivatives(grid_step: float = 1e-4, fd_step: float = 1e-6) -> CheckReport:
    """max |d_i| < 10 on the grid, and d_i matches central differences of mu_i."""
    value, p_at, branch = spectra.derivative_bound(grid_step)
    p = spectra.p_grid(grid_step)
    p = p[(p > -1.0 + fd_step) & (p < 1.0 - fd_step)]
    fd = (spectra.mu_spectrum_half(p + fd_step) - spectra.mu_spectrum_half(p - fd_step)) / (2.0 * fd_step)
    fd_err = float(np.max(np.abs(fd - spectra.mu_derivatives(p))))
    reference_err = np.max(np.abs(fd - spectra.mu_derivatives_reference(p)), axis=0)
    reference_bound = float(np.max(np.abs(spectra.mu_derivatives_reference(spectra.p_grid(grid_step)))))
    passed = value < 10.0 and fd_err <= 1e-6
    notes = (
        f"finite-difference error={_fmt(fd_err)}; |d_4(0)|={_fmt(abs(spectra.mu_derivatives(0.0)[3]))}; "
        f"reference list vs finite differences per branch={[float(e) for e in reference_err]}; "
        f"reference list max={_fmt(reference_bound)}"
    )
    return CheckReport("derivatives", bool(passed), len(spectra.p_grid(grid_step)), value, 10.0, 0.0, {"p": p_at, "branch": branch + 1}, notes)


def check_p0() -> CheckReport:
    root = spectra.crossing_p0()
    target = spectra.P0_HALF
    general = float(spectra.p0_general(0.5))
    mu = spectra.mu_spectrum_half(target)
    gap = abs(mu[0] - mu[3])
    worst = max(abs(root - target), abs(general - target), gap)
    tol = 1e-9
    notes = f"root={_fmt(root)}; formula(1/2)={_fmt(general)}; 5^(-1/4)={_fmt(target)}; mu1(p0)={_fmt(mu[0])}"
    return CheckReport("p0", bool(worst <= tol), 1, float(worst), 0.0, tol, {"p0": root}, notes)


def check_oddness(grid_step: float = 1e-4) -> CheckReport:
    p = spectra.p_grid(grid_step)
    lam = spectra.ordered_spectrum_half(p)
    dev = np.max(np.abs(spectra.ordered_spectrum_half(-p) + lam[:, ::-1]), axis=-1)
    i = int(np.argmax(dev))
    tol = 1e-10
    return CheckReport("oddness", bool(dev[i] <= tol), len(p), float(dev[i]), 0.0, tol, {"p": float(p[i])})


def check_discriminant(grid_step: float = 1e-3) -> CheckReport:
    """D(p, delta) >= 144 (delta-2)^2 > 0 on a (p, delta) grid."""
    p = spectra.p_grid(max(grid_step, 1e-3))
    d = np.linspace(0.0, 1.0, 101)[:-1]
    P, Dl = np.meshgrid(p, d)
    margin = spectra.discriminant(P, Dl) - 144.0 * (Dl - 2.0) ** 2
    i = np.unravel_index(int(np.argmin(margin)), margin.shape)
    tol = 1e-12
    return CheckReport(
        "discriminant", bool(margin[i] >= -tol), margin.size, float(margin[i]), 0.0, tol,
        {"p": float(P[i]), "delta": float(Dl[i])},
    )


def check_remark31(deltas=(0.25, 0.5, 0.75), n: int = 20000, seed: int = 0, r_min: float = R_MIN, workers: int = 1) -> CheckReport:
    """Spot-check that the three Lipschitz/separation constants stay finite and positive off delta = 1/2."""
    parts = []
    worst = math.inf
    for delta in deltas:
        st = pair_statistics(seed, n, r_min, forms.check_delta(delta, allow_zero=False), DEFAULT_C, workers)
        valid = st["K"] > K_EPS
        K = st["K"][valid]
        c33 = float(np.max(np.abs(st["grad_diff"][valid]) / K))
        c34 = float(np.min(st["m1_norm"][valid] / K))
        parts.append(f"delta={delta:g}: max|dDu2|/K={_fmt(c33)} min|M1|/K={_fmt(c34)}")
        worst = min(worst, c34)
    return CheckReport("remark31", bool(worst > 0.0), n * len(deltas), worst, 0.0, 0.0, {"deltas": list(deltas)}, "; ".join(parts))
