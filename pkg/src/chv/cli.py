"""Command-line front end.

    chv verify <check|all> [options]
    chv counterexample-delta0 [options]
    chv search [options]
    chv dump <check|spectra> [options]

Exit status is 0 when every requested check passes, 1 when any fails and 2 on
a usage or configuration error. ``CHV_SEED`` sets the seed when ``--seed`` is
not given.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import spectra, verify
from .errors import ChvError
from .forms import DEFAULT_C, R_MIN, check_delta, check_shift

FORMATS = ("json", "csv")
CSV_HEADER = ("name", "pass", "samples", "worst", "bound")
DUMP_HEADER = ("index", "p", "q", "s", "t", "statistic")
SPECTRA_HEADER = ("index", "p", "lambda1", "lambda2", "lambda3", "lambda4", "lambda5")
# fields that change how a run executes but not what it computes
_NOT_DIGESTED = ("output", "format", "workers")


@dataclass
class RunConfig:
    delta: float = 0.5
    c: float = DEFAULT_C
    samples: int = 100000
    seed: int = 0
    r_min: float = R_MIN
    grid_step: float = 1e-4
    checks: list = field(default_factory=lambda: ["all"])
    output: str = "-"
    format: str = "json"
    workers: int = 1
    iters: int = 200
    restarts: int = 100

    def validate(self) -> "RunConfig":
        check_delta(self.delta)
        check_shift(self.c)
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if not 0.0 < self.r_min < 0.5:
            raise ValueError("r_min must lie in (0, 0.5)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        unknown = [c for c in self.checks if c != "all" and c not in CHECKS]
        if unknown:
            raise ValueError(f"unknown check(s): {', '.join(unknown)}")
        return self

    def digest(self) -> str:
        d = {k: v for k, v in asdict(self).items() if k not in _NOT_DIGESTED}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def resolved_checks(self) -> list:
        names = []
        for name in self.checks:
            for n in (ALL_CHECKS if name == "all" else [name]):
                if n not in names:
                    names.append(n)
        return names


def _pairs(cfg):
    return dict(n=cfg.samples, seed=cfg.seed, r_min=cfg.r_min, workers=cfg.workers)


CHECKS = {
    "spectrum": lambda cfg: verify.check_spectrum_match(0.5, cfg.samples, cfg.seed),
    "arbitration": lambda cfg: verify.check_arbitration(cfg.samples, cfg.seed),
    "trace": lambda cfg: verify.check_trace_identity(cfg.delta, cfg.samples, cfg.seed, cfg.r_min),
    "harmonicity": lambda cfg: verify.check_harmonicity(cfg.samples, cfg.seed, cfg.r_min),
    "euler": lambda cfg: verify.check_euler(cfg.delta, cfg.samples, cfg.seed, cfg.r_min),
    "eiconal": lambda cfg: verify.check_eiconal(cfg.samples, cfg.seed, cfg.r_min),
    "ordering": lambda cfg: verify.check_ordering_table(cfg.grid_step),
    "derivatives": lambda cfg: verify.check_derivatives(cfg.grid_step),
    "p0": lambda cfg: verify.check_p0(),
    "oddness": lambda cfg: verify.check_oddness(cfg.grid_step),
    "discriminant": lambda cfg: verify.check_discriminant(),
    "weyl": lambda cfg: verify.check_weyl(cfg.samples, cfg.seed),
    "counterexample-delta0": lambda cfg: verify.counterexample_delta0(cfg.c),
    "lemma33": lambda cfg: verify.check_lemma33(delta=cfg.delta, **_pairs(cfg)),
    "lemma34": lambda cfg: verify.check_lemma34(delta=cfg.delta, **_pairs(cfg)),
    "lemma35": lambda cfg: verify.check_lemma35(delta=cfg.delta, **_pairs(cfg)),
    "prop21": lambda cfg: verify.check_prop21(cfg.delta, **_pairs(cfg)),
    "hyperbolicity": lambda cfg: verify.check_hyperbolicity(cfg.delta, cfg.c, **_pairs(cfg)),
    "decomposition": lambda cfg: verify.check_decomposition(cfg.delta, cfg.c, **_pairs(cfg)),
    "search": lambda cfg: verify.worst_ratio_search(cfg.delta, cfg.c, cfg.iters, cfg.restarts, **_pairs(cfg)),
    "remark31": lambda cfg: verify.check_remark31(n=cfg.samples, seed=cfg.seed, r_min=cfg.r_min, workers=cfg.workers),
}
ALL_CHECKS = list(CHECKS)

# per-sample statistic dumped for each pair check
_DUMP_STATISTICS = {
    "lemma33": lambda st: np.abs(st["grad_diff"]) / st["K"],
    "lemma34": lambda st: st["m1_norm"] / st["K"],
    "lemma35": lambda st: st["m2_norm"] / st["K"],
    "prop21": lambda st: verify.hyperbolicity_ratio(st["m1_top"], st["m1_bottom"]),
    "hyperbolicity": lambda st: verify.hyperbolicity_ratio(st["a_top"], st["a_bottom"]),
}


# -- serialisation ---------------------------------------------------------------------


def _num(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _json(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _num(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, np.ndarray):
        return _json(v.tolist())
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(x)}" for k, x in v.items()) + "}"
    raise TypeError(f"cannot serialise {type(v).__name__}")


def emit_report(report: verify.CheckReport, fmt: str = "json", seed: int = 0, config_digest: str = "") -> str:
    """One report as a JSON object (single line) or a CSV row, without the trailing newline."""
    if fmt == "json":
        record = {
            "name": report.name,
            "pass": bool(report.passed),
            "samples": int(report.samples),
            "worst": report.worst,
            "bound": report.bound,
            "tolerance": report.tolerance,
            "witness": report.witness,
            "notes": report.notes,
            "seed": int(seed),
            "config_digest": config_digest,
        }
        return _json(record)
    if fmt == "csv":
        bound = "" if report.bound is None else _num(report.bound)
        return ",".join([report.name, "true" if report.passed else "false", str(int(report.samples)), _num(report.worst), bound])
    raise ValueError(f"unknown format {fmt!r}")


def dump_samples(check: str, cfg: RunConfig, stream) -> int:
    """Write per-sample statistics (or the ordered spectra over the p grid) as CSV."""
    writer = csv.writer(stream, lineterminator="\n")
    if check == "spectra":
        writer.writerow(SPECTRA_HEADER)
        if cfg.samples < 1:
            return 0
        p = spectra.p_grid(cfg.grid_step)
        lam = spectra.ordered_spectrum_half(p)
        for i, (pi, row) in enumerate(zip(p, lam)):
            writer.writerow([i, _num(pi)] + [_num(v) for v in row])
        return len(p)
    if check not in _DUMP_STATISTICS:
        raise ValueError(f"no per-sample dump for {check!r}; choose spectra or one of {sorted(_DUMP_STATISTICS)}")
    writer.writerow(DUMP_HEADER)
    if cfg.samples < 1:
        return 0
    st = verify.pair_statistics(cfg.seed, cfg.samples, cfg.r_min, cfg.delta, cfg.c, cfg.workers)
    with np.errstate(divide="ignore", invalid="ignore"):
        stat = _DUMP_STATISTICS[check](st)
    for row in zip(st["index"], st["p"], st["q"], st["s"], st["t"], stat):
        writer.writerow([int(row[0])] + [_num(v) for v in row[1:]])
    return len(stat)


# -- execution -------------------------------------------------------------------------


def _open(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        names = cfg.resolved_checks()
        reports = [CHECKS[name](cfg) for name in names]
    except (ValueError, ChvError) as exc:
        print(f"chv: error: {exc}", file=sys.stderr)
        return 2
    digest = cfg.digest()
    try:
        out, close = _open(cfg.output)
        try:
            if cfg.format == "csv":
                out.write(",".join(CSV_HEADER) + "\n")
            for r in reports:
                out.write(emit_report(r, cfg.format, cfg.seed, digest) + "\n")
        finally:
            if close:
                out.close()
    except OSError as exc:
        print(f"chv: error: cannot write report: {exc}", file=sys.stderr)
        return 2
    return 0 if all(r.passed for r in reports) else 1


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--delta", type=float, default=0.5)
    parser.add_argument("--c", type=float, default=DEFAULT_C)
    parser.add_argument("--samples", type=int, default=100000)
    parser.add_argument("--seed", type=int, default=None, help="overrides $CHV_SEED")
    parser.add_argument("--r-min", type=float, default=R_MIN)
    parser.add_argument("--grid-step", type=float, default=1e-4)
    parser.add_argument("--output", default="-")
    parser.add_argument("--format", choices=FORMATS, default="json")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--iters", type=int, default=200)
    parser.add_argument("--restarts", type=int, default=100)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chv", description="Numerical checks for a singular conformal-Hessian solution.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("verify", help="run named checks")
    p.add_argument("checks", nargs="+", metavar="CHECK", help=f"'all' or any of: {', '.join(ALL_CHECKS)}")
    _common(p)
    _common(sub.add_parser("counterexample-delta0", help="the delta = 0 failure"))
    _common(sub.add_parser("search", help="worst-case hyperbolicity ratio search"))
    p = sub.add_parser("dump", help="per-sample CSV for plotting")
    p.add_argument("what", metavar="CHECK", help=f"spectra or one of: {', '.join(_DUMP_STATISTICS)}")
    _common(p)
    return parser


def _seed_from_env(flag):
    if flag is not None:
        return flag
    env = os.environ.get("CHV_SEED")
    if env is None or env == "":
        return 0
    return int(env)


def config_from_args(args) -> RunConfig:
    checks = {"verify": None, "counterexample-delta0": ["counterexample-delta0"], "search": ["search"], "dump": []}[args.command]
    return RunConfig(
        delta=args.delta,
        c=args.c,
        samples=args.samples,
        seed=_seed_from_env(args.seed),
        r_min=args.r_min,
        grid_step=args.grid_step,
        checks=list(args.checks) if checks is None else checks,
        output=args.output,
        format=args.format,
        workers=args.workers,
        iters=args.iters,
        restarts=args.restarts,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"chv: error: {exc}", file=sys.stderr)
        return 2
    if args.command != "dump":
        return run(cfg)
    try:
        cfg.validate()
        out, close = _open(cfg.output)
        try:
            dump_samples(args.what, cfg, out)
        finally:
            if close:
                out.close()
    except (ValueError, ChvError) as exc:
        print(f"chv: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"chv: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
