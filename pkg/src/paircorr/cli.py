"""Command-line entry point.

Exit codes: 0 success, 1 bad arguments or configuration, 2 data problems
(missing or malformed zeros, unreadable files, unwritable output).
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .conjecture_lab import (DEFAULT_EPSILON, DEFAULT_ETAS, GridSpec, ReportRow, format_report,
                             geometric_grid, gonek_scan, hypothesis_scan, lemma_comparator,
                             make_row, montgomery_sweep, pc_density_rows, theorem_scan)
from .errors import ArgumentError, DataError
from .explicit_formula import TruncationParams, interval_decomposition, psi_truncated
from .pair_correlation import (KernelParams, f_eval, lemma1_check, lemma2_residual, lemma3_check,
                               sigma, sigma_shifted, sigma_windowed)
from .prime_statistics import delta, j_integral, lambda_segment, psi, selberg_ratio
from .zero_source import (FINDER_VERSION, ZeroSet, find_zeros, ingest_zeros, validate_zero_set,
                          write_zeros)

log = logging.getLogger("paircorr")

DEFAULT_CACHE_DIR = Path.home() / ".cache" / "paircorr"
CACHE_ENV = "PAIRCORR_CACHE"
MIN_COMPUTE_HEIGHT = 20.0


# ------------------------------------------------------------------ config

@dataclass
class Config:
    zero_source: tuple[str, str] | None = None  # ("compute", t_max) or ("file", path)
    cache_dir: str | None = None
    output: str | None = None
    threads: int = 1
    grid: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)


_GRID_KEYS = {"x_grid", "t_grid", "tau_grid", "h_grid", "y_grid", "u_grid", "eta"}
_SCALAR_KEYS = {"epsilon", "backend", "band", "tol"}
_KEYS = {"zero_source", "cache_dir", "output", "threads"} | _GRID_KEYS | _SCALAR_KEYS
_GEOM = re.compile(r"^geom\((.*)\)$")
_SOURCE = re.compile(r"^(compute|file)\((.*)\)$")


def parse_grid(text: str) -> tuple[float, ...]:
    """Comma list of numbers, or geom(lo, hi, n)."""
    text = text.strip()
    m = _GEOM.match(text)
    if m:
        parts = [p.strip() for p in m.group(1).split(",")]
        if len(parts) != 3:
            raise ArgumentError(f"geom needs three arguments: {text!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ArgumentError(f"malformed geom: {text!r}") from None
        return geometric_grid(lo, hi, n)
    if "(" in text or ")" in text:
        raise ArgumentError(f"malformed grid: {text!r}")
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ArgumentError(f"malformed grid: {text!r}") from None


def load_config(path: str | os.PathLike) -> Config:
    """Read ``key = value`` lines; '#' starts a comment; the last duplicate wins."""
    cfg = Config()
    seen: dict[str, int] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ArgumentError(f"{path}:{lineno}: expected 'key = value'")
        if key not in _KEYS:
            raise ArgumentError(f"{path}:{lineno}: unknown key {key!r}")
        if key in seen:
            log.warning("%s:%d: duplicate key %r (line %d); the last value wins",
                        path, lineno, key, seen[key])
        seen[key] = lineno
        try:
            if key == "zero_source":
                m = _SOURCE.match(value)
                if not m:
                    raise ArgumentError(f"zero_source must be compute(t_max) or file(path), got {value!r}")
                kind, arg = m.group(1), m.group(2).strip()
                if kind == "compute":
                    float(arg)
                cfg.zero_source = (kind, arg)
            elif key == "cache_dir":
                cfg.cache_dir = value
            elif key == "output":
                cfg.output = value
            elif key == "threads":
                cfg.threads = int(value)
            elif key in _GRID_KEYS:
                cfg.grid[key] = parse_grid(value)
            elif key in ("epsilon", "band", "tol"):
                cfg.params[key] = float(value)
            else:
                cfg.params[key] = value
        except (ArgumentError, ValueError) as exc:
            raise ArgumentError(f"{path}:{lineno}: parse error: {exc}") from None
    if cfg.zero_source is None:
        raise ArgumentError(f"{path}: missing required key 'zero_source'")
    if cfg.zero_source[0] == "compute" and float(cfg.zero_source[1]) > 1e4:
        raise ArgumentError(f"{path}: compute(t_max) supports t_max <= 1e4")
    return cfg


# ------------------------------------------------------------------ output

def write_text(text: str, path: str | os.PathLike | None) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None


def write_report(rows: Sequence[ReportRow], path: str | os.PathLike | None,
                 provenance: dict | None = None) -> None:
    write_text(format_report(rows, provenance), path)


def format_values(values: dict, provenance: dict | None = None) -> str:
    """A one-line CSV table for single evaluations."""
    def fmt(v):
        if isinstance(v, bool):
            return str(v).lower()
        if isinstance(v, (int, float)):
            return f"{float(v):.17g}"
        return str(v)
    head = [f"# paircorr {__version__}"] + [f"# {k}: {v}" for k, v in (provenance or {}).items()]
    return "\n".join(head + [",".join(values), ",".join(fmt(v) for v in values.values())]) + "\n"


# ------------------------------------------------------------------ zeros

class _Session:
    """Resolves the zero source once per invocation."""

    def __init__(self, args, cfg: Config | None):
        self.args = args
        self.cfg = cfg
        self._zs: ZeroSet | None = None

    @property
    def cache_dir(self) -> Path:
        if getattr(self.args, "cache_dir", None):
            return Path(self.args.cache_dir)
        if os.environ.get(CACHE_ENV):
            return Path(os.environ[CACHE_ENV])
        if self.cfg and self.cfg.cache_dir:
            return Path(self.cfg.cache_dir)
        return DEFAULT_CACHE_DIR

    def source(self) -> tuple[str, str] | None:
        if getattr(self.args, "zeros_file", None):
            return ("file", self.args.zeros_file)
        if self.cfg is not None:
            return self.cfg.zero_source
        return None

    def compute(self, t_max: float, use_cache: bool) -> ZeroSet:
        path = self.cache_dir / f"zeros_t{t_max:g}_v{FINDER_VERSION}.txt"
        if use_cache and path.exists():
            return ingest_zeros(path)
        zs = find_zeros(t_max)
        if use_cache:
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                write_zeros(zs, path)
            except OSError as exc:
                raise DataError(f"cannot write cache {path}: {exc}") from None
        return zs

    def zeros(self, needed: float) -> ZeroSet:
        if self._zs is not None and self._zs.t_max >= needed:
            return self._zs
        src = self.source()
        use_cache = bool(getattr(self.args, "cache", False))
        if src is None:
            zs = self.compute(max(MIN_COMPUTE_HEIGHT, float(needed)), use_cache)
        elif src[0] == "file":
            try:
                zs = ingest_zeros(src[1])
            except OSError as exc:
                raise DataError(f"cannot read zero file {src[1]}: {exc}") from None
        else:
            zs = self.compute(max(MIN_COMPUTE_HEIGHT, float(src[1]), float(needed)), use_cache)
        zs.require(needed)
        self._zs = zs
        return zs

    def provenance(self) -> dict:
        if self._zs is None:
            return {}
        m = self._zs.meta
        return {"zero_source": f"{m.source_label} ({m.origin}, t_max={self._zs.t_max:g}, "
                               f"n={len(self._zs)})"}

    @property
    def threads(self) -> int:
        t = getattr(self.args, "threads", None)
        if t is None:
            t = self.cfg.threads if self.cfg else 1
        if t < 1:
            raise ArgumentError("--threads must be >= 1")
        return t

    @property
    def output(self):
        out = getattr(self.args, "output", None)
        if out is None and self.cfg is not None:
            out = self.cfg.output
        return out

    def emit_values(self, values: dict) -> None:
        write_text(format_values(values, self.provenance()), self.output)

    def emit_rows(self, rows, extra: dict | None = None) -> None:
        prov = self.provenance()
        prov.update(extra or {})
        write_report(rows, self.output, prov)


# ------------------------------------------------------------------ commands

def _cmd_zeros(s: _Session, a) -> int:
    if a.action == "compute":
        if a.t_max is None:
            raise ArgumentError("zeros compute needs --t-max")
        zs = s.compute(a.t_max, a.cache)
        if s.output:
            write_zeros(zs, s.output)
        where = f" (cached in {s.cache_dir})" if a.cache else ""
        print(f"{len(zs)} ordinates up to {zs.t_max:g}{where}", file=sys.stderr)
        if not s.output and not a.cache:
            write_text("".join(f"{g!r}\n" for g in zs.ordinates.tolist()), None)
        return 0
    if a.action == "ingest":
        if not a.path:
            raise ArgumentError("zeros ingest needs a file path")
        try:
            zs = ingest_zeros(a.path, a.t_max)
        except OSError as exc:
            raise DataError(f"cannot read {a.path}: {exc}") from None
        if s.output:
            write_zeros(zs, s.output)
        print(f"{len(zs)} ordinates up to {zs.t_max:g} from {zs.meta.source_label}", file=sys.stderr)
        return 0
    # validate
    if a.path:
        try:
            zs = ingest_zeros(a.path, a.t_max)
        except OSError as exc:
            raise DataError(f"cannot read {a.path}: {exc}") from None
    else:
        if a.t_max is None and s.source() is None:
            raise ArgumentError("zeros validate needs a file path, --zeros-file or --t-max")
        zs = s.zeros(a.t_max or 0.0)
    report = validate_zero_set(zs)
    write_text(str(report) + "\n", s.output)
    if not report.passed:
        raise DataError("zero set failed validation")
    return 0


def _cmd_sigma(s, a):
    zs = s.zeros(a.t)
    out = {"X": a.x, "T": a.t}
    if a.u is not None:
        out["U"] = a.u
        out["value"] = sigma_windowed(a.x, a.u, a.t, zs)
    elif a.v is not None:
        out["v"] = a.v
        out["value"] = sigma_shifted(a.x, a.t, a.v, zs)
    else:
        out["value"] = sigma(a.x, a.t, zs)
    s.emit_values(out)
    return 0


def _cmd_f_eval(s, a):
    zs = s.zeros(a.t)
    r = f_eval(KernelParams(a.x, a.t, a.tau), zs, a.backend, band=a.band, tol=a.tol,
               threads=s.threads)
    s.emit_values({"X": a.x, "T": a.t, "tau": a.tau, "backend": r.backend, "value": r.value,
                   "error_bound": r.error_bound, "diagonal": r.diagonal,
                   "offdiagonal": r.offdiagonal})
    return 0


def _lemma1_integrand(name: str, a, s):
    import numpy as np
    if name == "constant":
        return lambda u: np.ones_like(u)
    if name == "linear":
        return lambda u: np.asarray(u, dtype=float)
    if name == "sigma2":
        g = s.zeros(a.t).upto(a.t)

        def f(u):
            sv = 2.0 * np.cos(np.multiply.outer(np.log(u), g)).sum(axis=-1)
            return sv * sv
        return f
    raise ArgumentError(f"unknown integrand {name!r}")


def _cmd_lemma(s, a):
    which = a.which
    if which == "1":
        f = _lemma1_integrand(a.integrand, a, s)
        diff = lemma1_check(f, a.x, a.y, a.h, a.tol)
        s.emit_values({"lemma": 1, "integrand": a.integrand, "X": a.x, "Y": a.y, "h": a.h,
                       "tol": a.tol, "difference": diff})
    elif which == "2":
        zs = s.zeros(a.t)
        r = lemma2_residual(KernelParams(a.x, a.t, a.tau), zs, a.tol, s.threads)
        s.emit_values({"lemma": 2, "X": a.x, "T": a.t, "tau": a.tau, "tol": a.tol,
                       "residual": r})
    elif which == "3":
        zs = s.zeros(a.t)
        V = a.v if a.v is not None else a.x
        r = lemma3_check(V, a.t, a.tau, zs, a.tol, s.threads)
        s.emit_values({"lemma": 3, "V": V, "T": a.t, "tau": a.tau, "lhs": r.lhs, "rhs": r.rhs,
                       "quad_error": r.quad_error, "holds": r.holds})
    elif which == "5":
        zs = s.zeros(a.t)
        row = lemma_comparator("lemma5", {"X": a.x, "T": a.t, "tau": a.tau,
                                          "epsilon": a.epsilon}, zs, s.threads)
        s.emit_rows([row])
    else:
        zs = s.zeros(a.t)
        row = lemma_comparator("lemma6", {"X": a.x, "U": a.u or 0.0, "T": a.t, "tau": a.tau},
                               zs, s.threads)
        s.emit_rows([row])
    return 0


def _cmd_psi(s, a):
    s.emit_values({"x": a.x, "psi": psi(a.x), "delta": delta(a.x) if a.x >= 1 else math.nan})
    return 0


def _cmd_j(s, a):
    r = j_integral(a.x, a.y, a.h)
    out = {"X": a.x, "Y": a.y, "h": a.h, "J": r.J_value, "breakpoints": r.breakpoints_used}
    if a.y == a.x and a.x >= 2 and a.h <= a.x:
        out["selberg_ratio"] = selberg_ratio(a.x, a.h)
    s.emit_values(out)
    return 0


def _is_prime_power(x: float) -> bool:
    if x != math.floor(x) or x < 2:
        return False
    return len(lambda_segment(int(x), int(x))) == 1


def _cmd_explicit(s, a):
    zs = s.zeros(a.t)
    p = TruncationParams(a.x, a.t)
    exact = psi(a.x)
    approx = psi_truncated(p, zs)
    flag = "prime-power-jump" if _is_prime_power(a.x) else ""
    s.emit_values({"x": a.x, "T": a.t, "psi": exact, "psi_truncated": approx,
                   "residual": exact - approx, "flags": flag})
    return 0


def _cmd_decompose(s, a):
    zs = s.zeros(a.t_hi)
    r = interval_decomposition(a.x, a.h, a.t_hi, zs)
    s.emit_values({"x": a.x, "h": a.h, "T_hi": a.t_hi, "split": a.x / a.h, "s1": r.s1,
                   "s2": r.s2, "remainder": r.remainder})
    return 0


def _grid(s: _Session, a) -> tuple[GridSpec, tuple[float, ...], tuple[float, ...]]:
    base = dict(s.cfg.grid) if s.cfg else {}
    for key in ("x_grid", "t_grid", "tau_grid", "h_grid", "y_grid", "u_grid", "eta"):
        val = getattr(a, key, None)
        if val is not None:
            base[key] = parse_grid(val)
    eps = a.epsilon
    if eps is None:
        eps = s.cfg.params.get("epsilon", DEFAULT_EPSILON) if s.cfg else DEFAULT_EPSILON
    etas = base.pop("eta", DEFAULT_ETAS)
    us = base.pop("u_grid", (10.0, 100.0))
    gs = GridSpec(**base, epsilon=eps)
    return gs, tuple(etas), tuple(us)


def _cmd_scan(s, a):
    gs, etas, us = _grid(s, a)
    rows: list[ReportRow] = []
    if a.kind in ("hypothesis", "gonek", "montgomery"):
        zs = s.zeros(max(gs.t_grid))
        if a.kind == "hypothesis":
            for eta in etas:
                rows += hypothesis_scan(replace(gs, eta=eta), zs, s.threads)
        elif a.kind == "gonek":
            rows = gonek_scan(gs, zs)
        else:
            rows = montgomery_sweep(gs, zs, s.threads)
    elif a.kind == "theorem2":
        for eta in etas:
            rows += theorem_scan("thm2", replace(gs, eta=eta), gs.x_grid)
    else:
        rows = theorem_scan("thm3", gs, gs.x_grid, us)
    extra = {"grid": gs.describe() + f"; etas={','.join(f'{e:g}' for e in etas)}"}
    if a.kind == "theorem3":
        extra["grid"] += f"; u_grid={','.join(f'{u:g}' for u in us)}"
    s.emit_rows(rows, extra)
    return 0


def _cmd_pc(s, a):
    zs = s.zeros(a.t)
    alphas = parse_grid(a.alpha)
    betas = parse_grid(a.beta)
    if len(alphas) != len(betas):
        raise ArgumentError("--alpha and --beta need the same number of values")
    s.emit_rows(pc_density_rows(zip(alphas, betas), a.t, zs))
    return 0


# ------------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--zeros-file", help="read zero ordinates from this file")
    common.add_argument("--cache", action="store_true", help="read/write computed zeros in the cache")
    common.add_argument("--cache-dir", help=f"cache directory (default ${CACHE_ENV} or {DEFAULT_CACHE_DIR})")
    common.add_argument("--output", "-o", help="output path (default: standard output)")
    common.add_argument("--threads", type=int, default=None, help="worker threads")

    p = _Parser(prog="paircorr", description="Zeta zeros, pair correlation and primes in short intervals.")
    p.add_argument("--version", action="version", version=f"paircorr {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    z = sub.add_parser("zeros", parents=[common], help="compute, ingest or validate zero tables")
    z.add_argument("action", choices=["compute", "ingest", "validate"])
    z.add_argument("path", nargs="?")
    z.add_argument("--t-max", type=float)
    z.set_defaults(func=_cmd_zeros)

    q = sub.add_parser("sigma", parents=[common], help="Sigma(X,T), windowed or shifted")
    q.add_argument("--x", type=float, required=True)
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--u", type=float)
    q.add_argument("--v", type=float)
    q.set_defaults(func=_cmd_sigma)

    q = sub.add_parser("f-eval", parents=[common], help="F(X,T,tau)")
    q.add_argument("--x", type=float, required=True)
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--tau", type=float, required=True)
    q.add_argument("--backend", choices=["exact", "banded", "quadrature"], default="exact")
    q.add_argument("--band", type=float)
    q.add_argument("--tol", type=float)
    q.set_defaults(func=_cmd_f_eval)

    q = sub.add_parser("lemma-check", parents=[common], help="identity and inequality checks")
    q.add_argument("which", choices=["1", "2", "3", "5", "6"])
    q.add_argument("--x", type=float, default=10.0)
    q.add_argument("--v", type=float, help="V for lemma 3 (default --x)")
    q.add_argument("--y", type=float, default=1.0)
    q.add_argument("--h", type=float, default=1.0)
    q.add_argument("--u", type=float)
    q.add_argument("--t", type=float, default=100.0)
    q.add_argument("--tau", type=float, default=0.5)
    q.add_argument("--tol", type=float, default=1e-8)
    q.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    q.add_argument("--integrand", choices=["constant", "linear", "sigma2"], default="constant")
    q.set_defaults(func=_cmd_lemma)

    q = sub.add_parser("psi", parents=[common], help="psi(x) and Delta(x)")
    q.add_argument("--x", type=float, required=True)
    q.set_defaults(func=_cmd_psi)

    q = sub.add_parser("j-integral", parents=[common], help="mean square J(X,Y,h)")
    q.add_argument("--x", type=float, required=True)
    q.add_argument("--y", type=float, required=True)
    q.add_argument("--h", type=float, required=True)
    q.set_defaults(func=_cmd_j)

    q = sub.add_parser("explicit-formula", parents=[common], help="truncated explicit formula")
    q.add_argument("--x", type=float, required=True)
    q.add_argument("--t", type=float, required=True)
    q.set_defaults(func=_cmd_explicit)

    q = sub.add_parser("decompose-interval", parents=[common], help="split the zero sum at x/h")
    q.add_argument("--x", type=float, required=True)
    q.add_argument("--h", type=float, required=True)
    q.add_argument("--t-hi", type=float, required=True)
    q.set_defaults(func=_cmd_decompose)

    q = sub.add_parser("scan", parents=[common], help="parameter sweeps")
    q.add_argument("kind", choices=["hypothesis", "gonek", "montgomery", "theorem2", "theorem3"])
    for key in ("x_grid", "t_grid", "tau_grid", "h_grid", "y_grid", "u_grid"):
        q.add_argument("--" + key.replace("_", "-"), dest=key, help="comma list or geom(lo,hi,n)")
    q.add_argument("--eta", help="comma list of eta values")
    q.add_argument("--epsilon", type=float)
    q.set_defaults(func=_cmd_scan)

    q = sub.add_parser("pc-density", parents=[common], help="pair counts against 1 - sinc^2")
    q.add_argument("--alpha", required=True, help="comma list")
    q.add_argument("--beta", required=True, help="comma list")
    q.add_argument("--t", type=float, required=True)
    q.set_defaults(func=_cmd_pc)
    return p


def run_command(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = load_config(args.config) if args.config else None
        return args.func(_Session(args, cfg), args)
    except ArgumentError as exc:
        print(f"paircorr: error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"paircorr: data error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    sys.exit(run_command())


if __name__ == "__main__":
    main()
