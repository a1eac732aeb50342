"""Parameter sweeps comparing computed quantities with the shapes of conjectured bounds.

None of the bounds here comes with an explicit constant, so nothing is
asserted: each row reports lhs, rhs (the bound with constant 1) and their
ratio, plus flags naming the regime the parameters fall in.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .errors import ArgumentError
from .pair_correlation import (KernelParams, f_eval, f_prefix, pc_density, sigma,
                               sigma_prefix, sigma_windowed, trivial_bound_margin)
from .prime_statistics import delta, short_interval
from .zero_source import ZeroSet

DEFAULT_EPSILON = 0.05
DEFAULT_ETAS = (0.0, 0.25, 0.5)


def geometric_grid(lo: float, hi: float, n: int) -> tuple[float, ...]:
    """n points from lo to hi in geometric progression, endpoints exact."""
    if n < 1 or not (0 < lo <= hi):
        raise ArgumentError(f"bad geometric grid ({lo}, {hi}, {n})")
    if n == 1:
        return (float(lo),)
    pts = np.geomspace(lo, hi, n)
    pts[0], pts[-1] = lo, hi
    return tuple(float(p) for p in pts)


def _check_grid(name, values) -> tuple[float, ...]:
    vals = tuple(float(v) for v in values)
    if not vals:
        raise ArgumentError(f"{name} is empty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ArgumentError(f"{name} must be strictly ascending")
    return vals


@dataclass(frozen=True)
class GridSpec:
    x_grid: Sequence[float] = (1e2, 1e3, 1e4, 1e5, 1e6)
    t_grid: Sequence[float] = geometric_grid(100.0, 1000.0, 5)
    tau_grid: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0)
    h_grid: Sequence[float] = (10.0, 100.0)
    y_grid: Sequence[float] = (100.0,)
    eta: float = 0.0
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        for name in ("x_grid", "t_grid", "tau_grid", "h_grid", "y_grid"):
            object.__setattr__(self, name, _check_grid(name, getattr(self, name)))
        if not 0 <= self.eta < 1:
            raise ArgumentError(f"eta must lie in [0, 1), got {self.eta}")
        if not 0 < self.epsilon < 0.25:
            raise ArgumentError(f"epsilon must lie in (0, 1/4), got {self.epsilon}")

    def describe(self) -> str:
        parts = [f"{k}={','.join(f'{v:g}' for v in getattr(self, k))}"
                 for k in ("x_grid", "t_grid", "tau_grid", "h_grid", "y_grid")]
        parts += [f"eta={self.eta:g}", f"epsilon={self.epsilon:g}"]
        return "; ".join(parts)


@dataclass(frozen=True)
class ReportRow:
    kind: str
    params: Mapping[str, float]
    lhs: float
    rhs: float
    ratio: float
    flags: tuple[str, ...] = field(default=())


def make_row(kind: str, params: Mapping[str, float], lhs: float, rhs: float,
             flags: Iterable[str] = ()) -> ReportRow:
    ratio = lhs / rhs if rhs != 0 else math.nan
    return ReportRow(kind, dict(params), float(lhs), float(rhs), float(ratio), tuple(flags))


# ------------------------------------------------------------------ scans

def _admissible(X, T, tau, eta, eps) -> bool:
    if eta > 0:
        return X ** eta <= T <= X and X ** eta / T <= tau <= 1
    return X ** eps <= T <= X and 0 <= tau <= 1


def hypothesis_scan(g: GridSpec, zs: ZeroSet, threads: int = 1) -> list[ReportRow]:
    """F(X,T,tau) against T X^eps over the admissible region of H(eta)."""
    rows = []
    eps = g.epsilon
    for X in g.x_grid:
        for T in g.t_grid:
            for tau in g.tau_grid:
                if not _admissible(X, T, tau, g.eta, eps):
                    continue
                F = f_eval(KernelParams(X, T, tau), zs, threads=threads).value
                flags = []
                if X ** eps <= tau * T <= X:
                    flags.append("montgomery")
                if tau * T <= X ** eps:
                    flags.append("gonek")
                rows.append(make_row("hypothesis", {"X": X, "T": T, "tau": tau, "eta": g.eta,
                                                    "epsilon": eps},
                                     F, T * X ** eps, flags))
    if not rows:
        rows.append(ReportRow("hypothesis", {"eta": g.eta, "epsilon": eps}, math.nan, math.nan,
                              math.nan, ("warning:empty-admissible-region",)))
    return rows


def gonek_scan(g: GridSpec, zs: ZeroSet) -> list[ReportRow]:
    """|Sigma(X,T)| against T X^(-1/2+eps) + T^(1/2) X^eps."""
    rows = []
    eps = g.epsilon
    for X in g.x_grid:
        for T in g.t_grid:
            first = T * X ** (eps - 0.5)
            second = math.sqrt(T) * X ** eps
            flags = ["second-term-dominates"] if second >= first else []
            rows.append(make_row("gonek", {"X": X, "T": T, "epsilon": eps},
                                 abs(sigma(X, T, zs)), first + second, flags))
    return rows


def montgomery_sweep(g: GridSpec, zs: ZeroSet, threads: int = 1) -> list[ReportRow]:
    """F(X,T,1) against T log T / pi for X^eps <= T <= X, with trivial-bound occupancies."""
    rows = []
    eps = g.epsilon
    for X in g.x_grid:
        for T in g.t_grid:
            if not (X ** eps <= T <= X and T >= 2):
                continue
            F = f_eval(KernelParams(X, T, 1.0), zs, threads=threads).value
            params = {"X": X, "T": T, "epsilon": eps}
            for tau in g.tau_grid:
                params[f"margin_tau_{tau:g}"] = trivial_bound_margin(KernelParams(X, T, tau), zs,
                                                                     threads)
            rows.append(make_row("montgomery", params, F, T * math.log(T) / math.pi))
    return rows


def pc_density_rows(pairs: Iterable[tuple[float, float]], T: float, zs: ZeroSet) -> list[ReportRow]:
    rows = []
    for a, b in pairs:
        emp, pred = pc_density(a, b, T, zs)
        rows.append(make_row("pc_density", {"alpha": a, "beta": b, "T": T}, emp, pred))
    return rows


# ------------------------------------------------------------ comparators

def _get(params, *names):
    try:
        return [float(params[n]) for n in names]
    except KeyError as e:
        raise ArgumentError(f"missing parameter {e.args[0]}") from None


def lemma_comparator(kind: str, params: Mapping[str, float], zs: ZeroSet,
                     threads: int = 1) -> ReportRow:
    """One report row for the lemma5 or lemma6 inequality.

    Maxima over t are taken over the values the step functions actually
    take, i.e. at the ordinates in range (and at the left end).
    """
    if kind == "lemma5":
        X, T, tau = _get(params, "X", "T", "tau")
        eps = float(params.get("epsilon", DEFAULT_EPSILON))
        if not (X ** eps <= T <= X and tau * T <= X ** eps and 0 <= tau <= 1):
            raise ArgumentError("lemma5 requires X^eps <= T <= X and tau*T <= X^eps")
        F = f_eval(KernelParams(X, T, tau), zs, threads=threads).value
        sp = sigma_prefix(X, T, zs)
        smax = float(np.max(sp * sp)) if sp.size else 0.0
        flags = ("tau0",) if tau == 0 else ()
        return make_row("lemma5", {"X": X, "T": T, "tau": tau, "epsilon": eps}, F,
                        T ** (1 + eps) + X ** eps * smax, flags)
    if kind == "lemma6":
        X, U, T, tau = _get(params, "X", "U", "T", "tau")
        if not (0 <= U < T and 0 <= tau <= 1):
            raise ArgumentError("lemma6 requires 0 <= U < T <= t_max and 0 <= tau <= 1")
        zs.require(T)
        lhs = abs(sigma_windowed(X, U, T, zs))
        fp = f_prefix(X, T, tau, zs, threads)
        k = zs.count(U)
        # F(X, t, tau) for t in [U, T]: the value at t = U, then each later step
        window = fp[max(k - 1, 0):] if k > 0 else np.concatenate([[0.0], fp])
        fmax = float(np.max(window)) if window.size else 0.0
        flags = ("tau0",) if tau == 0 else ()
        rhs = math.sqrt(1 + T * tau) * math.sqrt(max(fmax, 0.0))
        return make_row("lemma6", {"X": X, "U": U, "T": T, "tau": tau}, lhs, rhs, flags)
    raise ArgumentError(f"unknown lemma kind {kind!r}")


def _thm2_bound(x, h, eta, eps):
    if eta == 0:
        if not x ** (3 * eps) <= h <= x ** (1 - eps):
            raise ArgumentError("thm2 with eta=0 requires x^(3 eps) <= h <= x^(1-eps)")
        return h ** 0.5 * x ** eps, "eta0"
    if not 0 < eta < 0.5 - 5 * eps:
        raise ArgumentError("thm2 requires 0 < eta < 1/2 - 5 eps")
    if x ** (eta + 5 * eps) <= h <= x ** 0.5:
        return h ** (2 / 3) * x ** (eta / 3 + eps), "short"
    if x ** 0.5 <= h <= x ** (1 - eta):
        return h ** (1 / 3) * x ** (1 / 6 + eta / 3 + eps), "long"
    raise ArgumentError("thm2 requires x^(eta+5 eps) <= h <= x^(1-eta)")


def theorem_comparator(kind: str, params: Mapping[str, float], zs: ZeroSet | None = None) -> ReportRow:
    """One report row for the thm2, thm3 or remark4 bound.

    The zero set is not needed: these compare exact prime-side quantities
    with the bound shapes. It is accepted for a uniform call signature.
    """
    if kind == "thm2":
        x, h = _get(params, "x", "h")
        eta = float(params.get("eta", 0.0))
        eps = float(params.get("epsilon", DEFAULT_EPSILON))
        rhs, branch = _thm2_bound(x, h, eta, eps)
        out = {"x": x, "h": h, "eta": eta, "epsilon": eps}
        flags = [branch]
        if eta > 0 and x ** (eta + 4 * eps) <= h <= x ** (1 - eta):
            out["conjectural_rhs"] = h ** 0.5 * x ** (eta / 2 + eps)
        lhs = abs(short_interval(x, h))
        if "conjectural_rhs" in out:
            out["conjectural_ratio"] = lhs / out["conjectural_rhs"]
        return make_row("thm2", out, lhs, rhs, flags)
    if kind in ("thm3", "remark4"):
        x, U = _get(params, "x", "U")
        if not x > math.e:
            raise ArgumentError("theorem 3 comparisons need x > e")
        L = math.log(x)
        Z = math.sqrt(x) * L * L
        lhs = abs(delta(x))
        if kind == "thm3":
            (tau,) = _get(params, "tau")
            if not 10 <= U <= Z:
                raise ArgumentError(f"thm3 requires 10 <= U <= Z = x^(1/2) log^2 x = {Z:g}")
            if not 1 / Z <= tau <= 1:
                raise ArgumentError(f"thm3 requires tau in [1/Z, 1] = [{1 / Z:g}, 1]")
            rhs = math.sqrt(x) * (math.log(U) ** 2 + math.sqrt(tau) * L ** 1.5)
            return make_row("thm3", {"x": x, "U": U, "tau": tau}, lhs, rhs)
        if not 1 < U <= Z:
            raise ArgumentError(f"remark4 requires 1 < U <= Z = x^(1/2) log^2 x = {Z:g}")
        lu = math.log(U)
        tau_choice = min(1.0, lu ** 4 / L ** 3)
        flags = ("tau-capped",) if tau_choice == 1.0 else ("tau-log-ratio",)
        return make_row("remark4", {"x": x, "U": U, "tau_choice": tau_choice}, lhs,
                        math.sqrt(x) * lu * lu, flags)
    raise ArgumentError(f"unknown theorem kind {kind!r}")


def theorem_scan(kind: str, g: GridSpec, x_values: Sequence[float], u_values: Sequence[float] = ()) -> list[ReportRow]:
    """thm2 over x_values x h_grid, or thm3 over x_values x u_values x tau_grid, skipping out-of-range points."""
    rows = []
    for x in x_values:
        if kind == "thm2":
            combos = [{"x": x, "h": h, "eta": g.eta, "epsilon": g.epsilon} for h in g.h_grid]
        else:
            combos = [{"x": x, "U": U, "tau": tau} for U in u_values for tau in g.tau_grid]
        for p in combos:
            try:
                rows.append(theorem_comparator(kind, p))
            except ArgumentError:
                continue
    return rows


# ------------------------------------------------------------------ CSV

def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def format_report(rows: Sequence[ReportRow], provenance: Mapping[str, str] | None = None) -> str:
    """CSV text: '#' provenance lines, a header, then one line per row in the given order."""
    buf = io.StringIO()
    buf.write(f"# paircorr {__version__}\n")
    for k, v in (provenance or {}).items():
        buf.write(f"# {k}: {v}\n")
    names: list[str] = []
    for r in rows:
        for k in r.params:
            if k not in names:
                names.append(k)
    buf.write(",".join(["kind", *names, "lhs", "rhs", "ratio", "flags"]) + "\n")
    for r in rows:
        cells = [r.kind] + [_fmt(r.params[k]) if k in r.params else "" for k in names]
        cells += [_fmt(r.lhs), _fmt(r.rhs), _fmt(r.ratio), ";".join(r.flags)]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()
