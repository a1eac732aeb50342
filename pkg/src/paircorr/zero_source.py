"""Zeta zero ordinates: computation, ingestion and validation.

Zeros are located as sign changes of Hardy's function

    Z(t) = exp(i*theta(t)) * zeta(1/2 + i t),

sampled on Gram points and refined by Brent's method. ``Z`` is computed by
Euler-Maclaurin summation of zeta below :data:`RS_CROSSOVER` and by the
Riemann-Siegel formula with the correction terms C0..C4 above it.

Only positive ordinates are stored; the conjugate zeros ``-gamma`` are
implied everywhere downstream.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.optimize import brentq
from scipy.special import bernoulli, loggamma

from .errors import DomainError, IncompleteDataError, MissedZeroError, ZeroFileError

FINDER_VERSION = "1"
FIRST_ZERO = 14.134725141734693
DEFAULT_ACCURACY = 1e-9
T_MAX_SUPPORTED = 1e4

# Riemann-Siegel with C0..C4 stays below 5e-10 absolute from here on
# (measured against an mpmath reference); Euler-Maclaurin is used below.
RS_CROSSOVER = 500.0

_TWO_PI = 2.0 * math.pi
_EM_TERMS = 20
_B2K = bernoulli(2 * _EM_TERMS)[2::2][:_EM_TERMS] / np.array(
    [math.factorial(2 * k) for k in range(1, _EM_TERMS + 1)], dtype=float)


@dataclass(frozen=True)
class ZeroSourceMeta:
    origin: str  # "computed" or "ingested"
    source_label: str = ""
    generated_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def __post_init__(self):
        if self.origin not in ("computed", "ingested"):
            raise ValueError(f"unknown zero origin {self.origin!r}")
        if self.origin == "ingested" and not self.source_label:
            raise ValueError("ingested zero sets need a source label")


@dataclass(frozen=True, eq=False)
class ZeroSet:
    """Strictly increasing positive ordinates, complete up to ``t_max``."""

    ordinates: np.ndarray
    t_max: float
    accuracy: float = DEFAULT_ACCURACY
    meta: ZeroSourceMeta = field(default_factory=lambda: ZeroSourceMeta("computed", "in-memory"))

    def __post_init__(self):
        g = np.array(self.ordinates, dtype=np.float64).ravel()
        if g.size and g[0] <= 0:
            raise ValueError("ordinates must be positive")
        if g.size > 1 and not np.all(np.diff(g) > 0):
            raise ValueError("ordinates must be strictly increasing")
        if not self.accuracy > 0:
            raise ValueError("accuracy must be positive")
        g.flags.writeable = False
        object.__setattr__(self, "ordinates", g)
        object.__setattr__(self, "t_max", float(self.t_max))

    @classmethod
    def from_ordinates(cls, ordinates: Iterable[float], t_max: float | None = None,
                       accuracy: float = DEFAULT_ACCURACY, label: str = "in-memory") -> "ZeroSet":
        g = np.asarray(list(ordinates), dtype=np.float64)
        if t_max is None:
            t_max = float(g[-1]) if g.size else 0.0
        return cls(g, t_max, accuracy, ZeroSourceMeta("computed", label))

    def __len__(self) -> int:
        return int(self.ordinates.size)

    def require(self, T: float) -> None:
        if T > self.t_max:
            raise IncompleteDataError(
                f"zero set is complete only up to {self.t_max:g}, requested T={T:g}")

    def count(self, T: float) -> int:
        """#{gamma <= T}."""
        return int(np.searchsorted(self.ordinates, T, side="right"))

    def upto(self, T: float) -> np.ndarray:
        self.require(T)
        return self.ordinates[: self.count(T)]

    def restrict(self, T: float) -> "ZeroSet":
        return ZeroSet(self.upto(T), T, self.accuracy, self.meta)


# --------------------------------------------------------------------- theta

def _theta_exact(t):
    t = np.asarray(t, dtype=np.float64)
    return np.imag(loggamma(0.25 + 0.5j * t)) - 0.5 * t * math.log(math.pi)


def _theta_series(t):
    t = np.asarray(t, dtype=np.float64)
    r = 1.0 / t
    r2 = r * r
    tail = r * (1 / 48 + r2 * (7 / 5760 + r2 * (31 / 80640 + r2 * (127 / 430080 + r2 * 511 / 1216512))))
    return 0.5 * t * np.log(t / _TWO_PI) - 0.5 * t - math.pi / 8 + tail


def rs_theta(t):
    """Riemann-Siegel theta function.

    The Stirling series (through the t**-9 term) is used for t >= 10, where
    its truncation error is below 1e-13; below that the exact log-gamma
    expression is used.
    """
    ta = np.asarray(t, dtype=np.float64)
    if np.any(ta < 1):
        raise DomainError("rs_theta requires t >= 1")
    out = np.where(ta >= 10, _theta_series(np.maximum(ta, 10)), _theta_exact(ta))
    return float(out) if out.ndim == 0 else out


# ------------------------------------------------------------------ Hardy Z

def _zeta_em(t: np.ndarray) -> np.ndarray:
    """zeta(1/2 + i t) by Euler-Maclaurin summation, for a batch of t."""
    s = 0.5 + 1j * t
    N = int(np.max(t) / 3.0) + 20
    logn = np.log(np.arange(1, N, dtype=np.float64))
    head = np.zeros(t.shape, dtype=complex)
    for i in range(0, t.size, 256):
        ss = s[i:i + 256]
        head[i:i + 256] = np.exp(-np.outer(ss, logn)).sum(axis=1)
    Ns = np.exp(-s * math.log(N))
    acc = head + N * Ns / (s - 1) + 0.5 * Ns
    fac = s * Ns / N
    for k in range(1, _EM_TERMS + 1):
        acc = acc + _B2K[k - 1] * fac
        fac = fac * (s + 2 * k - 1) * (s + 2 * k) / (N * N)
    return acc


_CAUCHY_M = 64
_CAUCHY_R = 0.5
_CAUCHY_ANG = 2 * math.pi * (np.arange(_CAUCHY_M) + 0.5) / _CAUCHY_M
_CAUCHY_KER = np.exp(-1j * np.outer(np.arange(13), _CAUCHY_ANG)) / _CAUCHY_M
_CAUCHY_SCALE = np.array([math.factorial(k) / _CAUCHY_R ** k for k in range(13)])


def _psi_derivatives(p: np.ndarray) -> np.ndarray:
    """Derivatives 0..12 of cos(2pi(p^2-p-1/16))/cos(2pi p) at each p.

    The function is entire, so Taylor coefficients come from the trapezoid
    rule on a circle around p (spectrally accurate); the circle avoids the
    removable singularities on the real axis.
    """
    z = p[:, None] + _CAUCHY_R * np.exp(1j * _CAUCHY_ANG)[None, :]
    f = np.cos(_TWO_PI * (z * z - z - 1.0 / 16)) / np.cos(_TWO_PI * z)
    return (f @ _CAUCHY_KER.T).real * _CAUCHY_SCALE


def _z_riemann_siegel(t: np.ndarray) -> np.ndarray:
    a = np.sqrt(t / _TWO_PI)
    m = np.floor(a).astype(np.int64)
    p = a - m
    th = _theta_series(t)
    n = np.arange(1, int(m.max()) + 1, dtype=np.float64)
    terms = np.cos(th[:, None] - t[:, None] * np.log(n)[None, :]) / np.sqrt(n)[None, :]
    terms[n[None, :] > m[:, None]] = 0.0
    main = 2.0 * terms.sum(axis=1)

    d = _psi_derivatives(p)
    pi2 = math.pi ** 2
    c0 = d[:, 0]
    c1 = -d[:, 3] / (96 * pi2)
    c2 = d[:, 2] / (64 * pi2) + d[:, 6] / (18432 * pi2 ** 2)
    c3 = -d[:, 1] / (64 * pi2) - d[:, 5] / (3840 * pi2 ** 2) - d[:, 9] / (5308416 * pi2 ** 3)
    c4 = (d[:, 0] / (128 * pi2) + 19 * d[:, 4] / (24576 * pi2 ** 2)
          + 11 * d[:, 8] / (5898240 * pi2 ** 3) + d[:, 12] / (2038431744 * pi2 ** 4))
    w = np.sqrt(_TWO_PI / t)
    rem = c0 + w * (c1 + w * (c2 + w * (c3 + w * c4)))
    sign = np.where(m % 2 == 1, 1.0, -1.0)
    return main + sign * np.sqrt(w) * rem


def hardy_Z(t):
    """Hardy's Z function at real ``t >= 0`` (scalar or array)."""
    ta = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(ta < 0):
        raise DomainError("hardy_Z requires t >= 0")
    out = np.empty_like(ta)
    lo = ta < RS_CROSSOVER
    if lo.any():
        tl = ta[lo]
        out[lo] = (np.exp(1j * _theta_exact(tl)) * _zeta_em(tl)).real
    if (~lo).any():
        out[~lo] = _z_riemann_siegel(ta[~lo])
    return float(out[0]) if np.ndim(t) == 0 else out


def _z_scalar(t: float) -> float:
    return float(hardy_Z(np.array([t]))[0])


# ----------------------------------------------------------- Gram points

def gram_point(n: int) -> float:
    """The solution t > 7 of theta(t) = n*pi."""
    if n < -1:
        raise DomainError("Gram points are indexed from n = -1")
    target = n * math.pi

    def f(t):
        return rs_theta(t) - target

    lo = 7.0
    hi = max(20.0, 2.0 * (n + 2))
    while f(hi) <= 0:
        lo, hi = hi, 2 * hi
    return brentq(f, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=200)


def rvm_count(T: float) -> float:
    """Smooth Riemann-von Mangoldt zero count (T/2pi)log(T/2pi) - T/2pi + 7/8."""
    if T < 2:
        raise DomainError("rvm_count requires T >= 2")
    x = T / _TWO_PI
    return x * math.log(x) - x + 7.0 / 8.0


def _sign_changes(z: np.ndarray) -> np.ndarray:
    pos = z > 0
    return np.flatnonzero(pos[1:] != pos[:-1])


def _scan_block(ts: np.ndarray, expected: int, label: str) -> list[tuple[float, float]]:
    zs = hardy_Z(ts)
    idx = _sign_changes(zs)
    if idx.size != expected:
        for sub in (64, 256, 1024, 4096):
            fine = np.concatenate(
                [np.linspace(a, b, sub, endpoint=False) for a, b in zip(ts[:-1], ts[1:])] + [ts[-1:]])
            zf = hardy_Z(fine)
            idx = _sign_changes(zf)
            if idx.size == expected:
                ts, zs = fine, zf
                break
        else:
            raise MissedZeroError(
                f"missed zero: Gram block {label} should hold {expected} zeros, "
                f"found {idx.size} sign changes after rescanning", block=label)
    return [(float(ts[i]), float(ts[i + 1])) for i in idx]


def find_zeros(t_max: float) -> ZeroSet:
    """All zero ordinates in (0, t_max], for 20 <= t_max <= 1e4."""
    if not (20 <= t_max <= T_MAX_SUPPORTED):
        raise DomainError(f"find_zeros supports 20 <= t_max <= {T_MAX_SUPPORTED:g}")

    n_hi = int(math.ceil(rs_theta(t_max) / math.pi)) + 1
    ns = list(range(-1, n_hi + 1))
    gram = np.array([gram_point(n) for n in ns])
    zg = hardy_Z(gram)
    parity = np.where(np.array(ns) % 2 == 0, 1.0, -1.0)
    good = parity * zg > 0
    # extend until the last Gram point is good so the final block closes
    while not good[-1]:
        n = ns[-1] + 1
        ns.append(n)
        g = gram_point(n)
        gram = np.append(gram, g)
        z = _z_scalar(g)
        zg = np.append(zg, z)
        good = np.append(good, (1.0 if n % 2 == 0 else -1.0) * z > 0)
    if not good[0]:
        raise MissedZeroError("Gram point g_-1 is bad; cannot anchor the count")

    goods = np.flatnonzero(good)
    brackets: list[tuple[float, float]] = []
    for a, b in zip(goods[:-1], goods[1:]):
        label = f"[g_{ns[a]}, g_{ns[b]}]"
        brackets.extend(_scan_block(gram[a:b + 1], int(b - a), label))

    zeros = np.array([brentq(_z_scalar, a, b, xtol=1e-12, rtol=4 * np.finfo(float).eps)
                      for a, b in brackets])
    # Rosser-rule counts are exact at good Gram points; cross-check the smooth count
    g_last = gram[goods[-1]]
    if abs(zeros.size - rvm_count(g_last)) > 1.0:
        raise MissedZeroError(
            f"count {zeros.size} up to g_{ns[goods[-1]]} disagrees with Riemann-von Mangoldt "
            f"({rvm_count(g_last):.3f})", block=f"[g_-1, g_{ns[goods[-1]]}]")
    zeros = zeros[zeros <= t_max]
    meta = ZeroSourceMeta("computed", f"internal finder v{FINDER_VERSION}, t_max={t_max:g}")
    return ZeroSet(zeros, t_max, DEFAULT_ACCURACY, meta)


# ----------------------------------------------------------------- file I/O

def ingest_zeros(path: str | os.PathLike, t_max_hint: float | None = None) -> ZeroSet:
    """Read a plain-text zero table: one ordinate per line, '#' lines are metadata."""
    path = Path(path)
    header: dict[str, str] = {}
    values: list[float] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, val = line[1:].partition(":")
                if sep:
                    header[key.strip().lower()] = val.strip()
                continue
            try:
                v = float(line)
            except ValueError:
                raise ZeroFileError(f"not a number: {line!r}", lineno) from None
            if not math.isfinite(v) or v <= 0:
                raise ZeroFileError(f"ordinate must be a positive finite number: {line!r}", lineno)
            if values and v <= values[-1]:
                raise ZeroFileError(
                    f"ordinates not strictly ascending ({v!r} after {values[-1]!r})", lineno)
            values.append(v)
    if not values:
        raise ZeroFileError(f"{path}: no ordinates found")

    try:
        accuracy = float(header["accuracy"]) if "accuracy" in header else DEFAULT_ACCURACY
        if t_max_hint is not None:
            t_max = float(t_max_hint)
        elif "t_max" in header:
            t_max = float(header["t_max"])
        else:
            t_max = values[-1]
    except ValueError as exc:
        raise ZeroFileError(f"{path}: bad header value ({exc})") from None
    label = header.get("source") or str(path)
    return ZeroSet(np.array(values), t_max, accuracy, ZeroSourceMeta("ingested", label))


def write_zeros(zs: ZeroSet, path: str | os.PathLike) -> None:
    """Write ``zs`` in the ingestible text format; ordinates round-trip bit-exactly."""
    lines = [
        f"# source: {zs.meta.source_label}",
        f"# origin: {zs.meta.origin}",
        f"# t_max: {zs.t_max!r}",
        f"# accuracy: {zs.accuracy!r}",
        f"# finder_version: {FINDER_VERSION}",
        f"# generated_at: {zs.meta.generated_at}",
    ]
    lines.extend(repr(float(g)) for g in zs.ordinates)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# --------------------------------------------------------------- validation

@dataclass(frozen=True)
class CheckResult:
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def __str__(self) -> str:
        return "\n".join(f"{name}: {'pass' if c.passed else 'FAIL'} ({c.detail})"
                         for name, c in self.checks.items())


def validate_zero_set(zs: ZeroSet, gram_check_limit: float = T_MAX_SUPPORTED) -> ValidationReport:
    """Sanity checks on a zero set; failures are reported, never raised.

    ``gram_count`` compares exact counts at good Gram points (Rosser's rule
    holds far beyond the heights handled here) and is what catches a single
    missing ordinate; it is skipped above ``gram_check_limit``.
    """
    if len(zs) == 0:
        raise ValueError("empty zero set")
    g = zs.ordinates
    checks = {}

    lines = []
    ok = True
    for T in (zs.t_max, zs.t_max / 2):
        if T < 2:
            continue
        dev = abs(zs.count(T) - rvm_count(T))
        bound = 2 + 0.5 * math.log(T)
        ok &= dev <= bound
        lines.append(f"T={T:g}: |N-N_rvm|={dev:.3f} <= {bound:.3f}")
    checks["rvm_count"] = CheckResult(bool(ok), "; ".join(lines) or "t_max < 2")

    mono = bool(np.all(np.diff(g) > 0))
    checks["monotone"] = CheckResult(mono, "strictly increasing" if mono else "order violation")

    if zs.t_max >= 15:
        d = abs(g[0] - FIRST_ZERO)
        checks["first_ordinate"] = CheckResult(bool(d <= 1e-3), f"|gamma_1 - 14.134725| = {d:.3g}")
    else:
        checks["first_ordinate"] = CheckResult(True, "skipped (t_max < 15)")

    top = min(zs.t_max, gram_check_limit)
    if top >= 20:
        n_hi = int(math.floor(rs_theta(top) / math.pi))
        ns = np.arange(-1, n_hi + 1)
        gram = np.array([gram_point(int(n)) for n in ns])
        keep = gram <= top
        ns, gram = ns[keep], gram[keep]
        good = np.where(ns % 2 == 0, 1.0, -1.0) * hardy_Z(gram) > 0
        counts = np.searchsorted(g, gram[good], side="right")
        bad = np.flatnonzero(counts != ns[good] + 1)
        if bad.size:
            n0 = int(ns[good][bad[0]])
            checks["gram_count"] = CheckResult(
                False, f"N(g_{n0}) = {int(counts[bad[0]])}, expected {n0 + 1}")
        else:
            checks["gram_count"] = CheckResult(True, f"{int(good.sum())} good Gram points agree")
    else:
        checks["gram_count"] = CheckResult(True, "skipped")
    return ValidationReport(checks)
