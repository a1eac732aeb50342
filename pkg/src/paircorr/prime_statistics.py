"""Prime-side quantities: von Mangoldt weights, psi, and short-interval statistics.

Short-interval quantities only need Lambda on the interval itself, so they
are computed from a single sieved segment and work up to the sieve ceiling.
Absolute psi values need every weight below x and come from a lazily grown
table built in fixed-size chunks, so a value never depends on which
arguments were requested before it.
"""
from __future__ import annotations

import math
import os
import struct
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DataError, DomainError
from .summation import fsum, kahan_cumsum

SIEVE_CEILING = 10**12
PSI_CEILING = 10**10  # absolute psi sums every weight below x
_SEGMENT = 1 << 22
_PSI_CHUNK = 1 << 22

_HEADER = struct.Struct("<QQQ")
_RECORD = np.dtype([("n", "<u8"), ("w", "<f8")])


def small_primes(limit: int) -> np.ndarray:
    """Primes <= limit (plain sieve of Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    is_p[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if is_p[p]:
            is_p[p * p::2 * p] = False
    return np.flatnonzero(is_p).astype(np.int64)


@dataclass(frozen=True, eq=False)
class LambdaSegment:
    """Prime powers n in [lo, hi] with weights Lambda(n) = log p."""
    lo: int
    hi: int
    n: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        for a in (self.n, self.w):
            a.setflags(write=False)

    def __len__(self):
        return int(self.n.size)

    @property
    def entries(self) -> list[tuple[int, float]]:
        return [(int(k), float(v)) for k, v in zip(self.n, self.w)]

    def as_dict(self) -> dict[int, float]:
        return dict(self.entries)

    def __eq__(self, other):
        if not isinstance(other, LambdaSegment):
            return NotImplemented
        return (self.lo == other.lo and self.hi == other.hi
                and np.array_equal(self.n, other.n) and np.array_equal(self.w, other.w))

    __hash__ = None


def _sieve_block(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primes in [lo, hi] given all primes <= sqrt(hi)."""
    flags = np.ones(hi - lo + 1, dtype=bool)
    for p in base:
        p = int(p)
        if p * p > hi:
            break
        start = max(p * p, (lo + p - 1) // p * p)
        flags[start - lo::p] = False
    if lo <= 1:
        flags[: 2 - lo] = False
    return np.flatnonzero(flags).astype(np.int64) + lo


def _prime_powers(lo: int, hi: int, base: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """p^k in [lo, hi] with k >= 2, for sieving primes p <= sqrt(hi)."""
    ns, ps = [], []
    for p in base:
        p = int(p)
        q = p * p
        if q > hi:
            break
        while q <= hi:
            if q >= lo:
                ns.append(q)
                ps.append(p)
            q *= p
    return np.array(ns, dtype=np.int64), np.array(ps, dtype=np.int64)


def _read_cache(path: str, lo: int, hi: int) -> LambdaSegment | None:
    try:
        with open(path, "rb") as fh:
            head = fh.read(_HEADER.size)
            if len(head) != _HEADER.size:
                return None
            clo, chi, count = _HEADER.unpack(head)
            rec = np.frombuffer(fh.read(), dtype=_RECORD)
    except FileNotFoundError:
        return None
    if (clo, chi) != (lo, hi) or rec.size != count:
        raise DataError(f"corrupt segment cache file {path}")
    return LambdaSegment(lo, hi, rec["n"].astype(np.int64), rec["w"].copy())


def _write_cache(path: str, seg: LambdaSegment) -> None:
    rec = np.empty(len(seg), dtype=_RECORD)
    rec["n"] = seg.n
    rec["w"] = seg.w
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(seg.lo, seg.hi, len(seg)))
        fh.write(rec.tobytes())
    os.replace(tmp, path)


def lambda_segment(lo: int, hi: int, cache_dir: str | os.PathLike | None = None) -> LambdaSegment:
    """Von Mangoldt weights on [lo, hi] by a segmented sieve.

    With ``cache_dir`` the segment is read from (or written to) a binary
    file there; the cached records are the computed float64 values, so the
    result is identical either way.
    """
    lo, hi = int(lo), int(hi)
    if lo < 1:
        raise ArgumentError(f"lo must be >= 1, got {lo}")
    if lo > hi:
        raise ArgumentError(f"empty segment: lo={lo} > hi={hi}")
    if hi > SIEVE_CEILING:
        raise DomainError(f"hi={hi} exceeds the sieve ceiling {SIEVE_CEILING}")
    path = None
    if cache_dir is not None:
        path = os.path.join(os.fspath(cache_dir), f"lambda_{lo}_{hi}.bin")
        hit = _read_cache(path, lo, hi)
        if hit is not None:
            return hit

    base = small_primes(math.isqrt(hi))
    pw_n, pw_p = _prime_powers(lo, hi, base)
    ns = [pw_n]
    roots = [pw_p]
    for a in range(lo, hi + 1, _SEGMENT):
        pr = _sieve_block(a, min(hi, a + _SEGMENT - 1), base)
        ns.append(pr)
        roots.append(pr)
    n = np.concatenate(ns)
    root = np.concatenate(roots)
    order = np.argsort(n, kind="stable")
    n, root = n[order], root[order]
    seg = LambdaSegment(lo, hi, n, np.log(root.astype(np.float64)))
    if path is not None:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        _write_cache(path, seg)
    return seg


@dataclass(frozen=True, eq=False)
class PsiEvaluator:
    """psi on [segment.lo - 1, segment.hi], anchored at psi(lo - 1) = anchor."""
    segment: LambdaSegment
    anchor: float = 0.0
    prefix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = kahan_cumsum(np.concatenate([[self.anchor], self.segment.w]))
        p.setflags(write=False)
        object.__setattr__(self, "prefix", p)

    @property
    def final(self) -> float:
        return float(self.prefix[-1])

    def __call__(self, x: float) -> float:
        if not self.segment.lo - 1 <= x <= self.segment.hi:
            raise DomainError(f"x={x} outside [{self.segment.lo - 1}, {self.segment.hi}]")
        k = int(np.searchsorted(self.segment.n, math.floor(x), side="right"))
        return float(self.prefix[k])


class _PsiTable:
    # chunk k covers [k*_PSI_CHUNK + 1, (k+1)*_PSI_CHUNK], anchored at the previous chunk's end
    def __init__(self):
        self._lock = threading.Lock()
        self._chunks: list[PsiEvaluator] = []

    def __call__(self, x: float) -> float:
        if x < 2:
            return 0.0
        if x > PSI_CEILING:
            raise DomainError(f"psi is tabulated only up to {PSI_CEILING:.0e}")
        k = (math.floor(x) - 1) // _PSI_CHUNK
        if k >= len(self._chunks):
            with self._lock:
                while len(self._chunks) <= k:
                    j = len(self._chunks)
                    anchor = self._chunks[-1].final if j else 0.0
                    seg = lambda_segment(j * _PSI_CHUNK + 1, (j + 1) * _PSI_CHUNK)
                    self._chunks.append(PsiEvaluator(seg, anchor))
        return self._chunks[k](x)


_PSI = _PsiTable()


def psi(x: float) -> float:
    """Chebyshev psi(x) = sum of Lambda(n) over n <= x (right-continuous)."""
    if not x >= 0:
        raise DomainError(f"psi needs x >= 0, got {x}")
    return _PSI(float(x))


def delta(x: float) -> float:
    """psi(x) - x."""
    if not x >= 1:
        raise DomainError(f"delta needs x >= 1, got {x}")
    return psi(x) - x


def _window(lo_excl: float, hi_incl: float) -> LambdaSegment | None:
    a = max(1, math.floor(lo_excl) + 1)
    b = math.floor(hi_incl)
    return lambda_segment(a, b) if a <= b else None


def short_interval(x: float, h: float) -> float:
    """psi(x + h) - psi(x) - h, from the weights in (x, x + h]."""
    if not x >= 1:
        raise DomainError(f"short_interval needs x >= 1, got {x}")
    if not h > 0:
        raise DomainError(f"h must be positive, got {h}")
    seg = _window(x, x + h)
    w = [] if seg is None else seg.w.tolist()
    return math.fsum(w + [-h])


@dataclass(frozen=True)
class IntervalStats:
    X: float
    Y: float
    h: float
    J_value: float
    breakpoints_used: int


def j_integral(X: float, Y: float, h: float) -> IntervalStats:
    """Integral over [X, X+Y] of (psi(x+h) - psi(x) - h)^2, evaluated exactly.

    As a function of x the integrand only changes where a prime power n
    enters the window (x = n - h) or leaves it (x = n), so the integral is a
    finite sum of piece lengths times squared piece values.
    """
    if not X >= 1:
        raise DomainError(f"X must be >= 1, got {X}")
    if not Y >= 0:
        raise ArgumentError(f"Y must be nonnegative, got {Y}")
    if not h > 0:
        raise DomainError(f"h must be positive, got {h}")
    if Y == 0:
        return IntervalStats(X, Y, h, 0.0, 0)
    seg = _window(X, X + Y + h)
    if seg is None:
        off = np.zeros(0)
        w = np.zeros(0)
    else:
        off = seg.n.astype(np.float64) - X
        w = seg.w
    bp = np.concatenate([off, off - h])
    bp = np.unique(bp[(bp > 0) & (bp < Y)])
    edges = np.concatenate([[0.0], bp, [Y]])
    mid = 0.5 * (edges[:-1] + edges[1:])
    # weights with mid < offset <= mid + h are in the window at x = X + mid
    P = np.concatenate([[0.0], kahan_cumsum(w)])
    a = np.searchsorted(off, mid, side="right")
    b = np.searchsorted(off, mid + h, side="right")
    d = (P[b] - P[a]) - h
    J = fsum(np.diff(edges) * d * d)
    return IntervalStats(X, Y, h, max(J, 0.0), int(bp.size))


def selberg_ratio(X: float, h: float) -> float:
    """J(X, X, h) / (h X log^2(2X/h)); a report quantity, nothing is asserted."""
    if not X >= 2:
        raise DomainError(f"X must be >= 2, got {X}")
    if not 0 < h <= X:
        raise DomainError(f"need 0 < h <= X, got h={h}")
    J = j_integral(X, X, h).J_value
    return J / (h * X * math.log(2 * X / h) ** 2)
