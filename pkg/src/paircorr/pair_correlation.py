"""Zero exponential sums and the extended pair-correlation function.

Notation: ``L = log X``; ``c_j = cos(gamma_j L)``, ``s_j = sin(gamma_j L)``
for the positive ordinates ``gamma_j <= T``. The four sign combinations of
a signed pair collapse into cosines of differences and sums of ordinates,

    F(X, T, tau) = 2N + sum_{j != k} 8 cos((g_j - g_k) L) / (4 + tau^2 (g_j - g_k)^2)
                      + sum_{j, k}  8 cos((g_j + g_k) L) / (4 + tau^2 (g_j + g_k)^2),

and the cosines are formed from the per-zero phases by angle addition,
``cos((g_j -+ g_k) L) = c_j c_k +- s_j s_k``. Every path (sigma, F, the
integrands used by the quadrature checks) therefore sees the same rounded
values of ``X^{i gamma}``; identities between them hold to summation
accuracy rather than to the accuracy of large phase arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.signal import fftconvolve

from .errors import ArgumentError, BackendUnsupportedError, DomainError
from .quadrature import NODES, integrate
from .summation import compensated_sum, fsum, kahan_cumsum, parallel_map, row_blocks
from .zero_source import ZeroSet

_EPS = np.finfo(float).eps
# evaluation points x zeros held in memory at once by the oscillatory integrands
_INTEGRAND_BLOCK = 1 << 20


@dataclass(frozen=True)
class KernelParams:
    X: float
    T: float
    tau: float

    def __post_init__(self):
        if not self.X >= 1:
            raise DomainError(f"X must be >= 1, got {self.X}")
        if not self.T > 0:
            raise DomainError(f"T must be positive, got {self.T}")
        if not 0 <= self.tau <= 1:
            raise DomainError(f"tau must lie in [0, 1], got {self.tau}")


@dataclass(frozen=True)
class PairSumResult:
    value: float
    error_bound: float
    backend: str
    diagonal: float
    offdiagonal: float


def _check_X(X: float) -> None:
    if not X >= 1:
        raise DomainError(f"X must be >= 1, got {X}")


def _phases(gammas: np.ndarray, X: float) -> tuple[np.ndarray, np.ndarray]:
    ph = gammas * math.log(X)
    return np.cos(ph), np.sin(ph)


# ------------------------------------------------------------ exponential sums

def sigma(X: float, T: float, zs: ZeroSet) -> float:
    """Sum of X^{i gamma} over |gamma| <= T, i.e. 2 sum_{0<gamma<=T} cos(gamma log X)."""
    _check_X(X)
    c, _ = _phases(zs.upto(T), X)
    return 2.0 * compensated_sum(c)


def sigma_windowed(X: float, U: float, T: float, zs: ZeroSet) -> float:
    """Sum of X^{i gamma} over U < |gamma| <= T."""
    _check_X(X)
    if not 0 <= U < T:
        raise ArgumentError(f"need 0 <= U < T, got U={U}, T={T}")
    g = zs.upto(T)
    c, _ = _phases(g[np.searchsorted(g, U, side="right"):], X)
    return 2.0 * compensated_sum(c)


def sigma_shifted(X: float, T: float, v: float, zs: ZeroSet) -> float:
    """Sum of X^{i gamma} e^{i gamma v} over |gamma| <= T."""
    _check_X(X)
    g = zs.upto(T)
    return 2.0 * compensated_sum(np.cos(g * (math.log(X) + v)))


def _shifted_sigma_values(g, c, s, v: np.ndarray) -> np.ndarray:
    """Sigma(X, T; v) for an array of shifts, from precomputed per-zero phases."""
    out = np.empty(v.size)
    step = max(1, _INTEGRAND_BLOCK // max(1, g.size))
    for i in range(0, v.size, step):
        gv = np.multiply.outer(v[i:i + step], g)
        out[i:i + step] = 2.0 * (np.cos(gv) @ c - np.sin(gv) @ s)
    return out


def sigma_prefix(X: float, T: float, zs: ZeroSet) -> np.ndarray:
    """Values of the step function t -> Sigma(X, t) on (0, T]: entry k is Sigma(X, gamma_k)."""
    _check_X(X)
    c, _ = _phases(zs.upto(T), X)
    return 2.0 * kahan_cumsum(c)


# ------------------------------------------------------------------ pair sums

def _block_rows(g, c, s, tau2, j0, j1):
    """Row sums of the pair terms for rows j0..j1-1 (diagonal of the difference part excluded)."""
    gj, cj, sj = g[j0:j1, None], c[j0:j1, None], s[j0:j1, None]
    cc = cj * c
    ss = sj * s
    d = gj - g
    sm = gj + g
    diff = (cc + ss) * (8.0 / (4.0 + tau2 * (d * d)))
    summ = (cc - ss) * (8.0 / (4.0 + tau2 * (sm * sm)))
    r = np.arange(j1 - j0)
    diff[r, j0 + r] = 0.0
    return compensated_sum(np.concatenate([diff, summ], axis=1), axis=1)


def _f_exact(g, c, s, tau, threads):
    n = g.size
    tau2 = tau * tau
    blocks = row_blocks(n, 2 * n)
    rows = parallel_map(lambda b: _block_rows(g, c, s, tau2, *b), blocks, threads)
    off = fsum(np.concatenate(rows)) if rows else 0.0
    diag = 2.0 * n
    return PairSumResult(diag + off, 0.0, "exact", diag, off)


def _pair_index_ranges(g, lo_vals, hi_vals):
    lo = np.searchsorted(g, lo_vals, side="left")
    hi = np.searchsorted(g, hi_vals, side="right")
    return lo, np.maximum(hi, lo)


def _ragged(j0, lo, hi):
    counts = hi - lo
    rows = np.repeat(np.arange(j0, j0 + counts.size), counts)
    starts = np.repeat(lo - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    cols = np.arange(int(counts.sum())) + starts
    return rows, cols


def _banded_block(g, c, s, tau2, B, j0, j1):
    gj = g[j0:j1]
    lo, hi = _pair_index_ranges(g, gj - B, gj + B)
    rows, cols = _ragged(j0, lo, hi)
    keep = rows != cols
    rows, cols = rows[keep], cols[keep]
    d = g[rows] - g[cols]
    diff = (c[rows] * c[cols] + s[rows] * s[cols]) * (8.0 / (4.0 + tau2 * (d * d)))
    lo2 = np.zeros(j1 - j0, dtype=np.int64)
    hi2 = np.searchsorted(g, B - gj, side="right")
    rows2, cols2 = _ragged(j0, lo2, hi2)
    sm = g[rows2] + g[cols2]
    summ = (c[rows2] * c[cols2] - s[rows2] * s[cols2]) * (8.0 / (4.0 + tau2 * (sm * sm)))
    return fsum(np.concatenate([diff, summ])), diff.size + summ.size


def band_tail_bound(g: np.ndarray, tau: float, B: float) -> float:
    """Bound on the pair terms with |gamma -+ gamma'| > B, from unit-interval occupancy counts.

    Two ordinates in unit buckets m, m' differ by at least |m - m'| - 1 and
    their sum is at least m + m', so every excluded term is bounded by
    8 / (4 + tau^2 max(B, distance lower bound)^2).
    """
    if g.size == 0:
        return 0.0
    m = np.floor(g).astype(np.int64)
    counts = np.bincount(m).astype(float)
    conv = np.rint(fftconvolve(counts, counts))  # conv[S] = sum over m + m' = S
    corr = np.rint(fftconvolve(counts, counts[::-1]))  # corr[D + M - 1] = sum over m - m' = D
    M = counts.size
    tau2 = tau * tau

    D = np.arange(-(M - 1), M)
    absD = np.abs(D)
    may_exclude = absD + 1 > B
    dist = np.maximum(np.maximum(absD - 1, 0), B)
    diff_bound = np.sum(corr[may_exclude] * 8.0 / (4.0 + tau2 * dist[may_exclude] ** 2))

    S = np.arange(conv.size)
    may_exclude = S + 2 > B
    dist = np.maximum(S, B)
    sum_bound = np.sum(conv[may_exclude] * 8.0 / (4.0 + tau2 * dist[may_exclude] ** 2))
    return float(diff_bound + sum_bound)


def _f_banded(g, c, s, tau, B, threads):
    n = g.size
    tau2 = tau * tau
    band_rows = max(1, int(np.searchsorted(g, g[0] + B, side="right"))) if n else 1
    blocks = row_blocks(n, 2 * band_rows)
    parts = parallel_map(lambda b: _banded_block(g, c, s, tau2, B, *b), blocks, threads)
    off = math.fsum(p[0] for p in parts)
    n_terms = sum(p[1] for p in parts)
    diag = 2.0 * n
    bound = band_tail_bound(g, tau, B) + 64 * _EPS * (n_terms + 2 * n * n)
    return PairSumResult(diag + off, bound, "banded", diag, off)


def _weighted_square_integrand(g, c, s, tau):
    def f(v):
        sv = _shifted_sigma_values(g, c, s, v)
        return sv * sv * np.exp(-2.0 * np.abs(v) / tau)
    return f


def _weighted_square_panels(g, c, s, tau):
    """Panel evaluator for the same integrand.

    Within a panel, e^{i gamma v} = e^{i gamma centre} e^{i gamma half x_k};
    the second factor depends only on the panel width, so a whole batch of
    panels costs one complex exponential per zero and panel plus a matrix
    product.
    """
    e = c + 1j * s
    offsets: dict[float, np.ndarray] = {}

    def f(centre, half):
        out = np.empty((centre.size, 15))
        step = max(1, _INTEGRAND_BLOCK // max(1, g.size))
        for h in np.unique(half):
            h = float(h)
            if h not in offsets:
                offsets[h] = np.exp(1j * np.multiply.outer(g, h * NODES))
            idx = np.flatnonzero(half == h)
            for i in range(0, idx.size, step):
                sel = idx[i:i + step]
                base = np.exp(1j * np.multiply.outer(centre[sel], g)) * e
                out[sel] = 2.0 * (base @ offsets[h]).real
        v = centre[:, None] + half[:, None] * NODES[None, :]
        return out * out * np.exp(-2.0 * np.abs(v) / tau)
    return f


def _cutoff(n: int, tau: float, tail_tol: float) -> float:
    """Half-width V with (2N)^2 tau exp(-2V/tau) <= tail_tol (trivial bound |Sigma| <= 2N)."""
    big = (2.0 * n) ** 2 * tau
    return 0.5 * tau * math.log(big / tail_tol) if big > tail_tol else 0.0


def weighted_square_integral(X: float, T: float, tau: float, zs: ZeroSet, tol: float,
                             threads: int = 1):
    """Integral over R of |Sigma(X,T;v)|^2 exp(-2|v|/tau), to absolute accuracy ``tol``.

    Returns ``(value, error)`` where ``error`` combines the quadrature
    estimate and the truncation tail.
    """
    _check_X(X)
    if not tau > 0:
        raise ArgumentError("the weighted integral needs tau > 0")
    g = zs.upto(T)
    if g.size == 0:
        return 0.0, 0.0
    c, s = _phases(g, X)
    tail_tol = 0.5 * tol
    V = _cutoff(g.size, tau, tail_tol)
    tail = (2.0 * g.size) ** 2 * tau * math.exp(-2.0 * V / tau)
    width = min(1.0 / g[-1], tau)
    res = integrate(_weighted_square_integrand(g, c, s, tau), -V, V, 0.5 * tol,
                    max_width=width, breakpoints=[0.0], threads=threads,
                    panel_f=_weighted_square_panels(g, c, s, tau))
    return res.value, res.error + tail


def _f_quadrature(g, X, T, tau, zs, tol, threads):
    n = g.size
    value, err = weighted_square_integral(X, T, tau, zs, tau * tol, threads)
    V = _cutoff(n, tau, 0.5 * tau * tol)
    roundoff = _EPS * (2.0 * n) ** 2 * (16.0 + 4.0 * (g[-1] if n else 0.0) * V)
    F = value / tau
    diag = 2.0 * n
    return PairSumResult(F, max(2.0 * tol, err / tau) + roundoff, "quadrature", diag, F - diag)


def f_eval(p: KernelParams, zs: ZeroSet, backend: str = "exact", *, band: float | None = None,
           tol: float | None = None, threads: int = 1) -> PairSumResult:
    """Extended pair-correlation F(X, T, tau).

    ``backend`` is ``"exact"`` (all pairs), ``"banded"`` (pairs with
    |gamma - gamma'| <= ``band``, plus a rigorous tail bound) or
    ``"quadrature"`` (the weighted integral of |Sigma(X,T;v)|^2 divided by
    tau, to accuracy ``tol`` in F).
    """
    g = zs.upto(p.T)
    if backend == "exact":
        c, s = _phases(g, p.X)
        return _f_exact(g, c, s, p.tau, threads)
    if backend == "banded":
        if band is None or not band > 0:
            raise ArgumentError("banded backend needs a positive band width")
        c, s = _phases(g, p.X)
        return _f_banded(g, c, s, p.tau, float(band), threads)
    if backend == "quadrature":
        if p.tau == 0:
            raise BackendUnsupportedError("quadrature backend needs tau > 0")
        if tol is None or not tol > 0:
            raise ArgumentError("quadrature backend needs a positive tol")
        return _f_quadrature(g, p.X, p.T, p.tau, zs, tol, threads)
    raise ArgumentError(f"unknown backend {backend!r}")


def f_prefix(X: float, T: float, tau: float, zs: ZeroSet, threads: int = 1) -> np.ndarray:
    """F(X, t, tau) for t at each ordinate <= T: entry k uses the first k+1 zeros.

    F is a right-continuous step function of t, so these values (and
    F = 0 below the first ordinate) are all the values it takes.
    """
    _check_X(X)
    g = zs.upto(T)
    n = g.size
    if n == 0:
        return np.zeros(0)
    c, s = _phases(g, X)
    tau2 = tau * tau

    def increments(b):
        j0, j1 = b
        gj, cj, sj = g[j0:j1, None], c[j0:j1, None], s[j0:j1, None]
        cols = np.arange(n)[None, :]
        rows = np.arange(j0, j1)[:, None]
        d = gj - g
        sm = gj + g
        cc = cj * c
        ss = sj * s
        diff = (cc + ss) * (8.0 / (4.0 + tau2 * d * d))
        summ = (cc - ss) * (8.0 / (4.0 + tau2 * sm * sm))
        lower = cols < rows
        terms = np.where(lower, 2.0 * (diff + summ), 0.0) + np.where(cols == rows, summ, 0.0)
        return compensated_sum(terms, axis=1) + 2.0

    inc = np.concatenate(parallel_map(increments, row_blocks(n, n), threads))
    return kahan_cumsum(inc)


# ------------------------------------------------------------ identity checks

def lemma2_residual(p: KernelParams, zs: ZeroSet, tol: float, threads: int = 1) -> float:
    """Relative gap between the weighted |Sigma|^2 integral and tau * F(X, T, tau)."""
    if p.tau == 0:
        raise ArgumentError("the weighted-integral identity needs tau > 0")
    integral, _ = weighted_square_integral(p.X, p.T, p.tau, zs, tol, threads)
    target = p.tau * f_eval(p, zs, threads=threads).value
    return abs(integral - target) / max(1.0, target)


@dataclass(frozen=True)
class Lemma3Result:
    lhs: float
    rhs: float
    quad_error: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.quad_error

    def __iter__(self):
        return iter((self.lhs, self.rhs))


def lemma3_check(V: float, T: float, tau: float, zs: ZeroSet, tol: float,
                 threads: int = 1) -> Lemma3Result:
    """Compare the integral of |Sigma(u,T)|^2 over [V, V(1+tau)] with e^3 V tau F(V,T,tau)."""
    if not V >= 1:
        raise DomainError("V must be >= 1")
    if not 0 < tau <= 1:
        raise ArgumentError("tau must lie in (0, 1]")
    g = zs.upto(T)
    F = f_eval(KernelParams(V, T, tau), zs, threads=threads).value
    rhs = math.e ** 3 * V * tau * F
    if g.size == 0:
        return Lemma3Result(0.0, rhs, 0.0)

    def f(u):
        out = np.empty(u.size)
        step = max(1, _INTEGRAND_BLOCK // g.size)
        for i in range(0, u.size, step):
            sv = 2.0 * np.cos(np.multiply.outer(np.log(u[i:i + step]), g)).sum(axis=1)
            out[i:i + step] = sv * sv
        return out

    res = integrate(f, V, V * (1 + tau), tol, max_width=V / g[-1], threads=threads)
    return Lemma3Result(res.value, rhs, res.error)


def lemma1_check(f: Callable[[np.ndarray], np.ndarray], X: float, Y: float, h: float,
                 tol: float) -> float:
    """|int_X^{X+Y} int_x^{x+h} f - int_X^{X+h} int_x^{x+Y} f| by nested adaptive quadrature."""
    if Y < 0 or h < 0:
        raise ArgumentError("Y and h must be nonnegative")
    inner_tol = tol / (10.0 * max(1.0, Y, h))

    def iterated(outer_len, inner_len):
        def outer(xs):
            return np.array([integrate(f, x, x + inner_len, inner_tol).value for x in xs])
        return integrate(outer, X, X + outer_len, tol / 10.0).value

    return abs(iterated(Y, h) - iterated(h, Y))


# ------------------------------------------------------------ Montgomery statistics

def montgomery_ratio(X: float, T: float, zs: ZeroSet, threads: int = 1) -> float:
    """F(X, T, 1) pi / (T log T)."""
    if not (X >= 1 and T >= 2):
        raise DomainError("montgomery_ratio needs X >= 1 and T >= 2")
    F = f_eval(KernelParams(X, T, 1.0), zs, threads=threads).value
    return F * math.pi / (T * math.log(T))


def pair_density_integral(alpha: float, beta: float) -> float:
    """Integral over [alpha, beta] of 1 - (sin(pi u) / (pi u))^2."""
    val, _ = quad(lambda u: 1.0 - np.sinc(u) ** 2, alpha, beta, epsabs=1e-13, epsrel=1e-12,
                  limit=200)
    return val


def pc_density(alpha: float, beta: float, T: float, zs: ZeroSet) -> tuple[float, float]:
    """Normalised count of signed pairs with 2pi alpha/log T <= gamma - gamma' <= 2pi beta/log T.

    Returns ``(empirical, predicted)``.
    """
    if not alpha > 0:
        raise ArgumentError("alpha must be positive (the diagonal is excluded)")
    if not beta > alpha:
        raise ArgumentError("need beta > alpha")
    if T < 10:
        raise DomainError("pc_density needs T >= 10")
    g = zs.upto(T)
    lo = 2 * math.pi * alpha / math.log(T)
    hi = 2 * math.pi * beta / math.log(T)
    # (+,+) and (-,-) pairs: positive differences gamma_j - gamma_k, counted twice
    diffs = 0
    sums = 0
    for j in range(g.size):
        a = np.searchsorted(g, g[j] - hi, side="left")
        b = np.searchsorted(g, g[j] - lo, side="right")
        diffs += max(0, min(b, j) - a)
        # (+,-) pairs: gamma_j + gamma_k
        a2 = np.searchsorted(g, lo - g[j], side="left")
        b2 = np.searchsorted(g, hi - g[j], side="right")
        sums += max(0, b2 - a2)
    count = 2 * diffs + sums
    return math.pi / (T * math.log(T)) * count, pair_density_integral(alpha, beta)


def trivial_bound_margin(p: KernelParams, zs: ZeroSet, threads: int = 1) -> float:
    """F / (min(T, 1/max(tau, 1/T)) T log^2 T)."""
    if not p.T >= 2:
        raise DomainError("trivial_bound_margin needs T >= 2")
    F = f_eval(p, zs, threads=threads).value
    scale = min(p.T, 1.0 / max(p.tau, 1.0 / p.T))
    return F / (scale * p.T * math.log(p.T) ** 2)
