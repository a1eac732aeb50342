"""Truncated explicit formula for psi and the zero-sum split of short-interval differences.

With rho = 1/2 + i gamma, conjugate zeros are combined so every sum is real:

    sum over |gamma| <= T of x^rho / rho
        = 2 sqrt(x) sum_{0<gamma<=T} (cos(gamma log x)/2 + gamma sin(gamma log x)) / (1/4 + gamma^2).

The lower-order terms -log(2 pi) - log(1 - x^-2)/2 are kept in full, so the
residual psi(x) - psi_truncated isolates the truncation error. The
truncation height T is a free parameter here; the classical statement ties
it to x (cutoff |gamma| <= x for x in [X, 2X]).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IncompleteDataError
from .prime_statistics import psi, short_interval
from .summation import compensated_sum
from .zero_source import ZeroSet

LOG_2PI = math.log(2 * math.pi)
# below this |rho| h / x the direct difference loses too many digits
SERIES_THRESHOLD = 1e-4
_SERIES_TERMS = 8


@dataclass(frozen=True)
class TruncationParams:
    x: float
    T: float

    def __post_init__(self):
        if not self.x > 1:
            raise DomainError(f"x must exceed 1, got {self.x}")
        if not self.T > 0:
            raise DomainError(f"T must be positive, got {self.T}")


@dataclass(frozen=True)
class DecompositionResult:
    s1: float
    s2: float
    remainder: float


def zero_sum(x: float, gammas: np.ndarray) -> float:
    """Sum of x^rho / rho over the zeros +-gamma, as a real number."""
    g = np.asarray(gammas, dtype=np.float64)
    ph = g * math.log(x)
    terms = (0.5 * np.cos(ph) + g * np.sin(ph)) / (0.25 + g * g)
    return 2.0 * math.sqrt(x) * compensated_sum(terms)


def psi_truncated(p: TruncationParams, zs: ZeroSet) -> float:
    zs.require(p.T)
    x = p.x
    return x - zero_sum(x, zs.upto(p.T)) - LOG_2PI - 0.5 * math.log1p(-x ** -2.0)


def explicit_residual(p: TruncationParams, zs: ZeroSet) -> float:
    """psi(x) - psi_truncated(x, T). Evaluate off prime powers (half-integers by default)."""
    return psi(p.x) - psi_truncated(p, zs)


def _difference_terms(x: float, h: float, g: np.ndarray) -> np.ndarray:
    """Complex ((x+h)^rho - x^rho) / rho for rho = 1/2 + i g."""
    rho = 0.5 + 1j * g
    r = h / x
    z = rho * math.log1p(r)
    small = np.abs(rho) * r < SERIES_THRESHOLD
    out = np.empty(g.size, dtype=np.complex128)
    # x^rho (e^z - 1) / rho; e^z - 1 via expm1 stays accurate for tiny z
    big = ~small
    out[big] = np.expm1(z[big]) / rho[big]
    if small.any():
        out[small] = _series(z[small], rho[small])
    xr = math.sqrt(x) * np.exp(1j * g * math.log(x))
    return xr * out


def _series(z: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """(e^z - 1) / rho by its Taylor series in z."""
    acc = np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(1, _SERIES_TERMS + 1):
        term = term * z / k
        acc = acc + term
    return acc / rho


def _paired_sum(x: float, h: float, g: np.ndarray) -> float:
    # conjugate zeros contribute complex conjugates: twice the real part
    if g.size == 0:
        return 0.0
    return 2.0 * compensated_sum(_difference_terms(x, h, g).real)


def interval_sum(x: float, h: float, T: float, zs: ZeroSet) -> float:
    """Sum over |gamma| <= T of ((x+h)^rho - x^rho) / rho, undivided."""
    zs.require(T)
    return _paired_sum(x, h, zs.upto(T))


def interval_decomposition(x: float, h: float, T_hi: float, zs: ZeroSet) -> DecompositionResult:
    """Split the zero sum for psi(x+h) - psi(x) at U = x/h.

    s1 covers |gamma| <= x/h, s2 covers x/h < |gamma| <= T_hi, and
    remainder = psi(x+h) - psi(x) - h + s1 + s2 is what the zeros up to
    T_hi leave unexplained.
    """
    if not x > 1:
        raise DomainError(f"x must exceed 1, got {x}")
    if not 0 < h <= x:
        raise DomainError(f"need 0 < h <= x, got h={h}")
    U = x / h
    if U > T_hi:
        raise IncompleteDataError(f"split point x/h={U:g} exceeds T_hi={T_hi:g}")
    zs.require(T_hi)
    g = zs.upto(T_hi)
    k = int(np.searchsorted(g, U, side="right"))
    s1 = _paired_sum(x, h, g[:k])
    s2 = _paired_sum(x, h, g[k:])
    remainder = short_interval(x, h) + s1 + s2
    return DecompositionResult(s1, s2, remainder)
