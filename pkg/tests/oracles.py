"""Independent reference implementations used only by the tests."""
from __future__ import annotations

import json
import math
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.integrate import quad

DATA = Path(__file__).parent / "data"


@lru_cache(maxsize=None)
def frozen() -> dict:
    return json.loads((DATA / "frozen.json").read_text())


@lru_cache(maxsize=None)
def mpmath_zeros() -> np.ndarray:
    lines = (DATA / "mpmath_zeros_2000.txt").read_text().splitlines()
    return np.array([float(s) for s in lines if s and not s.startswith("#")])


def mangoldt(n: int) -> float:
    """Lambda(n) by trial division."""
    if n < 2:
        return 0.0
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return math.log(p) if n == 1 else 0.0
    return math.log(n)


def psi_table(limit: int) -> np.ndarray:
    """psi(n) for n = 0..limit by direct summation of trial-division weights."""
    out = np.zeros(limit + 1)
    acc = 0.0
    for n in range(2, limit + 1):
        acc = math.fsum((acc, mangoldt(n)))
        out[n] = acc
    return out


def window_sum(x: float, h: float) -> float:
    return math.fsum(mangoldt(n) for n in range(math.floor(x) + 1, math.floor(x + h) + 1))


def j_quadrature(X: float, Y: float, h: float) -> float:
    """Integral of (psi(x+h) - psi(x) - h)^2 over [X, X+Y] with scipy quad on each smooth piece."""
    cuts = {X, X + Y}
    for n in range(max(2, math.floor(X) - 1), math.floor(X + Y + h) + 2):
        if mangoldt(n) > 0:
            for b in (n, n - h):
                if X < b < X + Y:
                    cuts.add(b)
    edges = sorted(cuts)
    total = []
    for a, b in zip(edges[:-1], edges[1:]):
        v, _ = quad(lambda x: (window_sum(x, h) - h) ** 2, a, b, epsabs=1e-13, epsrel=1e-13)
        total.append(v)
    return math.fsum(total)


def classical_F(X: float, gammas: np.ndarray) -> float:
    """Montgomery's F(X, T) over the signed ordinates, as a complex double sum.

    X^{i gamma} is formed once per zero, X^{i(gamma - gamma')} as a product.
    """
    g = np.concatenate([-gammas[::-1], gammas])
    e = np.exp(1j * g * math.log(X))
    d = g[:, None] - g[None, :]
    terms = (e[:, None] * np.conj(e)[None, :]) * (4.0 / (4.0 + d * d))
    return math.fsum(terms.real.ravel())


def sigma_direct(X: float, gammas: np.ndarray) -> float:
    g = np.concatenate([-gammas, gammas])
    return math.fsum(np.cos(g * math.log(X)))


def one_zero_F(g1: float, X: float, tau: float) -> float:
    """Closed form of F for the single ordinate g1."""
    return 2.0 + 2.0 * math.cos(2 * g1 * math.log(X)) / (1.0 + tau * tau * g1 * g1)
