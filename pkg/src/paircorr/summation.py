"""Deterministic compensated reductions.

Every oscillatory sum in the package goes through :func:`compensated_sum`,
a pairwise reduction tree whose shape depends only on the length of the
reduced axis. Each level records the exact rounding error of its additions
(Knuth's TwoSum) and the errors are folded back in at the end, so the
result is accurate to a few ulps of the largest partial sum and is
bit-reproducible for a given input array.

Work that is split across threads is always split into blocks whose
boundaries depend on the problem size only; block results are combined in
block order with :func:`math.fsum`, which is correctly rounded and hence
order independent anyway.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

# elements per block for blocked pair sums; a function of nothing but this constant
BLOCK_ELEMENTS = 1 << 18


def two_sum(a, b):
    """Error-free transformation: ``a + b == s + e`` exactly."""
    s = a + b
    bp = s - a
    e = (a - (s - bp)) + (b - bp)
    return s, e


def compensated_sum(x, axis: int = -1):
    """Sum along ``axis`` with a fixed pairwise tree and TwoSum compensation."""
    x = np.moveaxis(np.asarray(x, dtype=np.float64), axis, -1)
    if x.shape[-1] == 0:
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
    err = np.zeros(x.shape[:-1])
    while x.shape[-1] > 1:
        n = x.shape[-1]
        half = n // 2
        s, e = two_sum(x[..., :half], x[..., half:2 * half])
        err = err + e.sum(axis=-1)
        if n % 2:
            s = np.concatenate([s, x[..., -1:]], axis=-1)
        x = s
    out = x[..., 0] + err
    return float(out) if out.ndim == 0 else out


def kahan_cumsum(x) -> np.ndarray:
    """Cumulative sum whose running total is carried in double-double."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    s = 0.0
    c = 0.0
    for i, v in enumerate(x.tolist()):
        y = v - c
        t = s + y
        c = (t - s) - y
        s = t
        out[i] = s
    return out


def row_blocks(n_rows: int, n_cols: int) -> list[tuple[int, int]]:
    """Fixed partition of ``range(n_rows)`` into blocks of about BLOCK_ELEMENTS entries."""
    if n_rows <= 0:
        return []
    step = max(1, BLOCK_ELEMENTS // max(1, n_cols))
    return [(i, min(i + step, n_rows)) for i in range(0, n_rows, step)]


def parallel_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T], threads: int = 1) -> list[R]:
    """``[fn(i) for i in items]``, optionally on a thread pool; output order is input order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def fsum(values) -> float:
    return math.fsum(np.asarray(values, dtype=np.float64).ravel().tolist())
