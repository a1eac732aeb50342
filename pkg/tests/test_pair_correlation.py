from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import classical_F, frozen, one_zero_F, sigma_direct
from paircorr.errors import ArgumentError, BackendUnsupportedError, DomainError, IncompleteDataError
from paircorr.pair_correlation import (KernelParams, band_tail_bound, f_eval, f_prefix,
                                       lemma1_check, lemma2_residual, lemma3_check,
                                       montgomery_ratio, pair_density_integral, pc_density,
                                       sigma, sigma_prefix, sigma_shifted, sigma_windowed,
                                       trivial_bound_margin, weighted_square_integral)
from paircorr.zero_source import ZeroSet

G1 = 14.134725141734693


# ------------------------------------------------------------------ sigma

def test_sigma_below_first_zero(zs100):
    assert sigma(10.0, 14.0, zs100) == 0.0


def test_sigma_at_one_counts(zs100):
    assert sigma(1.0, 100.0, zs100) == 58.0


def test_sigma_one_zero(one_zero):
    assert math.isclose(sigma(math.e, 20.0, one_zero), 2 * math.cos(G1), rel_tol=1e-14)


def test_sigma_matches_direct(zs1000):
    for X in (2.0, 10.0, 1e3, 1e5):
        assert math.isclose(sigma(X, 1000.0, zs1000), sigma_direct(X, zs1000.upto(1000.0)),
                            rel_tol=1e-12, abs_tol=1e-11)


def test_sigma_incomplete(zs100):
    with pytest.raises(IncompleteDataError):
        sigma(10.0, 200.0, zs100)


def test_sigma_domain(zs100):
    with pytest.raises(DomainError):
        sigma(0.5, 50.0, zs100)


def test_windowed(zs1000):
    X = 77.0
    assert sigma_windowed(X, 0.0, 500.0, zs1000) == sigma(X, 500.0, zs1000)
    assert sigma_windowed(X, 15.0, 20.0, zs1000) == 0.0
    w = sigma_windowed(X, 200.0, 800.0, zs1000)
    assert math.isclose(w, sigma(X, 800.0, zs1000) - sigma(X, 200.0, zs1000), rel_tol=1e-12,
                        abs_tol=1e-12)
    with pytest.raises(ArgumentError):
        sigma_windowed(X, 100.0, 100.0, zs1000)


@pytest.mark.parametrize("X", [2.0, math.e, 100.0])
@pytest.mark.parametrize("v", [0.0, 1.0, -0.5])
def test_shift_identity(zs1000, X, v):
    a = sigma_shifted(X, 1000.0, v, zs1000)
    b = sigma(X * math.exp(v), 1000.0, zs1000)
    # both sides round gamma*(log X + v) differently; scale the tolerance by the term count
    assert abs(a - b) <= 1e-12 * max(abs(b), 2 * len(zs1000))


def test_shift_examples(zs100):
    assert sigma_shifted(7.0, 100.0, 0.0, zs100) == sigma(7.0, 100.0, zs100)
    assert sigma_shifted(1.0, 100.0, 0.0, zs100) == 58.0


def test_sigma_prefix(zs100):
    sp = sigma_prefix(33.0, 100.0, zs100)
    for k in (0, 10, 28):
        assert math.isclose(sp[k], sigma(33.0, zs100.ordinates[k], zs100), rel_tol=1e-13,
                            abs_tol=1e-13)


# ------------------------------------------------------------------ F

@pytest.mark.parametrize("X", [1.0, math.e, 10.0, 1e5])
@pytest.mark.parametrize("tau", [0.0, 0.3, 1.0])
def test_one_zero_closed_form(one_zero, X, tau):
    r = f_eval(KernelParams(X, 20.0, tau), one_zero)
    assert math.isclose(r.value, one_zero_F(G1, X, tau), rel_tol=1e-13)


@pytest.mark.parametrize("X", [10.0, 1e3, 1e5])
@pytest.mark.parametrize("T", [50.0, 200.0, 1000.0])
def test_tau_one_is_classical(zs1000, X, T):
    F = f_eval(KernelParams(X, T, 1.0), zs1000).value
    ref = classical_F(X, zs1000.upto(T))
    assert abs(F - ref) <= 1e-12 * abs(ref)


@pytest.mark.parametrize("X", [10.0, 1e3, 1e5])
@pytest.mark.parametrize("T", [50.0, 200.0, 1000.0])
def test_tau_zero_is_sigma_squared(zs1000, X, T):
    F = f_eval(KernelParams(X, T, 0.0), zs1000).value
    s = sigma(X, T, zs1000)
    assert abs(F - s * s) <= 1e-12 * max(s * s, 1.0)


def test_diagonal_and_exact_fields(zs1000):
    r = f_eval(KernelParams(100.0, 500.0, 0.5), zs1000)
    assert r.diagonal == 2 * zs1000.count(500.0)
    assert r.error_bound == 0.0 and r.backend == "exact"
    assert r.value == r.diagonal + r.offdiagonal


def test_backend_cross_check_small(zs100):
    p = KernelParams(1.0, 100.0, 1.0)
    ex = f_eval(p, zs100)
    bd = f_eval(p, zs100, "banded", band=100.0)
    qd = f_eval(p, zs100, "quadrature", tol=1e-8)
    assert abs(ex.value - bd.value) <= bd.error_bound
    assert abs(ex.value - qd.value) <= qd.error_bound


def test_backend_errors(zs100):
    with pytest.raises(BackendUnsupportedError):
        f_eval(KernelParams(10.0, 100.0, 0.0), zs100, "quadrature", tol=1e-8)
    with pytest.raises(ArgumentError):
        f_eval(KernelParams(10.0, 100.0, 0.5), zs100, "banded")
    with pytest.raises(ArgumentError):
        f_eval(KernelParams(10.0, 100.0, 0.5), zs100, "nope")
    with pytest.raises(IncompleteDataError):
        f_eval(KernelParams(10.0, 200.0, 0.5), zs100)


def test_kernel_params_domain():
    with pytest.raises(DomainError):
        KernelParams(0.5, 10.0, 0.5)
    with pytest.raises(DomainError):
        KernelParams(2.0, 10.0, 1.5)


def test_band_tail_bound_covers_everything_at_zero_band(zs100):
    # with B = 0 every off-diagonal term is excluded; the bound must cover F - 2N
    g = zs100.ordinates
    for X in (1.0, 10.0):
        r = f_eval(KernelParams(X, 100.0, 0.5), zs100)
        assert abs(r.offdiagonal) <= band_tail_bound(g, 0.5, 0.0)


def test_f_prefix_matches_f_eval(zs100):
    fp = f_prefix(50.0, 100.0, 0.4, zs100)
    for k in (0, 5, 28):
        ref = f_eval(KernelParams(50.0, zs100.ordinates[k], 0.4), zs100).value
        assert math.isclose(fp[k], ref, rel_tol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(1.0, 1e6), st.floats(15.0, 100.0), st.floats(0.0, 1.0))
def test_nonnegativity_property(X, T, tau):
    zs = _cached_zeros()
    r = f_eval(KernelParams(X, T, tau), zs)
    assert r.value >= -1e-9 * r.diagonal


_ZS = {}


def _cached_zeros():
    if "z" not in _ZS:
        from paircorr.zero_source import find_zeros
        _ZS["z"] = find_zeros(100)
    return _ZS["z"]


@settings(max_examples=20, deadline=None)
@given(st.floats(1.0, 1e4), st.floats(15.0, 100.0), st.floats(0.0, 1.0), st.sampled_from([1, 4, 8]))
def test_thread_determinism_property(X, T, tau, threads):
    zs = _cached_zeros()
    p = KernelParams(X, T, tau)
    assert f_eval(p, zs, threads=threads).value == f_eval(p, zs, threads=1).value


# ------------------------------------------------------------------ lemma checks

def test_lemma2_one_zero(one_zero):
    assert lemma2_residual(KernelParams(math.e, 20.0, 0.5), one_zero, 1e-8) <= 1e-6


def test_lemma2_full(zs100):
    assert lemma2_residual(KernelParams(1.0, 100.0, 1.0), zs100, 1e-8) <= 1e-6
    for X in (2.0, 10.0, 100.0):
        assert lemma2_residual(KernelParams(X, 100.0, 0.5), zs100, 1e-8) <= 1e-7


def test_lemma2_needs_positive_tau(zs100):
    with pytest.raises(ArgumentError):
        lemma2_residual(KernelParams(10.0, 100.0, 0.0), zs100, 1e-8)


def test_weighted_integral_empty(zs100):
    assert weighted_square_integral(10.0, 14.0, 0.5, zs100, 1e-8) == (0.0, 0.0)


def test_lemma3_cases(one_zero, zs100):
    r = lemma3_check(10.0, 20.0, 0.5, one_zero, 1e-10)
    assert r.holds
    lhs, rhs = lemma3_check(100.0, 100.0, 1.0, zs100, 1e-9)
    assert lhs <= rhs
    small = lemma3_check(100.0, 100.0, 0.01, zs100, 1e-10)
    assert small.holds and small.lhs < lhs


def test_lemma3_tau_zero_rejected(zs100):
    with pytest.raises(ArgumentError):
        lemma3_check(10.0, 100.0, 0.0, zs100, 1e-8)


def test_lemma1_polynomials():
    assert lemma1_check(np.ones_like, 0.0, 2.0, 1.0, 1e-10) <= 1e-9
    assert lemma1_check(lambda u: u, 0.0, 2.0, 1.0, 1e-10) <= 1e-9
    with pytest.raises(ArgumentError):
        lemma1_check(np.ones_like, 0.0, -1.0, 1.0, 1e-10)


# ------------------------------------------------------------------ statistics

def test_montgomery_ratio_positive(zs1000):
    r = montgomery_ratio(1e5, 1000.0, zs1000)
    assert r > 0 and math.isfinite(r)
    F = f_eval(KernelParams(1e5, 1000.0, 1.0), zs1000).value
    assert r == F * math.pi / (1000.0 * math.log(1000.0))
    assert montgomery_ratio(1.0, 100.0, zs1000) > 0


def test_pair_density_integral():
    pred = frozen()["pc_predicted"]
    assert abs(pair_density_integral(0.5, 1.0) - pred["0.5,1.0"]) <= 1e-10
    assert abs(pair_density_integral(5.0, 6.0) - pred["5,6"]) <= 1e-10
    assert abs(pair_density_integral(5.0, 6.0) - 0.9980) <= 1e-3


def _brute_pairs(g, lo, hi):
    s = np.concatenate([-g, g])
    d = s[:, None] - s[None, :]
    return int(np.count_nonzero((d >= lo) & (d <= hi)))


@pytest.mark.parametrize("ab", [(0.5, 1.0), (0.1, 3.0), (5.0, 6.0)])
def test_pc_density_counts(zs1000, ab):
    T = 1000.0
    emp, _ = pc_density(*ab, T, zs1000)
    lo, hi = (2 * math.pi * a / math.log(T) for a in ab)
    brute = _brute_pairs(zs1000.upto(T), lo, hi)
    assert math.isclose(emp, math.pi / (T * math.log(T)) * brute, rel_tol=1e-14)
    assert emp >= 0


def test_pc_density_errors(zs100):
    with pytest.raises(ArgumentError):
        pc_density(0.0, 1.0, 100.0, zs100)
    with pytest.raises(ArgumentError):
        pc_density(1.0, 0.5, 100.0, zs100)


def test_trivial_bound_margin(zs1000):
    m1 = trivial_bound_margin(KernelParams(1.0, 500.0, 1.0), zs1000)
    assert m1 > 0
    m0 = trivial_bound_margin(KernelParams(10.0, 500.0, 0.0), zs1000)
    F = f_eval(KernelParams(10.0, 500.0, 0.0), zs1000).value
    assert m0 == F / (500.0 * 500.0 * math.log(500.0) ** 2)
