from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import frozen, mpmath_zeros
from paircorr.errors import DomainError, IncompleteDataError, ZeroFileError
from paircorr.zero_source import (ZeroSet, ZeroSourceMeta, find_zeros, gram_point, hardy_Z,
                                  ingest_zeros, rs_theta, rvm_count, validate_zero_set,
                                  write_zeros)


# ------------------------------------------------------------------ theta, Z

@pytest.mark.parametrize("t", ["1", "5", "10", "20", "100", "1000"])
def test_theta_matches_mpmath(t):
    assert abs(rs_theta(float(t)) - frozen()["rs_theta"][t]) <= 1e-10


def test_theta_examples():
    assert abs(rs_theta(20.0) - 1.1866) <= 1e-3
    assert abs(rs_theta(2 * math.pi * math.e) - (-math.pi / 8 + 1 / (48 * 2 * math.pi * math.e))) <= 1e-3
    assert rs_theta(100.0) > rs_theta(50.0)


def test_theta_domain():
    with pytest.raises(DomainError):
        rs_theta(0.5)


def test_theta_vectorises():
    t = np.array([10.0, 20.0, 300.0])
    np.testing.assert_array_equal(rs_theta(t), [rs_theta(float(x)) for x in t])


@pytest.mark.parametrize("t", ["0", "5", "14.134725", "30", "100", "499", "501", "1000", "5000"])
def test_hardy_z_matches_mpmath(t):
    assert abs(hardy_Z(float(t)) - frozen()["hardy_z"][t]) <= 1e-8


def test_hardy_z_examples():
    assert abs(hardy_Z(0.0) - (-1.4603545)) <= 1e-6
    assert abs(hardy_Z(14.134725)) <= 1e-4


def test_hardy_z_domain():
    with pytest.raises(DomainError):
        hardy_Z(-1.0)


@pytest.mark.parametrize("n", ["-1", "0", "1", "10", "100"])
def test_gram_points_match_mpmath(n):
    assert abs(gram_point(int(n)) - frozen()["gram"][n]) <= 1e-9


def test_gram_examples():
    assert abs(gram_point(0) - 17.8456) <= 1e-3
    assert abs(gram_point(-1) - 9.6669) <= 1e-3
    g = [gram_point(n) for n in range(0, 102)]
    assert all(b > a for a, b in zip(g, g[1:]))


def test_rvm_count_formula():
    # smooth count including the constant 7/8
    assert abs(rvm_count(2 * math.pi) - (-0.125)) <= 1e-12
    for T in (100.0, 1000.0):
        x = T / (2 * math.pi)
        assert math.isclose(rvm_count(T), x * math.log(x) - x + 7 / 8, rel_tol=1e-14)
    assert abs(rvm_count(100.0) - 29.0023) <= 1e-3


# ------------------------------------------------------------------ finder

def test_find_zeros_100(zs100):
    assert len(zs100) == 29 == frozen()["n_zeros"]["100"]
    assert abs(zs100.ordinates[0] - 14.134725) <= 1e-6


def test_find_zeros_first_three():
    zs = find_zeros(50)
    np.testing.assert_allclose(zs.ordinates[:3], [14.1347, 21.0220, 25.0109], atol=1e-3)


def test_all_zeros_match_mpmath(zs2000):
    ref = mpmath_zeros()
    assert len(zs2000) == ref.size == frozen()["n_zeros"]["2000"]
    assert np.max(np.abs(zs2000.ordinates - ref)) <= 1e-9


def test_z_changes_sign_across_each_zero(zs1000):
    g = zs1000.ordinates
    assert np.all(hardy_Z(g - 1e-6) * hardy_Z(g + 1e-6) < 0)


def test_counts_near_smooth_count(zs1000):
    for T in np.linspace(20, 1000, 10):
        assert abs(zs1000.count(T) - rvm_count(T)) <= 2 + 0.5 * math.log(T)


def test_prefix_consistency(zs1000):
    a = find_zeros(300)
    assert np.array_equal(a.ordinates, zs1000.ordinates[:len(a)])


def test_find_zeros_range():
    with pytest.raises(DomainError):
        find_zeros(10)
    with pytest.raises(DomainError):
        find_zeros(2e4)


# ------------------------------------------------------------------ ZeroSet

def test_zeroset_invariants():
    with pytest.raises(ValueError):
        ZeroSet(np.array([21.0, 14.0]), 30.0)
    with pytest.raises(ValueError):
        ZeroSet(np.array([-1.0, 14.0]), 30.0)
    zs = ZeroSet.from_ordinates([14.0, 21.0], t_max=30.0)
    with pytest.raises(ValueError):
        zs.ordinates[0] = 1.0
    with pytest.raises(IncompleteDataError):
        zs.upto(31.0)
    assert zs.count(21.0) == 2 and zs.count(20.9) == 1


def test_ingested_meta_needs_label():
    with pytest.raises(ValueError):
        ZeroSourceMeta("ingested", "")


# ------------------------------------------------------------------ files

def test_ingest_plain(tmp_path):
    p = tmp_path / "z.txt"
    p.write_text("14.134725142\n21.022039639\n25.010857580\n")
    zs = ingest_zeros(p)
    assert len(zs) == 3 and zs.t_max == 25.010857580 and zs.accuracy == 1e-9


def test_ingest_header_and_hint(tmp_path):
    p = tmp_path / "z.txt"
    p.write_text("# source: table\n# accuracy: 1e-7\n\n14.134725142\n21.022039639\n")
    zs = ingest_zeros(p, t_max_hint=22.0)
    assert zs.meta.source_label == "table" and zs.accuracy == 1e-7 and zs.t_max == 22.0


@pytest.mark.parametrize("text, line", [
    ("21.0\n14.1\n", 2),
    ("14.1\nabc\n", 2),
    ("14.1\n14.1\n", 2),
    ("14.1\n-3\n", 2),
    ("14.1\nnan\n", 2),
])
def test_ingest_errors_name_line(tmp_path, text, line):
    p = tmp_path / "z.txt"
    p.write_text(text)
    with pytest.raises(ZeroFileError) as exc:
        ingest_zeros(p)
    assert exc.value.lineno == line
    assert f"line {line}" in str(exc.value)


def test_ingest_empty(tmp_path):
    p = tmp_path / "z.txt"
    p.write_text("# only a comment\n")
    with pytest.raises(ZeroFileError):
        ingest_zeros(p)


def test_write_ingest_round_trip(tmp_path, zs1000):
    p = tmp_path / "z.txt"
    write_zeros(zs1000, p)
    back = ingest_zeros(p)
    assert np.array_equal(back.ordinates, zs1000.ordinates)
    assert back.t_max == zs1000.t_max


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(min_value=1e-3, max_value=1e6, allow_nan=False), min_size=1,
                max_size=40, unique=True))
def test_round_trip_arbitrary(tmp_path_factory, xs):
    xs = sorted(xs)
    zs = ZeroSet.from_ordinates(xs)
    p = tmp_path_factory.mktemp("rt") / "z.txt"
    write_zeros(zs, p)
    assert np.array_equal(ingest_zeros(p).ordinates, zs.ordinates)


# ------------------------------------------------------------------ validation

def test_validate_passes(zs100, zs1000):
    assert validate_zero_set(zs100).passed
    assert validate_zero_set(zs1000).passed


def test_validate_detects_deleted_ordinate(zs100):
    g = np.delete(zs100.ordinates, 10)
    report = validate_zero_set(ZeroSet(g, 100.0))
    assert not report.passed
    assert not report.checks["gram_count"].passed


def test_validate_detects_bad_first_ordinate(zs100):
    g = zs100.ordinates.copy()
    g[0] = 13.0
    report = validate_zero_set(ZeroSet(g, 100.0))
    assert not report.checks["first_ordinate"].passed


def test_validate_report_text(zs100):
    text = str(validate_zero_set(zs100))
    assert "rvm_count: pass" in text and "monotone: pass" in text
