"""Zeta zeros, the extended pair-correlation function F(X, T, tau), and primes in short intervals."""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import (ArgumentError, BackendUnsupportedError, DataError, DomainError,
                     IncompleteDataError, MissedZeroError, PairCorrError, ZeroFileError)
from .zero_source import ZeroSet, find_zeros, ingest_zeros, validate_zero_set, write_zeros
from .pair_correlation import KernelParams, PairSumResult, f_eval, sigma
from .prime_statistics import psi, delta, j_integral

__all__ = [
    "ArgumentError", "BackendUnsupportedError", "DataError", "DomainError",
    "IncompleteDataError", "MissedZeroError", "PairCorrError", "ZeroFileError",
    "ZeroSet", "find_zeros", "ingest_zeros", "validate_zero_set", "write_zeros",
    "KernelParams", "PairSumResult", "f_eval", "sigma", "psi", "delta", "j_integral",
]
