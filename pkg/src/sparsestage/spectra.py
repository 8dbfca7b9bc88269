"""Sparse eigenvalues of the normalized Gram matrix ``A = X'X / n``.

``rho_plus(k)`` / ``rho_minus(k)`` are the largest / smallest values of
``(1/n)||Xw||^2 / ||w||^2`` over vectors with at most ``k`` nonzeros, i.e. the
extreme eigenvalues over all ``k x k`` principal blocks of ``A``.  Blocks of
size exactly ``k`` suffice: by Cauchy interlacing every smaller block has its
spectrum inside that of some size-``k`` block containing it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations, islice
from typing import Iterable, Literal

import numpy as np

from .errors import BudgetExceededError, DomainError, InvalidDimensionError, InvalidSpectrumError, ValidationError
from .model import SeedLike, make_rng

DEFAULT_BUDGET = 2_000_000
_CHUNK = 20_000


@dataclass(frozen=True)
class SparseSpectrum:
    k: int
    rho_minus: float
    rho_plus: float
    method: Literal["exact", "sampled"]
    subsets_evaluated: int

    def __post_init__(self):
        if not (0 <= self.rho_minus <= self.rho_plus):
            raise InvalidSpectrumError(f"need 0 <= rho_minus <= rho_plus, got {self.rho_minus}, {self.rho_plus}")

    def csv_row(self) -> str:
        return f"{self.k},{self.rho_minus!r},{self.rho_plus!r},{self.method},{self.subsets_evaluated}"


CSV_HEADER = "k,rho_minus,rho_plus,method,subsets_evaluated"


def gram(X) -> np.ndarray:
    x = np.asarray(X, dtype=float)
    if x.ndim != 2:
        raise InvalidDimensionError("design must be 2-D")
    a = x.T @ x / x.shape[0]
    return 0.5 * (a + a.T)


def block_extremes(A: np.ndarray, subsets: np.ndarray) -> tuple[float, float]:
    """(min, max) eigenvalue over the principal blocks indexed by ``subsets``.

    ``subsets`` is an ``(m, k)`` integer array.  Sizes 1 and 2 use closed
    forms; larger blocks go through the batched symmetric eigensolver.
    """
    m, k = subsets.shape
    if k == 1:
        d = A[subsets[:, 0], subsets[:, 0]]
        return float(d.min()), float(d.max())
    if k == 2:
        i, j = subsets[:, 0], subsets[:, 1]
        a, d, b = A[i, i], A[j, j], A[i, j]
        mid = 0.5 * (a + d)
        rad = np.hypot(0.5 * (a - d), b)
        return float((mid - rad).min()), float((mid + rad).max())
    blocks = A[subsets[:, :, None], subsets[:, None, :]]
    ev = np.linalg.eigvalsh(blocks)
    return float(ev[:, 0].min()), float(ev[:, -1].max())


def _chunks(it: Iterable[tuple[int, ...]], size: int):
    it = iter(it)
    while True:
        block = list(islice(it, size))
        if not block:
            return
        yield np.asarray(block, dtype=np.intp)


def _clip(lo: float, hi: float) -> tuple[float, float]:
    # A is PSD; negative values are roundoff on singular blocks
    return max(lo, 0.0), max(hi, max(lo, 0.0))


def sparse_eigen_exact(X, k: int, budget: int = DEFAULT_BUDGET, workers: int = 1) -> SparseSpectrum:
    """Exact ``rho_minus(k)``, ``rho_plus(k)`` by enumerating every size-``k`` subset."""
    A = gram(X)
    p = A.shape[0]
    if not 1 <= k <= p:
        raise ValidationError(f"need 1 <= k <= p, got k={k}, p={p}")
    total = math.comb(p, k)
    if total > budget:
        raise BudgetExceededError(
            f"C({p}, {k}) = {total} subsets exceeds the budget of {budget}; use sparse_eigen_sampled"
        )
    chunks = _chunks(combinations(range(p), k), _CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda s: block_extremes(A, s), chunks))
    else:
        parts = [block_extremes(A, s) for s in chunks]
    lo = min(q[0] for q in parts)
    hi = max(q[1] for q in parts)
    lo, hi = _clip(lo, hi)
    return SparseSpectrum(k, lo, hi, "exact", total)


def sparse_eigen_sampled(X, k: int, samples: int, seed: SeedLike) -> SparseSpectrum:
    """Inner estimate of the sparse eigenvalues from random size-``k`` subsets.

    The reported ``rho_plus`` never exceeds the true value and the reported
    ``rho_minus`` is never below it.
    """
    A = gram(X)
    p = A.shape[0]
    if not 1 <= k <= p:
        raise ValidationError(f"need 1 <= k <= p, got k={k}, p={p}")
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    rng = make_rng(seed)
    lo, hi = np.inf, -np.inf
    per_chunk = max(1, _CHUNK // max(p, 1))
    done = 0
    while done < samples:
        m = min(per_chunk, samples - done)
        subsets = np.sort(np.argsort(rng.random((m, p)), axis=1)[:, :k], axis=1)
        a, b = block_extremes(A, subsets)
        lo, hi = min(lo, a), max(hi, b)
        done += m
    lo, hi = _clip(lo, hi)
    return SparseSpectrum(k, lo, hi, "sampled", samples)


def sparse_eigen(X, k: int, budget: int = DEFAULT_BUDGET, samples: int = 10_000, seed: SeedLike = 0) -> SparseSpectrum:
    """Exact values when the enumeration fits in ``budget``, sampled otherwise."""
    p = np.asarray(X).shape[1]
    if 1 <= k <= p and math.comb(p, k) <= budget:
        return sparse_eigen_exact(X, k, budget)
    return sparse_eigen_sampled(X, k, samples, seed)


def pi_bound(rho_plus_s: float, rho_minus_ks: float, s: int) -> float:
    """Upper bound ``sqrt(s)/2 * sqrt(rho_plus(s)/rho_minus(k+s) - 1)`` on the
    restricted cross-correlation quantity ``pi(k, s)``."""
    if s < 1:
        raise ValidationError(f"s must be >= 1, got {s}")
    if not rho_minus_ks > 0:
        raise DomainError(f"rho_minus(k+s) must be > 0, got {rho_minus_ks}")
    if rho_plus_s < rho_minus_ks:
        raise InvalidSpectrumError("rho_plus(s) must be >= rho_minus(k+s)")
    return 0.5 * math.sqrt(s) * math.sqrt(rho_plus_s / rho_minus_ks - 1.0)
