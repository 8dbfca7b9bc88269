import math

import numpy as np
import pytest

from oracles import random_problem, sparse_eig_all_sizes, sparse_eig_pairs
from sparsestage.errors import BudgetExceededError, DomainError, InvalidSpectrumError
from sparsestage.model import generate_design
from sparsestage.spectra import pi_bound, sparse_eigen, sparse_eigen_exact, sparse_eigen_sampled


def test_identity_design():
    n = 6
    x = np.sqrt(n) * np.eye(n)
    for k in range(1, n + 1):
        spec = sparse_eigen_exact(x, k)
        assert spec.rho_minus == pytest.approx(1.0, abs=1e-12)
        assert spec.rho_plus == pytest.approx(1.0, abs=1e-12)
        assert spec.subsets_evaluated == math.comb(n, k)
        assert spec.method == "exact"


def test_k1_is_one_on_normalized_design():
    X = generate_design(30, 50, seed=4)
    spec = sparse_eigen_exact(X, 1)
    assert abs(spec.rho_minus - 1) <= 1e-9 and abs(spec.rho_plus - 1) <= 1e-9


def test_k2_matches_closed_form(rng):
    x, _ = random_problem(rng, 6, 4)
    spec = sparse_eigen_exact(x, 2)
    lo, hi = sparse_eig_pairs(x)
    assert abs(spec.rho_minus - lo) <= 1e-10
    assert abs(spec.rho_plus - hi) <= 1e-10
    assert spec.subsets_evaluated == 6


@pytest.mark.parametrize("k", [2, 3, 4])
def test_size_k_blocks_suffice(rng, k):
    x, _ = random_problem(rng, 8, 7)
    spec = sparse_eigen_exact(x, k)
    lo, hi = sparse_eig_all_sizes(x, k)
    assert spec.rho_minus == pytest.approx(max(lo, 0.0), abs=1e-12)
    assert spec.rho_plus == pytest.approx(hi, abs=1e-12)


def test_monotone_in_k(rng):
    x, _ = random_problem(rng, 7, 9)
    specs = [sparse_eigen_exact(x, k) for k in range(1, 10)]
    for a, b in zip(specs, specs[1:]):
        assert b.rho_plus >= a.rho_plus - 1e-12
        assert b.rho_minus <= a.rho_minus + 1e-12
        assert b.rho_minus <= b.rho_plus
    # more columns than rows: singular blocks
    assert specs[-1].rho_minus == pytest.approx(0.0, abs=1e-12)


def test_budget():
    X = generate_design(10, 30, seed=1)
    with pytest.raises(BudgetExceededError):
        sparse_eigen_exact(X, 3, budget=100)
    assert sparse_eigen(X, 3, budget=100, samples=50, seed=1).method == "sampled"
    assert sparse_eigen(X, 2, budget=1000).method == "exact"


def test_workers_do_not_change_result(rng):
    x, _ = random_problem(rng, 12, 20)
    a = sparse_eigen_exact(x, 3)
    b = sparse_eigen_exact(x, 3, workers=4)
    assert (a.rho_minus, a.rho_plus) == (b.rho_minus, b.rho_plus)


def test_sampled_hits_every_pair(rng):
    x, _ = random_problem(rng, 6, 4)
    exact = sparse_eigen_exact(x, 2)
    sampled = sparse_eigen_sampled(x, 2, samples=1000, seed=3)
    assert sampled.method == "sampled" and sampled.subsets_evaluated == 1000
    assert abs(sampled.rho_minus - exact.rho_minus) <= 1e-10
    assert abs(sampled.rho_plus - exact.rho_plus) <= 1e-10


def test_sampled_is_reproducible(rng):
    x, _ = random_problem(rng, 10, 12)
    a = sparse_eigen_sampled(x, 4, samples=30, seed=9)
    b = sparse_eigen_sampled(x, 4, samples=30, seed=9)
    assert a == b


def test_sampled_is_inner_estimate(rng):
    for _ in range(10):
        p = int(rng.integers(3, 13))
        n = int(rng.integers(2, 15))
        x, _ = random_problem(rng, n, p)
        k = int(rng.integers(1, p + 1))
        exact = sparse_eigen_exact(x, k)
        sampled = sparse_eigen_sampled(x, k, samples=int(rng.integers(1, 40)), seed=int(rng.integers(1 << 30)))
        assert sampled.rho_plus <= exact.rho_plus + 1e-12
        assert sampled.rho_minus >= exact.rho_minus - 1e-12


def test_pi_bound_values():
    assert pi_bound(1.3, 1.3, 5) == 0.0
    assert pi_bound(2.0, 1.0, 4) == pytest.approx(1.0)
    assert pi_bound(1.25, 1.0, 9) == pytest.approx(0.75)


def test_pi_bound_errors():
    with pytest.raises(InvalidSpectrumError):
        pi_bound(0.5, 1.0, 2)
    with pytest.raises(DomainError):
        pi_bound(1.0, 0.0, 2)
