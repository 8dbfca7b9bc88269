import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_lasso, inv3, oracle_instances, random_problem, subgradient_violation
from sparsestage.errors import InvalidDimensionError, InvalidWeightError, NumericFailureError, SingularSystemError
from sparsestage.solver import (
    PenaltyWeights,
    SolverConfig,
    kkt_residual,
    restricted_least_squares,
    soft_threshold,
    solve_weighted_lasso,
    weighted_objective,
)


@pytest.mark.parametrize("z,t,expected", [(3, 1, 2), (-0.5, 1, 0), (-3, 1, -2), (1, 1, 0), (0.0, 0.0, 0.0)])
def test_soft_threshold(z, t, expected):
    assert soft_threshold(z, t) == expected


def test_soft_threshold_rejects_negative_threshold():
    with pytest.raises(ValueError):
        soft_threshold(1.0, -1.0)


def test_penalty_weights_validation():
    with pytest.raises(InvalidWeightError):
        PenaltyWeights([1.0, -0.1])
    with pytest.raises(InvalidWeightError):
        PenaltyWeights([np.inf])


def test_large_penalty_gives_zero(rng):
    x, y = random_problem(rng, 20, 10)
    lam = np.full(10, 2 * np.max(np.abs(x.T @ y)) / 20) * (1 + 1e-12)
    sol = solve_weighted_lasso(x, y, lam)
    assert sol.converged
    assert np.all(sol.coefficients == 0.0)
    assert kkt_residual(x, y, lam, np.zeros(10)) == 0.0


def test_boundary_penalty_is_a_tie(rng):
    # at exact equality zero is optimal but roundoff may leave ~1e-16
    x, y = random_problem(rng, 20, 10)
    lam = np.full(10, 2 * np.max(np.abs(x.T @ y)) / 20)
    sol = solve_weighted_lasso(x, y, lam)
    assert sol.converged
    assert np.max(np.abs(sol.coefficients)) <= 1e-12


def test_unpenalized_square_system(rng):
    x, y = random_problem(rng, 5, 5)
    while np.linalg.cond(x) > 50:
        x, y = random_problem(rng, 5, 5)
    sol = solve_weighted_lasso(x, y, np.zeros(5), SolverConfig(tol=1e-12))
    assert sol.converged
    np.testing.assert_allclose(sol.coefficients, np.linalg.solve(x, y), atol=1e-6)


def test_orthonormal_design_closed_form(rng):
    n, p = 12, 4
    q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    x = np.sqrt(n) * q
    y = rng.standard_normal(n) * 2
    lam = np.array([0.1, 0.5, 1.0, 3.0])
    expected = np.array([soft_threshold(x[:, j] @ y / n, lam[j] / 2) for j in range(p)])
    # the closed form satisfies the first-order condition on its own
    assert subgradient_violation(x, y, lam, expected) < 1e-12
    sol = solve_weighted_lasso(x, y, lam)
    np.testing.assert_allclose(sol.coefficients, expected, atol=1e-9)
    assert np.array_equal(sol.coefficients == 0, expected == 0)


def test_p2_toy_matches_grid():
    x = np.array([[1.0, 0.3], [0.2, 1.1], [-0.4, 0.5], [0.9, -0.7]])
    y = np.array([1.0, -0.5, 0.7, 2.0])
    lam = np.array([0.2, 0.4])
    sol = solve_weighted_lasso(x, y, lam)
    ref = brute_force_lasso(x, y, lam)
    assert np.max(np.abs(sol.coefficients - ref)) <= 2e-3


@pytest.mark.parametrize("case", range(6))
def test_small_instances_match_grid(case):
    x, y, lam = oracle_instances(1000 + case, 1)[0]
    sol = solve_weighted_lasso(x, y, lam)
    assert sol.converged
    assert np.max(np.abs(sol.coefficients - brute_force_lasso(x, y, lam))) <= 2e-3


def test_kkt_residual_matches_loop_oracle(rng):
    x, y = random_problem(rng, 9, 5)
    lam = rng.uniform(0, 1, 5)
    for w in (np.zeros(5), rng.standard_normal(5), np.array([0.0, 1.0, 0.0, -2.0, 0.5])):
        assert kkt_residual(x, y, lam, w) == pytest.approx(subgradient_violation(x, y, lam, w), abs=1e-12)


def test_kkt_detects_perturbation(rng):
    x, y = random_problem(rng, 30, 10)
    lam = np.full(10, 0.2)
    sol = solve_weighted_lasso(x, y, lam)
    assert sol.converged and sol.kkt_residual <= 1e-6
    j = int(np.flatnonzero(sol.coefficients)[0])
    w = sol.coefficients.copy()
    w[j] += 0.1
    assert kkt_residual(x, y, lam, w) > 1e-6


def test_restricted_least_squares_noiseless(rng):
    x, _ = random_problem(rng, 15, 8)
    wbar = np.zeros(8)
    wbar[[1, 4, 6]] = [2.0, -3.0, 0.5]
    w = restricted_least_squares(x, x @ wbar, [1, 4, 6])
    np.testing.assert_allclose(w, wbar, atol=1e-8)
    assert np.all(w[[0, 2, 3, 5, 7]] == 0.0)


def test_restricted_least_squares_empty(rng):
    x, y = random_problem(rng, 5, 3)
    assert np.array_equal(restricted_least_squares(x, y, []), np.zeros(3))


def test_restricted_least_squares_normal_equations(rng):
    x, y = random_problem(rng, 8, 6)
    F = [0, 2, 5]
    sub = x[:, F]
    ref = inv3(sub.T @ sub) @ (sub.T @ y)
    w = restricted_least_squares(x, y, F)
    np.testing.assert_allclose(w[F], ref, atol=1e-8)


def test_restricted_least_squares_singular(rng):
    x, y = random_problem(rng, 6, 3)
    x[:, 2] = x[:, 0]
    with pytest.raises(SingularSystemError):
        restricted_least_squares(x, y, [0, 2])
    with pytest.raises(SingularSystemError):
        restricted_least_squares(x[:2], y[:2], [0, 1, 2])


def test_weighted_objective_at_zero(rng):
    x, y = random_problem(rng, 7, 3)
    assert weighted_objective(x, y, np.ones(3), np.zeros(3)) == pytest.approx(y @ y / 7)


def test_weighted_objective_unpenalized_full_support(rng):
    x, y = random_problem(rng, 4, 4)
    w = np.linalg.solve(x, y)
    assert weighted_objective(x, y, np.zeros(4), w) == pytest.approx(0.0, abs=1e-20)


def test_objective_descends_sweep_by_sweep(rng):
    x, y = random_problem(rng, 40, 60)
    lam = rng.uniform(0.05, 0.3, 60)
    warm = rng.standard_normal(60) * 0.5
    values = [weighted_objective(x, y, lam, warm)]
    for k in range(1, 30):
        sol = solve_weighted_lasso(x, y, lam, SolverConfig(max_sweeps=k), warm_start=warm)
        values.append(weighted_objective(x, y, lam, sol.coefficients))
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_homogeneity(rng):
    x, y = random_problem(rng, 30, 20)
    lam = rng.uniform(0.05, 0.5, 20)
    cfg = SolverConfig(tol=1e-13)
    base = solve_weighted_lasso(x, y, lam, cfg)
    c = 3.5
    scaled = solve_weighted_lasso(x, c * y, c * lam, cfg)
    np.testing.assert_allclose(scaled.coefficients, c * base.coefficients, atol=1e-8)


def test_warm_start_reaches_same_objective(rng):
    x, y = random_problem(rng, 25, 40)
    lam = np.full(40, 0.15)
    cold = solve_weighted_lasso(x, y, lam)
    warm = solve_weighted_lasso(x, y, lam, warm_start=rng.standard_normal(40))
    assert warm.converged and cold.converged
    assert weighted_objective(x, y, lam, warm.coefficients) == pytest.approx(
        weighted_objective(x, y, lam, cold.coefficients), abs=1e-8
    )


def test_nonconvergence_is_reported(rng):
    x, y = random_problem(rng, 30, 50)
    sol = solve_weighted_lasso(x, y, np.full(50, 0.01), SolverConfig(max_sweeps=1))
    assert not sol.converged
    assert sol.sweeps_used == 1
    assert sol.kkt_residual > 0


def test_nan_input_raises(rng):
    x, y = random_problem(rng, 5, 3)
    y[0] = np.nan
    with pytest.raises(NumericFailureError):
        solve_weighted_lasso(x, y, np.ones(3))


def test_dimension_checks(rng):
    x, y = random_problem(rng, 5, 3)
    with pytest.raises(InvalidDimensionError):
        solve_weighted_lasso(x, y[:4], np.ones(3))
    with pytest.raises(InvalidDimensionError):
        solve_weighted_lasso(x, y, np.ones(2))
    with pytest.raises(InvalidDimensionError):
        solve_weighted_lasso(x, y, np.ones(3), warm_start=np.zeros(4))


def test_zero_column_stays_zero(rng):
    x, y = random_problem(rng, 6, 3, normalize=False)
    x[:, 1] = 0.0
    sol = solve_weighted_lasso(x, y, np.full(3, 0.1))
    assert sol.coefficients[1] == 0.0 and sol.converged


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(2, 30),
    p=st.integers(1, 40),
    seed=st.integers(0, 2**32 - 1),
    scale=st.floats(0.0, 2.0),
)
def test_kkt_certificate_property(n, p, seed, scale):
    rng = np.random.default_rng(seed)
    x, y = random_problem(rng, n, p)
    lam = scale * rng.uniform(0, 1, p)
    sol = solve_weighted_lasso(x, y, lam)
    if sol.converged:
        assert sol.kkt_residual <= 1e-6
        assert subgradient_violation(x, y, lam, sol.coefficients) <= 1e-6 + 1e-12
    assert sol.support == tuple(np.flatnonzero(sol.coefficients).tolist())
