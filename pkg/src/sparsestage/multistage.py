"""Multi-stage convex relaxation for capped-L1 regularization.

Stage 1 is the plain Lasso with every penalty equal to ``lam``.  After each
stage the penalty on feature ``j`` is switched off when ``|w_j| > theta`` and
kept at ``lam`` otherwise, and the weighted Lasso is solved again from the
previous solution.  Viewed as alternating minimization of the joint objective

    (1/n)||Xw - y||^2 + sum_j lam_j |w_j| + sum_j max((lam - lam_j) theta, 0)

over ``w`` and ``lam_j in [0, lam]``, every stage can only lower the capped-L1
objective ``(1/n)||Xw - y||^2 + lam * sum_j min(|w_j|, theta)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidDimensionError, InvalidWeightError, ValidationError
from .solver import LassoSolution, PenaltyWeights, SolverConfig, solve_weighted_lasso


@dataclass(frozen=True)
class MultiStageConfig:
    lam: float
    theta: float
    max_stages: int = 8
    early_stop: bool = False

    def __post_init__(self):
        if not (self.lam > 0 and np.isfinite(self.lam)):
            raise ValidationError(f"lambda must be > 0, got {self.lam}")
        if not self.theta > 0:
            raise ValidationError(f"theta must be > 0, got {self.theta}")
        if self.max_stages < 1:
            raise ValidationError(f"max_stages must be >= 1, got {self.max_stages}")


@dataclass(frozen=True)
class StageTrace:
    stage: int
    weights_in: PenaltyWeights
    solution: LassoSolution
    capped_objective: float
    joint_objective: float
    support: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "support", self.solution.support)


@dataclass(frozen=True)
class MultiStageResult:
    traces: tuple[StageTrace, ...]
    lam: float
    theta: float
    fixed_point_reached: bool = False

    @property
    def final(self) -> np.ndarray:
        return self.traces[-1].solution.coefficients

    @property
    def stages_run(self) -> int:
        return len(self.traces)

    def to_dict(self) -> dict:
        stages = []
        for t in self.traces:
            lam_in = np.asarray(t.weights_in)
            stages.append(
                {
                    "stage": t.stage,
                    "mask": [int(v != 0.0) for v in lam_in],
                    "coefficients": [float(v) for v in t.solution.coefficients],
                    "support": list(t.support),
                    "capped_objective": t.capped_objective,
                    "joint_objective": t.joint_objective,
                    "converged": t.solution.converged,
                    "kkt_residual": t.solution.kkt_residual,
                    "sweeps": t.solution.sweeps_used,
                }
            )
        return {
            "lambda": self.lam,
            "theta": self.theta,
            "stages_run": self.stages_run,
            "fixed_point_reached": self.fixed_point_reached,
            "final": [float(v) for v in self.final],
            "stages": stages,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _residual_term(X, y, w) -> float:
    x = np.asarray(X, dtype=float)
    yv = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.ndim != 2 or x.shape != (yv.size, w.size):
        raise InvalidDimensionError("design, observations and coefficients are inconsistent")
    r = x @ w - yv
    return float(r @ r) / x.shape[0]


def capped_l1_penalty(w, lam: float, theta: float) -> float:
    return float(lam * np.minimum(np.abs(np.asarray(w, dtype=float)), theta).sum())


def capped_l1_objective(X, y, w, lam: float, theta: float) -> float:
    return _residual_term(X, y, w) + capped_l1_penalty(w, lam, theta)


def update_weights(w, lam: float, theta: float) -> PenaltyWeights:
    """Keep penalty ``lam`` where ``|w_j| <= theta``, drop it elsewhere."""
    w = np.asarray(w, dtype=float)
    return PenaltyWeights(np.where(np.abs(w) <= theta, float(lam), 0.0))


def joint_objective(X, y, w, weights, lam: float, theta: float) -> float:
    lam_j = np.asarray(weights, dtype=float)
    if np.any(lam_j < 0) or np.any(lam_j > lam):
        raise InvalidWeightError(f"weights must lie in [0, {lam}]")
    w = np.asarray(w, dtype=float)
    conj = np.maximum((lam - lam_j) * theta, 0.0).sum()
    return _residual_term(X, y, w) + float(lam_j @ np.abs(w)) + float(conj)


def run_multistage(
    X,
    y,
    config: MultiStageConfig,
    solver_config: Optional[SolverConfig] = None,
) -> MultiStageResult:
    """Run up to ``config.max_stages`` reweighted Lasso stages.

    With ``early_stop`` the run ends as soon as the weights produced by a
    stage equal the ones that stage consumed; ``fixed_point_reached`` is set
    whenever that happens, early stop or not.
    """
    solver_config = solver_config or SolverConfig()
    x = np.asarray(X, dtype=float)
    yv = np.asarray(y, dtype=float)
    if x.ndim != 2 or yv.shape != (x.shape[0],):
        raise InvalidDimensionError(f"design {x.shape} and observations {yv.shape} are inconsistent")
    p = x.shape[1]
    lam, theta = config.lam, config.theta

    weights = PenaltyWeights.uniform(lam, p)
    warm = None
    traces = []
    fixed = False
    for stage in range(1, config.max_stages + 1):
        sol = solve_weighted_lasso(x, yv, weights, solver_config, warm_start=warm)
        traces.append(
            StageTrace(
                stage=stage,
                weights_in=weights,
                solution=sol,
                capped_objective=capped_l1_objective(x, yv, sol.coefficients, lam, theta),
                joint_objective=joint_objective(x, yv, sol.coefficients, weights, lam, theta),
            )
        )
        new_weights = update_weights(sol.coefficients, lam, theta)
        if np.array_equal(new_weights.weights, weights.weights):
            fixed = True
            if config.early_stop:
                break
        weights = new_weights
        warm = sol.coefficients
    return MultiStageResult(tuple(traces), lam, theta, fixed)
