"""Evaluators for the support-recovery conditions and constants.

Two families of constants live here and are kept apart on purpose:

* support recovery: ``lam >= 7 sigma sqrt(2 rho_plus(1) ln(2p/eta) / n)``,
  ``theta > 9 lam / rho_minus(1.5 kbar + s)``, the sparse eigenvalue
  condition ``rho_plus(s) / rho_minus(1.5 kbar + 2s) <= 1 + 2s / (3 kbar)``
  and the stage count ``L``;
* parameter estimation: constant 20 in the lambda threshold and
  ``rho_minus(2 kbar + s)`` in the error bound.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from .errors import ConditionViolatedError, DomainError, ValidationError
from .model import SparseTarget


@dataclass(frozen=True)
class TheoryInputs:
    """Scalar inputs to the evaluators.

    ``rho_minus_a`` is ``rho_minus(1.5 kbar + s)``, ``rho_minus_b`` is
    ``rho_minus(1.5 kbar + 2 s)``, ``rho_plus_s`` is ``rho_plus(s)``.  The
    estimation bound additionally needs ``rho_plus_kbar = rho_plus(kbar)`` and
    ``rho_minus_est = rho_minus(2 kbar + s)``.  Any quantity left as ``None``
    is only an error when an evaluator needs it.
    """

    sigma: float
    n: int
    p: int
    kbar: int
    eta: float = 0.1
    s: Optional[float] = None
    rho_plus_1: Optional[float] = None
    rho_minus_a: Optional[float] = None
    rho_plus_s: Optional[float] = None
    rho_minus_b: Optional[float] = None
    rho_plus_kbar: Optional[float] = None
    rho_minus_est: Optional[float] = None
    lam: Optional[float] = None
    theta: Optional[float] = None
    k_theta: int = 0
    ell: Optional[float] = None

    def __post_init__(self):
        # eta = 1 is admitted: ln(2/eta) stays finite and some checks use it
        if not 0 < self.eta <= 1:
            raise ValidationError(f"eta must lie in (0, 1], got {self.eta}")
        if self.sigma < 0:
            raise ValidationError("sigma must be >= 0")
        if self.n < 1 or self.p < 1 or self.kbar < 0:
            raise ValidationError("need n >= 1, p >= 1, kbar >= 0")
        for name in ("rho_plus_1", "rho_minus_a", "rho_plus_s", "rho_minus_b", "rho_plus_kbar", "rho_minus_est"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValidationError(f"{name} must be >= 0, got {v}")
        if self.s is None:
            object.__setattr__(self, "s", float(math.ceil(1.5 * self.kbar)))

    def need(self, name: str) -> float:
        v = getattr(self, name)
        if v is None:
            raise ValidationError(f"{name} is required for this evaluation")
        return v

    @classmethod
    def from_dict(cls, doc: dict) -> "TheoryInputs":
        known = {f.name for f in fields(cls)}
        aliases = {"lambda": "lam"}
        kw = {aliases.get(k, k): v for k, v in doc.items()}
        extra = set(kw) - known
        if extra:
            raise ValidationError(f"unknown TheoryInputs field(s): {sorted(extra)}")
        return cls(**kw)

    def to_dict(self) -> dict:
        return asdict(self)


def lambda_threshold(inputs: TheoryInputs, for_estimation: bool = False) -> float:
    """Smallest admissible ``lam``; constant 7 for recovery, 20 for estimation."""
    c = 20.0 if for_estimation else 7.0
    rho1 = inputs.need("rho_plus_1")
    return c * inputs.sigma * math.sqrt(2.0 * rho1 * math.log(2.0 * inputs.p / inputs.eta) / inputs.n)


def theta_threshold(inputs: TheoryInputs) -> float:
    """``9 lam / rho_minus(1.5 kbar + s)``; admissible ``theta`` must exceed it."""
    rho = inputs.need("rho_minus_a")
    if not rho > 0:
        raise DomainError("rho_minus(1.5 kbar + s) must be > 0")
    return 9.0 * inputs.need("lam") / rho


@dataclass(frozen=True)
class SecResult:
    holds: bool
    margin: float
    ratio: float
    bound: float


def sec_check(inputs: TheoryInputs) -> SecResult:
    """Sparse eigenvalue condition; ``margin = bound - ratio``."""
    s, kbar = inputs.s, inputs.kbar
    rho_b = inputs.need("rho_minus_b")
    if not rho_b > 0:
        raise DomainError("rho_minus(1.5 kbar + 2s) must be > 0")
    if kbar < 1:
        raise ValidationError("kbar must be >= 1")
    if s < 1.5 * kbar:
        raise ValidationError(f"s must be >= 1.5 kbar = {1.5 * kbar}, got {s}")
    ratio = inputs.need("rho_plus_s") / rho_b
    bound = 1.0 + 2.0 * s / (3.0 * kbar)
    margin = bound - ratio
    return SecResult(margin >= 0, margin, ratio, bound)


def min_coef_check(target: SparseTarget, theta: float) -> bool:
    """True iff every nonzero coefficient satisfies ``|w_j| > 2 theta``."""
    w = target.coefficients
    nz = np.abs(w[w != 0.0])
    return bool(np.all(nz > 2.0 * theta))


def k_theta(target: SparseTarget, theta: float) -> int:
    """Number of support coefficients with ``|w_j| <= 2 theta``."""
    w = target.coefficients
    nz = np.abs(w[w != 0.0])
    return int(np.count_nonzero(nz <= 2.0 * theta))


def stage_bound(inputs: TheoryInputs) -> int:
    """Stage count ``L`` after which the support is recovered."""
    kbar = inputs.kbar
    if kbar < 1:
        raise ValidationError("kbar must be >= 1")
    lam = inputs.need("lam")
    if not lam > 0:
        raise DomainError("lambda must be > 0")
    arg = inputs.need("rho_minus_a") * inputs.need("theta") / (6.0 * lam)
    if not arg > 1.0:
        raise ConditionViolatedError(
            f"rho_minus * theta / (6 lambda) = {arg:.6g} must exceed 1 (theta too small relative to lambda)"
        )
    return math.floor(0.5 * math.log(kbar) / math.log(arg)) + 1


def param_bound_rhs(inputs: TheoryInputs) -> float:
    """Right-hand side of the stage-``ell`` estimation error bound.

    ``ell=None`` (or infinity) drops the geometric ``0.7**ell`` term.
    """
    rho_m = inputs.need("rho_minus_est")
    if not rho_m > 0:
        raise DomainError("rho_minus(2 kbar + s) must be > 0")
    kbar, n, sigma, lam = inputs.kbar, inputs.n, inputs.sigma, inputs.need("lam")
    noise = 0.0
    if sigma != 0:
        noise = 2.0 * sigma * math.sqrt(inputs.need("rho_plus_kbar")) * (
            math.sqrt(7.4 * kbar / n) + math.sqrt(2.7 * math.log(2.0 / inputs.eta) / n)
        )
    main = 17.0 / rho_m * (noise + lam * math.sqrt(inputs.k_theta))
    ell = inputs.ell
    geometric = 0.0 if ell is None else 0.7**ell * math.sqrt(kbar) * lam / rho_m
    return main + geometric


def default_s_grid(kbar: int) -> list[float]:
    return sorted({float(math.ceil(1.5 * kbar)), float(2 * kbar), float(3 * kbar)})


def best_s(candidates: list[TheoryInputs]) -> tuple[Optional[TheoryInputs], list[tuple[TheoryInputs, Optional[SecResult], str]]]:
    """Evaluate the eigenvalue condition for each candidate ``s``.

    Returns the candidate with the largest margin (``None`` if no candidate
    is evaluable) and the per-candidate report ``(inputs, result, note)``.
    """
    report = []
    best, best_margin = None, -math.inf
    for c in candidates:
        try:
            res = sec_check(c)
        except (ValidationError, DomainError) as exc:
            report.append((c, None, str(exc)))
            continue
        report.append((c, res, ""))
        if res.margin > best_margin:
            best, best_margin = c, res.margin
    return best, report


def inputs_from_design(
    X,
    sigma: float,
    kbar: int,
    s: float,
    eta: float = 0.1,
    lam: Optional[float] = None,
    theta: Optional[float] = None,
    target: Optional[SparseTarget] = None,
    samples: int = 10_000,
    seed=0,
    budget: Optional[int] = None,
) -> tuple[TheoryInputs, dict[str, str]]:
    """Fill the eigenvalue slots of :class:`TheoryInputs` from a design.

    Each sparse eigenvalue is exact when enumeration fits the budget and a
    sampled inner estimate otherwise; the second return value records which
    (``{"rho_minus_a": "sampled", ...}``).  Sparsity levels are rounded up
    and capped at ``p``.
    """
    from .spectra import DEFAULT_BUDGET, sparse_eigen

    x = np.asarray(X, dtype=float)
    p = x.shape[1]
    budget = DEFAULT_BUDGET if budget is None else budget
    levels = {
        "rho_plus_1": 1,
        "rho_plus_s": s,
        "rho_minus_a": 1.5 * kbar + s,
        "rho_minus_b": 1.5 * kbar + 2 * s,
        "rho_plus_kbar": kbar,
        "rho_minus_est": 2 * kbar + s,
    }
    values, methods, cache = {}, {}, {}
    for name, level in levels.items():
        k = min(max(1, math.ceil(level)), p)
        if k not in cache:
            cache[k] = sparse_eigen(x, k, budget=budget, samples=samples, seed=seed)
        spec = cache[k]
        values[name] = spec.rho_plus if name.startswith("rho_plus") else spec.rho_minus
        methods[name] = f"{spec.method}(k={k})"
    kt = k_theta(target, theta) if (target is not None and theta is not None) else 0
    inputs = TheoryInputs(
        sigma=sigma, n=x.shape[0], p=p, kbar=kbar, eta=eta, s=s, lam=lam, theta=theta, k_theta=kt, **values
    )
    return inputs, methods
