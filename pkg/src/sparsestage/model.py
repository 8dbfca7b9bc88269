"""Domain types and synthetic data generation.

Designs have iid standard normal entries with every column rescaled to
Euclidean norm ``sqrt(n)``; targets have ``kbar`` nonzeros drawn uniformly
from ``(low, high)``; observations are ``y = X @ wbar + eps``.

All random draws go through counter-based Philox streams seeded from a
``numpy.random.SeedSequence`` so that a replication is fully determined by
``(master_seed, rep_index)`` and never by call order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional, Sequence, Union

import numpy as np

from .errors import DegenerateColumnError, InvalidDimensionError, InvalidSparsityError, ValidationError

SeedLike = Union[int, Sequence[int], np.random.SeedSequence, np.random.Generator]

NORM_RTOL = 1e-9


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Return a Philox-backed generator for ``seed``.

    Generators are passed through unchanged so callers can thread one stream
    through several draws.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def replication_seeds(master_seed: int, rep_index: int) -> tuple[np.random.SeedSequence, ...]:
    """Independent child streams (design, target, noise) for one replication."""
    return tuple(np.random.SeedSequence([int(master_seed), int(rep_index)]).spawn(3))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DesignMatrix:
    """An ``n x p`` design whose columns all have squared norm ``n``."""

    x: np.ndarray

    def __post_init__(self):
        x = _frozen(self.x)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise InvalidDimensionError(f"design must be a non-empty 2-D array, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValidationError("design contains non-finite entries")
        n = x.shape[0]
        dev = np.max(np.abs(np.einsum("ij,ij->j", x, x) - n)) / n
        if dev > NORM_RTOL:
            raise ValidationError(
                f"design columns are not normalized to squared norm n (max rel. deviation {dev:.3g}); "
                "use DesignMatrix.from_raw"
            )
        object.__setattr__(self, "x", x)

    @classmethod
    def from_raw(cls, x) -> "DesignMatrix":
        """Rescale each column of ``x`` to norm ``sqrt(n)``."""
        x = np.array(x, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise InvalidDimensionError(f"design must be a non-empty 2-D array, got shape {x.shape}")
        norms = np.sqrt(np.einsum("ij,ij->j", x, x))
        zero = np.flatnonzero(norms == 0)
        if zero.size:
            raise DegenerateColumnError(f"all-zero column(s) cannot be normalized: {zero.tolist()}")
        return cls(x / (norms / np.sqrt(x.shape[0])))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.x if dtype is None else self.x.astype(dtype)


@dataclass(frozen=True)
class SparseTarget:
    """True coefficient vector together with its support."""

    coefficients: np.ndarray
    support: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        w = _frozen(self.coefficients)
        if w.ndim != 1 or w.size < 1:
            raise InvalidDimensionError("coefficients must be a non-empty vector")
        object.__setattr__(self, "coefficients", w)
        object.__setattr__(self, "support", tuple(int(j) for j in np.flatnonzero(w != 0.0)))

    @property
    def kbar(self) -> int:
        return len(self.support)

    @property
    def p(self) -> int:
        return self.coefficients.size


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean noise with sub-Gaussian scale ``sigma``.

    ``uniform-bounded`` draws from ``[-sigma, sigma]``: an interval of width
    ``b - a`` has sub-Gaussian scale ``(b - a) / 2``.
    """

    kind: Literal["gaussian", "uniform-bounded"] = "gaussian"
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform-bounded"):
            raise ValidationError(f"unknown noise kind {self.kind!r}")
        if not (self.sigma >= 0 and np.isfinite(self.sigma)):
            raise ValidationError(f"sigma must be finite and >= 0, got {self.sigma}")

    @classmethod
    def from_interval(cls, a: float, b: float) -> "NoiseSpec":
        if not b > a:
            raise ValidationError("interval must satisfy a < b")
        return cls("uniform-bounded", (b - a) / 2.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.sigma == 0:
            return np.zeros(size)
        if self.kind == "gaussian":
            return rng.normal(0.0, self.sigma, size)
        return rng.uniform(-self.sigma, self.sigma, size)


@dataclass(frozen=True)
class Observations:
    y: np.ndarray
    provenance: Optional[dict] = None

    def __post_init__(self):
        y = _frozen(self.y)
        if y.ndim != 1:
            raise InvalidDimensionError("observations must be a vector")
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.size

    def __array__(self, dtype=None, copy=None):
        return self.y if dtype is None else self.y.astype(dtype)


def generate_design(n: int, p: int, seed: SeedLike) -> DesignMatrix:
    if n < 1 or p < 1:
        raise InvalidDimensionError(f"need n >= 1 and p >= 1, got n={n}, p={p}")
    rng = make_rng(seed)
    return DesignMatrix.from_raw(rng.standard_normal((n, p)))


def generate_target(
    p: int,
    kbar: int,
    low: float,
    high: float,
    seed: SeedLike,
    random_sign: bool = False,
) -> SparseTarget:
    """Draw a ``kbar``-sparse vector with magnitudes uniform on ``(low, high)``.

    With ``random_sign`` each nonzero gets an independent fair sign.
    """
    if p < 1:
        raise InvalidDimensionError(f"p must be >= 1, got {p}")
    if not 1 <= kbar <= p:
        raise InvalidSparsityError(f"need 1 <= kbar <= p, got kbar={kbar}, p={p}")
    if not low < high:
        raise ValidationError(f"need low < high, got ({low}, {high})")
    rng = make_rng(seed)
    support = rng.choice(p, size=kbar, replace=False)
    values = rng.uniform(low, high, kbar)
    # a draw landing exactly on 0 would silently shrink the support
    values[values == 0.0] = np.nextafter(0.0, 1.0) if low >= 0 else low
    if random_sign:
        values *= rng.choice([-1.0, 1.0], size=kbar)
    w = np.zeros(p)
    w[support] = values
    return SparseTarget(w)


def generate_observations(
    X: DesignMatrix,
    target: SparseTarget,
    noise: NoiseSpec,
    seed: SeedLike,
) -> Observations:
    x = np.asarray(X, dtype=float)
    if target.p != x.shape[1]:
        raise InvalidDimensionError(f"target has length {target.p}, design has p={x.shape[1]}")
    rng = make_rng(seed)
    eps = noise.sample(rng, x.shape[0])
    # explicit row sums keep y bit-stable regardless of BLAS threading
    mean = np.einsum("ij,j->i", x, target.coefficients)
    return Observations(mean + eps, provenance={"noise": noise.kind, "sigma": noise.sigma})


# -- JSON fixtures ---------------------------------------------------------


def _num(v: float) -> str:
    return format(float(v), ".17g")


def _arr(values) -> str:
    return "[" + ",".join(_num(v) for v in np.ravel(values)) + "]"


@dataclass(frozen=True)
class Fixture:
    X: DesignMatrix
    y: Observations
    target: Optional[SparseTarget] = None


def dumps_fixture(X: DesignMatrix, y: Observations, target: Optional[SparseTarget] = None) -> str:
    """Serialize a dataset; every number carries 17 significant digits."""
    x = np.asarray(X)
    parts = [f'"n": {x.shape[0]}', f'"p": {x.shape[1]}', f'"x": {_arr(x)}', f'"y": {_arr(np.asarray(y))}']
    if target is not None:
        parts.append(f'"wbar": {_arr(target.coefficients)}')
    return "{" + ", ".join(parts) + "}\n"


def loads_fixture(text: str) -> Fixture:
    doc = json.loads(text)
    try:
        n, p = int(doc["n"]), int(doc["p"])
        x = np.asarray(doc["x"], dtype=float)
        y = np.asarray(doc["y"], dtype=float)
    except KeyError as exc:
        raise ValidationError(f"fixture is missing field {exc}") from None
    if x.size != n * p or y.size != n:
        raise InvalidDimensionError(f"fixture sizes do not match n={n}, p={p}")
    target = None
    if doc.get("wbar") is not None:
        target = SparseTarget(np.asarray(doc["wbar"], dtype=float))
        if target.p != p:
            raise InvalidDimensionError("wbar length does not match p")
    return Fixture(DesignMatrix(x.reshape(n, p)), Observations(y), target)


def save_fixture(path, X, y, target=None) -> None:
    Path(path).write_text(dumps_fixture(X, y, target))


def load_fixture(path) -> Fixture:
    return loads_fixture(Path(path).read_text())
