"""Monte-Carlo support-recovery experiments.

Each replication draws one dataset ``(X, wbar, y)`` from the stream
``(master_seed, rep_index)`` and reuses it for every ``(tau, mu)`` cell
(common random numbers).  Cells use ``lam = tau * sigma * sqrt(ln p / n)``
and ``theta = mu * lam``; recovery is checked at each recorded stage with an
exact-zero support comparison.  Replications are independent, so the grid
can be spread over worker processes; the reduction is in ``rep_index`` order
and only sums integers, which keeps the output identical for any worker
count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import GridError, InvalidDimensionError, ReplicationError, ValidationError
from .model import (
    DesignMatrix,
    NoiseSpec,
    Observations,
    SparseTarget,
    generate_design,
    generate_observations,
    generate_target,
    replication_seeds,
)
from .multistage import MultiStageConfig, run_multistage
from .solver import SolverConfig

CSV_COLUMNS = ("mu", "tau", "lambda", "stage", "recovery_prob", "reps")


@dataclass(frozen=True)
class ExperimentConfig:
    """Simulation settings; the defaults reproduce the published study.

    ``lambda_base`` overrides the unit ``sigma * sqrt(ln p / n)`` that ``tau``
    multiplies, which is needed for noiseless runs where that unit is zero.
    """

    n: int = 100
    p: int = 250
    kbar: int = 30
    sigma: float = 1.0
    coef_low: float = 1.0
    coef_high: float = 10.0
    tau_grid: tuple[float, ...] = (1, 2, 4, 8, 16, 32)
    mu_grid: tuple[float, ...] = (0.5, 1, 2, 4)
    stages_recorded: tuple[int, ...] = (1, 2, 4, 8)
    replications: int = 100
    master_seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    noise_kind: str = "gaussian"
    random_sign: bool = False
    lambda_base: Optional[float] = None

    def __post_init__(self):
        for name in ("tau_grid", "mu_grid"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, "stages_recorded", tuple(int(v) for v in self.stages_recorded))
        if isinstance(self.solver, dict):
            object.__setattr__(self, "solver", SolverConfig(**self.solver))
        if self.n < 1 or self.p < 1 or not 1 <= self.kbar <= self.p:
            raise InvalidDimensionError(f"invalid dimensions n={self.n}, p={self.p}, kbar={self.kbar}")
        if self.replications < 1:
            raise ValidationError("replications must be >= 1")
        if not (self.tau_grid and self.mu_grid and self.stages_recorded):
            raise ValidationError("tau_grid, mu_grid and stages_recorded must be nonempty")
        if any(v <= 0 for v in self.tau_grid + self.mu_grid):
            raise ValidationError("grid multipliers must be > 0")
        st = self.stages_recorded
        if st[0] < 1 or any(a >= b for a, b in zip(st, st[1:])):
            raise ValidationError("stages_recorded must be strictly ascending and >= 1")
        NoiseSpec(self.noise_kind, self.sigma)
        if self.lambda_unit() <= 0:
            raise ValidationError("lambda unit is zero (sigma = 0?); set lambda_base explicitly")

    def lambda_unit(self) -> float:
        if self.lambda_base is not None:
            return float(self.lambda_base)
        return self.sigma * math.sqrt(math.log(self.p) / self.n)

    def lambda_for(self, tau: float) -> float:
        return tau * self.lambda_unit()

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ValidationError(f"unknown config field(s): {sorted(extra)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("tau_grid", "mu_grid", "stages_recorded"):
            d[name] = list(d[name])
        return d


@dataclass(frozen=True)
class Dataset:
    X: DesignMatrix
    target: SparseTarget
    y: Observations


def make_dataset(config: ExperimentConfig, rep_index: int) -> Dataset:
    s_design, s_target, s_noise = replication_seeds(config.master_seed, rep_index)
    X = generate_design(config.n, config.p, s_design)
    target = generate_target(
        config.p, config.kbar, config.coef_low, config.coef_high, s_target, random_sign=config.random_sign
    )
    y = generate_observations(X, target, NoiseSpec(config.noise_kind, config.sigma), s_noise)
    return Dataset(X, target, y)


def exact_recovery(w_hat, target: SparseTarget) -> bool:
    """Exact-zero support comparison, no tolerance."""
    w_hat = np.asarray(w_hat, dtype=float)
    if w_hat.shape != target.coefficients.shape:
        raise InvalidDimensionError(f"length {w_hat.size} does not match target length {target.p}")
    return bool(np.array_equal(w_hat != 0.0, target.coefficients != 0.0))


def _cell_flags(config: ExperimentConfig, data: Dataset, tau: float, mu: float) -> dict[int, bool]:
    lam = config.lambda_for(tau)
    ms = MultiStageConfig(lam, mu * lam, max_stages=max(config.stages_recorded))
    result = run_multistage(data.X, data.y, ms, config.solver)
    return {st: exact_recovery(result.traces[st - 1].solution.coefficients, data.target) for st in config.stages_recorded}


def run_replication(config: ExperimentConfig, tau: float, mu: float, rep_index: int) -> dict[int, bool]:
    """Recovery flag per recorded stage for one cell of one replication."""
    data = make_dataset(config, rep_index)
    try:
        return _cell_flags(config, data, tau, mu)
    except Exception as exc:
        raise ReplicationError(tau, mu, rep_index, exc) from exc


def _replicate_all_cells(args) -> tuple[np.ndarray, list[ReplicationError]]:
    config, rep_index = args
    data = make_dataset(config, rep_index)
    hits = np.zeros((len(config.mu_grid), len(config.tau_grid), len(config.stages_recorded)), dtype=np.int64)
    failures = []
    for a, mu in enumerate(config.mu_grid):
        for b, tau in enumerate(config.tau_grid):
            try:
                flags = _cell_flags(config, data, tau, mu)
            except Exception as exc:
                failures.append(ReplicationError(tau, mu, rep_index, exc))
                continue
            hits[a, b] = [flags[st] for st in config.stages_recorded]
    return hits, failures


@dataclass(frozen=True)
class RecoveryRow:
    mu: float
    tau: float
    lambda_value: float
    stage: int
    successes: int
    replications: int

    @property
    def recovery_probability(self) -> float:
        return self.successes / self.replications


@dataclass(frozen=True)
class RecoveryTable:
    rows: tuple[RecoveryRow, ...]
    metadata: dict = field(default_factory=dict)

    def cell(self, mu: float, tau: float, stage: int) -> RecoveryRow:
        for r in self.rows:
            if r.mu == mu and r.tau == tau and r.stage == stage:
                return r
        raise KeyError((mu, tau, stage))


def run_grid(config: ExperimentConfig, workers: int = 1, progress=None) -> RecoveryTable:
    """Run every replication and aggregate recovery frequencies per cell.

    ``progress``, if given, is called with the number of finished
    replications.
    """
    tasks = [(config, r) for r in range(config.replications)]
    total = np.zeros((len(config.mu_grid), len(config.tau_grid), len(config.stages_recorded)), dtype=np.int64)
    failures: list[ReplicationError] = []

    def consume(results):
        for i, (hits, fails) in enumerate(results, 1):
            total[...] += hits
            failures.extend(fails)
            if progress is not None:
                progress(i)

    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            consume(pool.map(_replicate_all_cells, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        consume(map(_replicate_all_cells, tasks))
    if failures:
        raise GridError(failures)

    rows = []
    mu_order = sorted(range(len(config.mu_grid)), key=lambda i: config.mu_grid[i])
    tau_order = sorted(range(len(config.tau_grid)), key=lambda i: config.tau_grid[i])
    for a in mu_order:
        for b in tau_order:
            for c, st in enumerate(config.stages_recorded):
                tau = config.tau_grid[b]
                rows.append(
                    RecoveryRow(config.mu_grid[a], tau, config.lambda_for(tau), st, int(total[a, b, c]), config.replications)
                )
    meta = {"config": config.to_dict(), "version": __version__}
    return RecoveryTable(tuple(rows), meta)


# -- output ----------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def table_to_csv(table: RecoveryTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in table.rows:
        w.writerow([_fmt(r.mu), _fmt(r.tau), f"{r.lambda_value:.6g}", r.stage, _fmt(r.recovery_probability), r.replications])
    return buf.getvalue()


def table_to_json(table: RecoveryTable) -> str:
    rows = [
        {
            "mu": r.mu,
            "tau": r.tau,
            "lambda": r.lambda_value,
            "stage": r.stage,
            "recovery_prob": r.recovery_probability,
            "successes": r.successes,
            "reps": r.replications,
        }
        for r in table.rows
    ]
    return json.dumps({"metadata": table.metadata, "rows": rows}, indent=1, sort_keys=True) + "\n"


def read_table_csv(text: str) -> RecoveryTable:
    """Parse CSV written by :func:`table_to_csv`.

    ``lambda`` comes back at the printed 6-digit precision.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CSV_COLUMNS:
        raise ValidationError(f"unexpected CSV header {header}")
    rows = []
    for mu, tau, lam, stage, prob, reps in reader:
        reps_i = int(reps)
        successes = round(float(prob) * reps_i)
        if successes / reps_i != float(prob):
            raise ValidationError(f"probability {prob} is not a count over {reps_i} replications")
        rows.append(RecoveryRow(float(mu), float(tau), float(lam), int(stage), successes, reps_i))
    return RecoveryTable(tuple(rows))


def emit_table(table: RecoveryTable, format: str = "csv", path=None) -> str:
    """Render ``table`` as CSV or JSON, writing it to ``path`` when given."""
    if format == "csv":
        text = table_to_csv(table)
    elif format == "json":
        text = table_to_json(table)
    else:
        raise ValidationError(f"unknown format {format!r}")
    if path is not None:
        Path(path).write_text(text)
    return text
