"""Command-line entry point: ``sparsestage {simulate,solve,spectra,diagnose,generate}``.

Exit status is 0 on success, 1 for invalid input, 2 for numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import GridError, NumericFailureError, SparseStageError, ValidationError
from .harness import ExperimentConfig, emit_table, run_grid
from .model import NoiseSpec, generate_design, generate_observations, generate_target, load_fixture, replication_seeds, save_fixture
from .multistage import MultiStageConfig, run_multistage
from .solver import SolverConfig
from .spectra import CSV_HEADER, DEFAULT_BUDGET, sparse_eigen_exact, sparse_eigen_sampled
from .theory import (
    TheoryInputs,
    best_s,
    default_s_grid,
    inputs_from_design,
    lambda_threshold,
    min_coef_check,
    param_bound_rhs,
    stage_bound,
    theta_threshold,
)

log = logging.getLogger("sparsestage")


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def cmd_simulate(args) -> int:
    doc = _read_json(args.config) if args.config else {}
    doc["master_seed"] = args.seed
    for name in ("replications", "n", "p", "kbar", "sigma"):
        v = getattr(args, name)
        if v is not None:
            doc[name] = v
    config = ExperimentConfig.from_dict(doc)
    log.info("running %d replications with %d worker(s)", config.replications, args.workers)
    table = run_grid(config, workers=args.workers)
    text = emit_table(table, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def cmd_solve(args) -> int:
    fx = load_fixture(args.data)
    config = MultiStageConfig(args.lam, args.theta, args.stages, early_stop=args.early_stop)
    result = run_multistage(fx.X, fx.y, config, SolverConfig(tol=args.tol, max_sweeps=args.max_sweeps))
    text = result.to_json() + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_spectra(args) -> int:
    fx = load_fixture(args.data)
    if args.samples:
        spec = sparse_eigen_sampled(fx.X, args.k, args.samples, args.seed)
    else:
        spec = sparse_eigen_exact(fx.X, args.k, budget=args.budget)
    if args.header:
        print(CSV_HEADER)
    print(spec.csv_row())
    return 0


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _report(inputs: TheoryInputs, candidates, methods=None, target=None) -> list[tuple[str, str, str]]:
    rows = []

    def add(name, fn, status_fn=None):
        try:
            v = fn()
        except SparseStageError as exc:
            rows.append((name, "undefined", str(exc)))
            return None
        rows.append((name, _fmt(v), status_fn(v) if status_fn else ""))
        return v

    lam, theta = inputs.lam, inputs.theta
    add("lambda_threshold", lambda: lambda_threshold(inputs),
        (lambda v: "pass" if lam >= v else "fail") if lam is not None else None)
    add("lambda_threshold_estimation", lambda: lambda_threshold(inputs, for_estimation=True),
        (lambda v: "pass" if lam >= v else "fail") if lam is not None else None)

    best, scan = best_s(candidates)
    for c, res, note in scan:
        if res is None:
            rows.append((f"sec[s={_fmt(c.s)}]", "undefined", note))
        else:
            rows.append((f"sec[s={_fmt(c.s)}]", f"margin={_fmt(res.margin)}", "pass" if res.holds else "fail"))
    chosen = best or inputs
    rows.append(("best_s", _fmt(chosen.s) if best else "none", ""))
    if lam is not None:
        add("theta_threshold", lambda: theta_threshold(chosen),
            (lambda v: "pass" if theta > v else "fail") if theta is not None else None)
    if target is not None and theta is not None:
        ok = min_coef_check(target, theta)
        rows.append(("min_coef_check", str(ok), "pass" if ok else "fail"))
    if lam is not None and theta is not None:
        add("stage_bound_L", lambda: stage_bound(chosen))
    if lam is not None and inputs.rho_minus_est is not None:
        add("param_bound_rhs", lambda: param_bound_rhs(chosen))
    for name, m in (methods or {}).get(chosen.s, {}).items():
        rows.append((f"source:{name}", m, ""))
    return rows


def cmd_diagnose(args) -> int:
    target = None
    methods = {}
    if args.inputs:
        doc = _read_json(args.inputs)
        grid = doc.pop("s_grid", None)
        base = TheoryInputs.from_dict(doc)
        candidates = [TheoryInputs.from_dict({**doc, **entry}) for entry in grid] if grid else [base]
    elif args.data:
        fx = load_fixture(args.data)
        target = fx.target
        kbar = args.kbar if args.kbar is not None else (target.kbar if target else None)
        if kbar is None:
            raise ValidationError("--kbar is required when the fixture has no wbar")
        grid = args.s_grid or default_s_grid(kbar)
        candidates = []
        for s in grid:
            inp, methods[float(s)] = inputs_from_design(
                fx.X, args.sigma, kbar, s, eta=args.eta, lam=args.lam, theta=args.theta,
                target=target, samples=args.samples, seed=args.seed, budget=args.budget,
            )
            candidates.append(inp)
        base = candidates[0]
    else:
        raise ValidationError("diagnose needs --inputs or --data")
    rows = _report(base, candidates, methods, target)
    width = max(len(r[0]) for r in rows)
    print(f"{'quantity':<{width}}  value  status")
    for name, value, status in rows:
        print(f"{name:<{width}}  {value}  {status}".rstrip())
    return 0


def cmd_generate(args) -> int:
    s_design, s_target, s_noise = replication_seeds(args.seed, 0)
    X = generate_design(args.n, args.p, s_design)
    target = generate_target(args.p, args.kbar, args.low, args.high, s_target)
    y = generate_observations(X, target, NoiseSpec("gaussian", args.sigma), s_noise)
    save_fixture(args.out, X, y, target)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsestage", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the support-recovery Monte-Carlo grid")
    p.add_argument("--config", help="JSON document with ExperimentConfig fields")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--replications", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--kbar", type=int)
    p.add_argument("--sigma", type=float)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("solve", help="run multi-stage relaxation on a fixture")
    p.add_argument("--data", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--stages", type=int, default=8)
    p.add_argument("--early-stop", action="store_true")
    p.add_argument("--tol", type=float, default=SolverConfig.tol)
    p.add_argument("--max-sweeps", type=int, default=SolverConfig.max_sweeps)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("spectra", help="sparse eigenvalues of a fixture's design")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, help="sample random subsets instead of enumerating")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("diagnose", help="evaluate the recovery conditions")
    p.add_argument("--inputs", help="JSON TheoryInputs document, optionally with an s_grid list")
    p.add_argument("--data", help="fixture to estimate sparse eigenvalues from")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--kbar", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--s-grid", type=float, nargs="+")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("generate", help="write a synthetic dataset fixture")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=int, default=250)
    p.add_argument("--kbar", type=int, default=30)
    p.add_argument("--low", type=float, default=1.0)
    p.add_argument("--high", type=float, default=10.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        numeric = any(isinstance(f.cause, NumericFailureError) for f in exc.failures)
        return 2 if numeric else 1
    except NumericFailureError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
