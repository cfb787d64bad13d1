"""Command-line interface.

Subcommands:
  solve  -- run the solver on a problem described in a JSON config
  demo   -- run the signal-recovery experiment (desk or full scale)
  check  -- run the randomized property suites

Exit codes: 0 success, 1 property-check failure, 2 infeasible problem,
3 configuration error.  The environment variable PROXPOINT_SEED overrides
the experiment seed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .core import LinearMap, Operator, Regularity, as_signal, check_class_t, check_firmly_nonexpansive
from .experiment import (
    ExperimentConfig,
    TraceRow,
    emit_csv,
    run_experiment,
    write_solution_csv,
)
from .haugazeau import InfeasibleHalfspacesError, halfspace_pair_projection_oracle, q_operator
from .solver import (
    AffineSubspace,
    ControlConfig,
    ConvexSet,
    Prescription,
    Problem,
    SolveStatus,
    schedule_round_robin,
    solve,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INFEASIBLE = 2
EXIT_CONFIG = 3


class ConfigError(ValueError):
    pass


def _require_keys(entry: dict, required: set, optional: set = frozenset()):
    kind = entry.get("kind", "<missing>")
    keys = set(entry) - {"kind"}
    missing = required - keys
    unknown = keys - required - optional
    if missing:
        raise ConfigError(f"constraint {kind!r} is missing keys {sorted(missing)}")
    if unknown:
        raise ConfigError(f"constraint {kind!r} has unknown keys {sorted(unknown)}")


def _build_constraint(entry: dict, dim: int):
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ConfigError("each constraint must be an object with a 'kind'")
    kind = entry["kind"]
    if kind == "identity":
        _require_keys(entry, set())
        return AffineSubspace(Operator(lambda x: x, Regularity.FIRMLY_NONEXPANSIVE,
                                       "identity"))
    if kind == "bandlimit":
        _require_keys(entry, {"b"})
        return AffineSubspace(catalog.bandlimit_projector(dim, int(entry["b"])))
    if kind == "hyperplane":
        _require_keys(entry, {"normal", "offset"})
        return AffineSubspace(catalog.hyperplane_projector(
            as_signal(entry["normal"], dim=dim), float(entry["offset"])))
    if kind == "halfspace":
        _require_keys(entry, {"normal", "offset"})
        return ConvexSet.from_operator(catalog.halfspace_projector(
            as_signal(entry["normal"], dim=dim), float(entry["offset"])))
    if kind == "box":
        _require_keys(entry, {"lo", "hi"})
        return ConvexSet.from_operator(catalog.box_projector(entry["lo"], entry["hi"]))
    if kind == "ball":
        _require_keys(entry, {"radius"}, optional={"center"})
        center = entry.get("center")
        if center is not None:
            center = as_signal(center, dim=dim)
        return ConvexSet.from_operator(catalog.ball_projector(float(entry["radius"]),
                                                              center))
    if kind == "tv_ball":
        _require_keys(entry, {"gamma"})
        return ConvexSet.from_operator(catalog.tv_ball_operator(float(entry["gamma"])))
    if kind == "soft_threshold_prescription":
        _require_keys(entry, {"omega", "p"})
        omega = catalog.Interval.symmetric(float(entry["omega"]))
        op = Operator(lambda x: catalog.soft_threshold(x, omega),
                      Regularity.FIRMLY_NONEXPANSIVE,
                      f"soft threshold (omega={entry['omega']})")
        return Prescription(F=op, p=as_signal(entry["p"], dim=dim))
    if kind == "clip_prescription":
        _require_keys(entry, {"lo", "hi", "p"})
        interval = catalog.Interval(float(entry["lo"]), float(entry["hi"]))
        op = Operator(lambda x: catalog.hard_clip(x, interval),
                      Regularity.FIRMLY_NONEXPANSIVE,
                      f"hard clip [{entry['lo']}, {entry['hi']}]")
        return Prescription(F=op, p=as_signal(entry["p"], dim=dim))
    if kind == "isotonic_observation":
        _require_keys(entry, {"dictionary", "q"})
        matrix = np.asarray(entry["dictionary"], dtype=float)
        if matrix.ndim != 2 or matrix.shape[1] != dim:
            raise ConfigError("dictionary must be a matrix with one row per "
                              "coefficient and dim columns")
        lin = LinearMap.from_matrix(matrix)
        iso = Operator(catalog.isotonic_projection, Regularity.FIRMLY_NONEXPANSIVE,
                       "isotonic projection")
        presc = catalog.cocoercive_aggregate([catalog.ObservationSpec(
            L=lin, Q=iso, beta=1.0, q=as_signal(entry["q"], dim=matrix.shape[0]))])
        return Prescription(F=presc.F, p=presc.p)
    if kind == "hard_distance_observation":
        _require_keys(entry, {"radius", "omega", "q"})
        ball = catalog.ball_projector(float(entry["radius"]))
        presc = catalog.equivalent_prescription_from_hard(
            as_signal(entry["q"], dim=dim), ball, float(entry["omega"]),
            descriptor=f"ball(r={entry['radius']})")
        return Prescription(F=presc.F, p=presc.p)
    raise ConfigError(f"unknown constraint kind {kind!r}")


_SOLVE_KEYS = {"x0", "constraints", "affine_ids", "always_active", "block_size",
               "epsilon", "max_iter", "theta_tol", "step_tol", "output_dir"}


def _load_solve_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("solve config must be a JSON object")
    unknown = set(data) - _SOLVE_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "x0" not in data or "constraints" not in data:
        raise ConfigError("solve config requires 'x0' and 'constraints'")
    return data


def _cmd_solve(args) -> int:
    data = _load_solve_config(args.config)
    raw_x0 = data["x0"]
    if isinstance(raw_x0, dict):
        if set(raw_x0) != {"zeros"}:
            raise ConfigError("x0 object form must be {\"zeros\": dim}")
        x0 = np.zeros(int(raw_x0["zeros"]))
    else:
        x0 = as_signal(raw_x0)
    dim = x0.shape[0]
    constraints = tuple(_build_constraint(entry, dim) for entry in data["constraints"])
    affine_ids = tuple(int(i) for i in data.get("affine_ids", ()))
    always = tuple(int(i) for i in data.get("always_active", ()))
    try:
        problem = Problem(x0=x0, constraints=constraints, affine_ids=affine_ids)
        schedule = schedule_round_robin(len(constraints), affine_ids=affine_ids,
                                        block_size=int(data.get("block_size", 1)),
                                        always_active=always)
        control = ControlConfig(schedule=schedule,
                                epsilon=float(data.get("epsilon", 0.01)),
                                max_iter=int(data.get("max_iter", 100_000)),
                                theta_tol=float(data.get("theta_tol", 1e-12)),
                                step_tol=float(data.get("step_tol", 1e-9)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    x, trace = solve(problem, control)
    out_dir = Path(args.out or data.get("output_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    write_solution_csv(x, out_dir / "solution_solve.csv")
    rows = [TraceRow(n=r.n, variant="solve", theta=r.theta, lam=r.lam,
                     step_norm=r.step_norm, normalized_error=None)
            for r in trace.records]
    emit_csv(rows, out_dir / "trace_solve.csv")

    print(f"status: {trace.status.value} after {len(trace.records)} iterations")
    if trace.residuals is not None:
        for i, res in enumerate(trace.residuals):
            print(f"constraint {i}: residual {res:.6e}")
    print(f"solution written to {out_dir / 'solution_solve.csv'}")
    if trace.status is SolveStatus.INFEASIBLE:
        print("halfspace intersection became empty; problem is likely infeasible",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_demo(args) -> int:
    base = dict(ExperimentConfig.desk().__dict__ if args.scale == "desk"
                else ExperimentConfig.full().__dict__)
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        base.update(data)
    if args.variant:
        base["variant"] = args.variant
    if args.seed is not None:
        base["seed"] = args.seed
    if args.iters is not None:
        base["iters"] = args.iters
    if args.out:
        base["output_dir"] = args.out
    env_seed = os.environ.get("PROXPOINT_SEED")
    if env_seed is not None:
        base["seed"] = int(env_seed)
    try:
        config = ExperimentConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    result = run_experiment(config)
    print(f"scale: n={config.n} b={config.b} k={config.k} "
          f"block_dim={config.block_dim} seed={config.seed}")
    print(f"tv bound gamma = {result.gamma:.6e}")
    for variant, x in result.solutions.items():
        err = result.rows[variant][-1].normalized_error
        print(f"{variant}: normalized error {err:.6e} at iteration "
              f"{result.rows[variant][-1].n}")
        for name, path in result.csv_paths[variant].items():
            print(f"{variant} {name}: {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Property suites for `check`
# ---------------------------------------------------------------------------

def _check_fne_suite(trials: int, seed: int) -> list:
    results = []
    for op, dim in catalog.firmly_nonexpansive_suite(dim=8, seed=seed):
        report = check_firmly_nonexpansive(op, dim=dim, trials=trials, seed=seed)
        results.append((f"firmly nonexpansive: {op.descriptor}", report.passed,
                        f"worst violation {report.worst_violation:.3e}"))
    # Negative controls must be rejected.
    hard = Operator(lambda x: catalog.hard_threshold(x, 1.0), Regularity.GENERAL,
                    "hard threshold")
    report = check_firmly_nonexpansive(hard, dim=1, trials=trials, seed=seed)
    results.append(("negative control rejected: hard threshold", not report.passed,
                    f"worst violation {report.worst_violation:.3e}"))
    doubling = Operator(lambda x: 2.0 * x, Regularity.GENERAL, "doubling")
    report = check_firmly_nonexpansive(doubling, dim=4, trials=trials, seed=seed)
    results.append(("negative control rejected: doubling map", not report.passed,
                    f"worst violation {report.worst_violation:.3e}"))
    return results


def _check_q_operator(cases: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        dim = int(rng.integers(2, 6))
        x0 = rng.standard_normal(dim)
        s = rng.standard_normal(dim)
        t = rng.standard_normal(dim)
        point, _ = q_operator(x0, s, t)
        oracle = halfspace_pair_projection_oracle(x0, s, t)
        worst = max(worst, float(np.linalg.norm(point - oracle)))
    return [("closed-form halfspace projection matches KKT oracle", worst <= 1e-9,
             f"worst deviation {worst:.3e} over {cases} cases")]


def _check_isotonic(cases: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    ok = True
    detail = ""
    for _ in range(cases):
        dim = int(rng.integers(1, 9))
        v = rng.integers(-2, 3, size=dim).astype(float)
        out = catalog.isotonic_projection(v)
        if np.any(np.diff(out) < -1e-12):
            ok, detail = False, "output not monotone"
            break
        # Optimality: <v - out, z - out> <= 0 for monotone z.
        for _ in range(20):
            z = np.sort(rng.standard_normal(dim))
            if float(np.dot(v - out, z - out)) > 1e-9:
                ok, detail = False, "variational inequality violated"
                break
        if not ok:
            break
    return [("isotonic projection is the monotone-cone projection", ok,
             detail or f"{cases} cases")]


def _check_equivalences(seed: int) -> list:
    grid = np.linspace(-6.0, 6.0, 1000)
    omega = 1.3
    soft = catalog.soft_threshold(grid, catalog.Interval.symmetric(omega))
    via_sqrt = catalog.sqrt_sampler_transform(catalog.sqrt_sampler(grid, omega), omega)
    via_hard = catalog.hard_threshold_transform(catalog.hard_threshold(grid, omega), omega)
    err = max(float(np.max(np.abs(via_sqrt - soft))),
              float(np.max(np.abs(via_hard - soft))))
    return [("lossless transforms reproduce the soft thresholder", err <= 1e-12,
             f"max grid error {err:.3e}")]


def _check_class_t(trials: int, seed: int) -> list:
    gamma = 2.0
    op = catalog.tv_ball_operator(gamma)
    fixed = [np.zeros(6), np.full(6, 0.4)]
    report = check_class_t(op, fixed, dim=6, trials=trials, seed=seed)
    return [("tv-ball subgradient projector is firmly quasinonexpansive",
             report.passed, f"worst violation {report.worst_violation:.3e}")]


def _cmd_check(args) -> int:
    checks = []
    checks += _check_fne_suite(args.trials, args.seed)
    checks += _check_q_operator(min(args.trials, 500), args.seed)
    checks += _check_isotonic(min(args.trials, 200), args.seed)
    checks += _check_equivalences(args.seed)
    checks += _check_class_t(min(args.trials, 1000), args.seed)
    failed = 0
    for name, passed, detail in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name} ({detail})")
        failed += 0 if passed else 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proxpoint",
        description="Best approximation under convex constraints and "
                    "prescribed proximal points.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a problem described in JSON")
    p_solve.add_argument("--config", required=True, help="path to the JSON problem")
    p_solve.add_argument("--out", default=None, help="output directory")

    p_demo = sub.add_parser("demo", help="run the signal-recovery experiment")
    p_demo.add_argument("--scale", choices=("desk", "full"), default="desk")
    p_demo.add_argument("--variant", choices=("affine", "plain", "both"),
                        default=None)
    p_demo.add_argument("--seed", type=int, default=None)
    p_demo.add_argument("--iters", type=int, default=None)
    p_demo.add_argument("--out", default=None, help="output directory")
    p_demo.add_argument("--config", default=None,
                        help="JSON file mirroring the experiment config fields")

    p_check = sub.add_parser("check", help="run the randomized property suites")
    p_check.add_argument("--trials", type=int, default=2000)
    p_check.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "demo":
            return _cmd_demo(args)
        return _cmd_check(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleHalfspacesError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
