"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage/config error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import gates as G
from .channels import NoiseModel, damping_params
from .config import ConfigError, load_plan, parse_alpha, parse_grid_spec, parse_noise, resolved_config
from .entanglement import InitialState, concurrence_env_closed, concurrence_system_closed, esb_time, esd_time
from .errors import SimulationError
from .output import (
    ANALYTIC_COLUMNS,
    SERIES_COLUMNS,
    CSVFormatError,
    read_csv,
    write_analytic_csv,
    write_diagnostic_csv,
    write_json,
    write_series_csv,
)
from .protocol import (
    CALIBRATION_GRID_INDEX,
    ancilla_population_diagnostic,
    derive_seed,
    parallel_sets_run,
)
from .svgplot import ENV_COLOR, SYSTEM_COLOR, Curve, Figure, PointSeries, render

log = logging.getLogger("esdsim")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SEED_RULE = "splitmix64 fold: h=sm(seed); h=sm(h^v) for v in (repetition, grid_index, target_code, set_index)"
DIAGNOSE_KEYS = {"noise", "shots", "seed"}
DIAGNOSE_LAMBDAS = tuple(round(0.05 * k, 2) for k in range(1, 20))


def _times(init: InitialState) -> dict:
    td, tb = esd_time(init), esb_time(init)
    return {"t_d": "none" if td is None else td, "t_b": "none" if tb is None else tb}


def cmd_run(args) -> int:
    plan = load_plan(
        args.config,
        seed=args.seed,
        max_sets=args.sets,
        mitigation=False if args.no_mitigation else None,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = parallel_sets_run([(cfg, cfg.layout) for cfg in plan.configs])

    manifest = {"seed_rule": SEED_RULE, "sets": []}
    for set_index, (name, cfg, series) in enumerate(zip(plan.names, plan.configs, results)):
        path = out / f"{name}.csv"
        write_series_csv(path, series)
        n_reps = 1 if cfg.exact else cfg.repetitions
        seeds = {
            target: [[derive_seed(cfg.seed, r, gi, target, set_index) for r in range(n_reps)] for gi in range(len(cfg.grid))]
            for target in cfg.targets
        }
        if cfg.mitigation:
            seeds["calibration"] = [
                derive_seed(cfg.seed, r, CALIBRATION_GRID_INDEX, "calibration", set_index) for r in range(n_reps)
            ]
        entry = resolved_config(name, cfg)
        entry.update({"set_index": set_index, "csv": path.name, "seeds": seeds, **_times(cfg.init)})
        manifest["sets"].append(entry)
        log.info("wrote %s", path)
    write_json(out / "manifest.json", manifest)
    print(f"wrote {len(results)} series to {out}")
    return EXIT_OK


def cmd_analytic(args) -> int:
    if args.lam is not None:
        init = InitialState(float(args.lam))
    else:
        init = InitialState.from_alpha(parse_alpha(args.alpha))
    grid = parse_grid_spec(args.grid)
    c_sys, c_env = [], []
    for gt in grid:
        p = damping_params(gt)
        c_sys.append(concurrence_system_closed(init, p))
        c_env.append(concurrence_env_closed(init, p))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_analytic_csv(out, grid, c_sys, c_env)
    times = _times(init)
    write_json(
        out.with_suffix(".manifest.json"),
        {"alpha": init.alpha, "lambda": init.lam, "grid": list(grid), "csv": out.name, **times},
    )
    print(f"t_d = {times['t_d']}  t_b = {times['t_b']}")
    return EXIT_OK


def cmd_plot(args) -> int:
    fig = Figure(title=args.title or "")
    for path in args.csv:
        cols = read_csv(path, SERIES_COLUMNS)
        stem = Path(path).stem
        for key, color, label in (("c_sys", SYSTEM_COLOR, "system"), ("c_env", ENV_COLOR, "environment")):
            mean = cols[f"{key}_mean"]
            if np.all(np.isnan(mean)):
                continue
            fig.points.append(PointSeries(cols["gamma_t"], mean, cols[f"{key}_stderr"], color, f"{stem} {label}"))
    if args.analytic:
        cols = read_csv(args.analytic, ANALYTIC_COLUMNS)
        fig.curves.append(Curve(cols["gamma_t"], cols["c_sys"], SYSTEM_COLOR, "theory system"))
        fig.curves.append(Curve(cols["gamma_t"], cols["c_env"], ENV_COLOR, "theory environment"))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(render(fig), encoding="utf-8", newline="")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    noise, shots, seed = NoiseModel(), None, 0
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            try:
                data = yaml.safe_load(fh) or {}
            except yaml.YAMLError as exc:
                raise ConfigError(f"invalid YAML: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config root must be a mapping")
        for key in data:
            if key not in DIAGNOSE_KEYS:
                raise ConfigError(f"unknown key {key!r}", str(key))
        noise = parse_noise(data.get("noise"))
        shots = data.get("shots")
        seed = int(data.get("seed", 0))
    if args.seed is not None:
        seed = args.seed
    lambdas = [f * math.pi for f in DIAGNOSE_LAMBDAS]
    rows = ancilla_population_diagnostic(lambdas, noise, shots=None if shots is None else int(shots), seed=seed)
    rows = [(f, p0) for f, (_, p0) in zip(DIAGNOSE_LAMBDAS, rows)]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_diagnostic_csv(out, rows)
    for f, p0 in rows:
        print(f"lambda/pi={f:.2f}  P0={p0:.6f}")
    return EXIT_OK


def transpile_check(seed: int, n_circuits: int, max_qubits: int = 5, max_gates: int = 20) -> list[tuple[int, bool]]:
    """Per-circuit (child seed, passed) for seeded random routed circuits."""
    results = []
    for i in range(n_circuits):
        child = derive_seed(seed, 0, i, "system")
        rng = np.random.default_rng(child)
        n = int(rng.integers(1, max_qubits + 1))
        c = G.random_circuit(rng, n, int(rng.integers(0, max_gates + 1)))
        t = G.transpile_to_basis(c)
        ok = all(g.kind in G.BASIS_GATES for g in t.ops) and G.unitary_equal_up_to_phase(
            G.circuit_unitary(t), G.circuit_unitary(c)
        )
        results.append((child, ok))
    return results


def cmd_transpile_check(args) -> int:
    if args.n < 1:
        print("n must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    results = transpile_check(args.seed, args.n)
    failed = [s for s, ok in results if not ok]
    print(f"{'circuit':>7}  {'seed':>20}  result")
    for i, (s, ok) in enumerate(results):
        if args.verbose or not ok:
            print(f"{i:>7}  {s:>20}  {'pass' if ok else 'FAIL'}")
    ecr_ok = G.invariants_close(
        G.local_equivalence_invariants(G.gate_matrix(G.ecr(0, 1))),
        G.local_equivalence_invariants(G.gate_matrix(G.cx(0, 1))),
    )
    print(f"{len(results) - len(failed)}/{len(results)} circuits equal up to phase; ECR ~ CX: {ecr_ok}")
    for s in failed:
        print(f"failing circuit seed: {s}", file=sys.stderr)
    return EXIT_OK if not failed and ecr_ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esdsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the configured experiments and write CSVs + manifest")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--sets", type=int, help="only run the first N sets")
    p.add_argument("--no-mitigation", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analytic", help="closed-form concurrence curves and ESD/ESB times")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--alpha", help="e.g. 1/sqrt(3)")
    g.add_argument("--lambda", dest="lam", type=float, help="preparation angle in radians")
    p.add_argument("--grid", default="0:3:16", help="min:max:points")
    p.add_argument("--out", required=True, help="CSV path; manifest goes next to it")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("plot", help="SVG figure from series and analytic CSVs")
    p.add_argument("csv", nargs="+")
    p.add_argument("--analytic")
    p.add_argument("--title")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("diagnose", help="ancilla ground-state population after preparation")
    p.add_argument("--config", help="YAML with optional noise/shots/seed; default noise model if omitted")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("transpile-check", help="verify the basis transpiler on random circuits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=200)
    p.set_defaults(func=cmd_transpile_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (SimulationError, CSVFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
