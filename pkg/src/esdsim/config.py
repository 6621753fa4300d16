"""YAML run-config parsing with strict key checking.

Schema (every key optional unless noted)::

    shots: 20000
    repetitions: 10
    seed: 0
    mitigation: true
    target: both              # system | environment | both
    exact: false
    reset_aware_swap: false
    grid: {min: 0.0, max: 3.0, points: 16}     # or {values: [0.0, 0.5, ...]}
    noise:                    # omit or null for a noiseless run
      p1: 0.001
      p2: 0.01
      readout: [0.02, 0.03]   # P(read 1|0), P(read 0|1)
      readout_overrides: {27: [0.05, 0.08]}    # keyed by physical qubit
    alpha: 1/sqrt(2)          # single-set form; or lambda: <radians>
    qubits: [0, 1, 2, 3, 4]   # env0, sys0, ancilla, sys1, env1
    sets:                     # multi-set form (replaces alpha/lambda/qubits)
      - {name: set1, alpha: 1/sqrt(2), qubits: [0, 1, 2, 3, 4], noise: {...}}
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .channels import NoiseModel
from .entanglement import InitialState
from .errors import SimulationError
from .protocol import ExperimentConfig, QubitLayout, default_grid


class ConfigError(SimulationError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


TOP_KEYS = {
    "shots", "repetitions", "seed", "mitigation", "target", "exact", "reset_aware_swap",
    "grid", "noise", "alpha", "lambda", "qubits", "sets",
}
SET_KEYS = {"name", "alpha", "lambda", "qubits", "noise"}
GRID_KEYS = {"min", "max", "points", "values"}
NOISE_KEYS = {"p1", "p2", "readout", "readout_overrides"}

_ROOT = re.compile(r"^\s*1\s*/\s*sqrt\(\s*([0-9.]+)\s*\)\s*$")
_SQRT_FRAC = re.compile(r"^\s*sqrt\(\s*1\s*/\s*([0-9.]+)\s*\)\s*$")


def parse_alpha(spec: Any) -> float:
    """'1/sqrt(k)', 'sqrt(1/k)' or a plain number in [0, 1]."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        value = float(spec)
    elif isinstance(spec, str):
        m = _ROOT.match(spec) or _SQRT_FRAC.match(spec)
        try:
            value = 1 / math.sqrt(float(m.group(1))) if m else float(spec)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"cannot parse alpha {spec!r}", "alpha") from None
    else:
        raise ConfigError(f"cannot parse alpha {spec!r}", "alpha")
    if not 0 <= value <= 1 or not math.isfinite(value):
        raise ConfigError(f"alpha {spec!r} must lie in [0, 1]", "alpha")
    return value


def _reject_unknown(block: dict, allowed: set, where: str) -> None:
    for key in block:
        if key not in allowed:
            name = f"{where}.{key}" if where else str(key)
            raise ConfigError(f"unknown key {name!r}", name)


def parse_grid(block: Any) -> tuple[float, ...]:
    if block is None:
        return default_grid()
    if not isinstance(block, dict):
        raise ConfigError("grid must be a mapping", "grid")
    _reject_unknown(block, GRID_KEYS, "grid")
    if "values" in block:
        values = [float(v) for v in block["values"] or []]
    else:
        points = int(block.get("points", 16))
        if points < 1:
            raise ConfigError("grid must be non-empty", "grid.points")
        lo, hi = float(block.get("min", 0.0)), float(block.get("max", 3.0))
        values = [lo] if points == 1 else list(np.linspace(lo, hi, points))
    if not values:
        raise ConfigError("grid must be non-empty", "grid")
    if any(v < 0 for v in values) or any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("grid values must be >= 0 and strictly increasing", "grid")
    return tuple(float(v) for v in values)


def parse_grid_spec(spec: str) -> tuple[float, ...]:
    """'min:max:points' command-line form."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid spec {spec!r} must be min:max:points", "grid")
    try:
        return parse_grid({"min": float(parts[0]), "max": float(parts[1]), "points": int(parts[2])})
    except ValueError:
        raise ConfigError(f"grid spec {spec!r} must be min:max:points", "grid") from None


def parse_noise(block: Any, where: str = "noise") -> NoiseModel | None:
    if block is None:
        return None
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be a mapping or null", where)
    _reject_unknown(block, NOISE_KEYS, where)
    defaults = NoiseModel()
    try:
        return NoiseModel(
            p1=float(block.get("p1", defaults.p1)),
            p2=float(block.get("p2", defaults.p2)),
            readout=tuple(block.get("readout", defaults.readout)),
            readout_overrides={int(k): tuple(v) for k, v in (block.get("readout_overrides") or {}).items()},
        )
    except (SimulationError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad {where}: {exc}", where) from None


def _initial_state(block: dict, where: str) -> InitialState:
    if "alpha" in block and "lambda" in block:
        raise ConfigError(f"{where}: give alpha or lambda, not both", f"{where}lambda")
    if "lambda" in block:
        return InitialState(float(block["lambda"]))
    if "alpha" not in block:
        raise ConfigError(f"{where}: missing alpha", f"{where}alpha")
    return InitialState.from_alpha(parse_alpha(block["alpha"]))


def _layout(block: dict, where: str, default: QubitLayout) -> QubitLayout:
    if "qubits" not in block:
        return default
    try:
        return QubitLayout.from_chain(block["qubits"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}qubits: {exc}", f"{where}qubits") from None


@dataclass(frozen=True)
class RunPlan:
    names: tuple[str, ...]
    configs: tuple[ExperimentConfig, ...]
    raw: dict


def build_plan(data: Any, seed: int | None = None, max_sets: int | None = None, mitigation: bool | None = None) -> RunPlan:
    try:
        return _build_plan(data, seed, max_sets, mitigation)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _build_plan(data: Any, seed: int | None, max_sets: int | None, mitigation: bool | None) -> RunPlan:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    _reject_unknown(data, TOP_KEYS, "")
    grid = parse_grid(data.get("grid"))
    noise = parse_noise(data.get("noise"))
    common = dict(
        grid=grid,
        shots=int(data.get("shots", 20000)),
        repetitions=int(data.get("repetitions", 10)),
        seed=int(data.get("seed", 0) if seed is None else seed),
        mitigation=bool(data.get("mitigation", True) if mitigation is None else mitigation),
        target=str(data.get("target", "both")),
        exact=bool(data.get("exact", False)),
        reset_aware_swap=bool(data.get("reset_aware_swap", False)),
    )
    if common["shots"] < 1:
        raise ConfigError("shots must be >= 1", "shots")
    if common["repetitions"] < 1:
        raise ConfigError("repetitions must be >= 1", "repetitions")
    if common["target"] not in ("system", "environment", "both"):
        raise ConfigError("target must be system, environment or both", "target")

    if "sets" in data:
        for key in ("alpha", "lambda", "qubits"):
            if key in data:
                raise ConfigError(f"{key!r} is not allowed next to 'sets'", key)
        sets = data["sets"] or []
        if not isinstance(sets, list) or not sets:
            raise ConfigError("sets must be a non-empty list", "sets")
    else:
        sets = [{k: data[k] for k in ("alpha", "lambda", "qubits") if k in data}]

    names, configs = [], []
    for i, block in enumerate(sets):
        where = f"sets[{i}]." if "sets" in data else ""
        if not isinstance(block, dict):
            raise ConfigError(f"{where or 'set'} must be a mapping", where.rstrip(".") or "sets")
        _reject_unknown(block, SET_KEYS, where.rstrip("."))
        names.append(str(block.get("name", f"set{i + 1}")))
        set_noise = parse_noise(block["noise"], f"{where}noise") if "noise" in block else noise
        configs.append(
            ExperimentConfig(
                init=_initial_state(block, where),
                layout=_layout(block, where, QubitLayout()),
                noise=set_noise,
                **common,
            )
        )
    if len(set(names)) != len(names):
        raise ConfigError("set names must be unique", "sets")
    if max_sets is not None:
        if max_sets < 1:
            raise ConfigError("--sets must be >= 1", "sets")
        names, configs = names[:max_sets], configs[:max_sets]
    return RunPlan(tuple(names), tuple(configs), data)


def load_plan(path: str | Path, **overrides) -> RunPlan:
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML: {exc}") from None
    return build_plan(data, **overrides)


def resolved_config(name: str, cfg: ExperimentConfig) -> dict:
    """Plain-data echo of one resolved experiment for the manifest."""
    return {
        "name": name,
        "alpha": cfg.init.alpha,
        "lambda": cfg.init.lam,
        "qubits": list(cfg.layout.physical()),
        "grid": list(cfg.grid),
        "shots": cfg.shots,
        "repetitions": cfg.repetitions,
        "seed": cfg.seed,
        "mitigation": cfg.mitigation,
        "target": cfg.target,
        "exact": cfg.exact,
        "reset_aware_swap": cfg.reset_aware_swap,
        "noise": cfg.noise.to_dict() if cfg.noise is not None else None,
    }


DEFAULT_RUN_YAML = """\
# Three simultaneous experiments on disjoint qubit sets.
shots: 20000
repetitions: 10
seed: 2024
mitigation: true
target: both
grid: {min: 0.0, max: 3.0, points: 16}
noise:
  p1: 0.001
  p2: 0.01
  readout: [0.02, 0.03]
sets:
  - {name: set1, alpha: 1/sqrt(2), qubits: [0, 1, 2, 3, 4]}
  - {name: set2, alpha: 1/sqrt(3), qubits: [6, 7, 8, 9, 10]}
  - {name: set3, alpha: 1/sqrt(5), qubits: [27, 28, 29, 30, 31]}
"""
