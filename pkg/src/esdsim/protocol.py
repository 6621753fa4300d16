"""Five-qubit ESD/ESB experiment: circuits, repetitions, aggregation.

Circuits are simulated on five local qubits laid out as a chain

    0: env0   1: sys0   2: ancilla   3: sys1   4: env1

and a :class:`QubitLayout` maps those roles onto physical device indices.
Physical indices only matter for per-qubit readout errors and bookkeeping.

Per-task seeds come from :func:`derive_seed`, a splitmix64 fold of
(master seed, repetition, grid index, target code, set index).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import gates as G
from .channels import (
    NoiseModel,
    build_calibration,
    build_damping_circuit,
    damping_params,
    mitigate,
    readout_matrix,
    simulate,
    vector_to_dist,
)
from .entanglement import (
    InitialState,
    STUDY_ALPHAS,
    analytic_rho_env,
    analytic_rho_s,
    concurrence_env_closed,
    concurrence_from_counts,
    concurrence_system_closed,
)
from .errors import OverlappingLayouts
from .simcore import StateVector, probabilities, sample_distribution

ENV0, SYS0, ANCILLA, SYS1, ENV1 = range(5)
N_QUBITS = 5
MEASURED = (SYS0, ANCILLA, SYS1)
ROLES = ("env0", "sys0", "ancilla", "sys1", "env1")
TARGETS = ("system", "environment")
TARGET_CODES = {"system": 1, "environment": 2, "calibration": 3}
CALIBRATION_GRID_INDEX = 0xFFFF
ZERO_THRESHOLD = 0.01

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, repetition: int, grid_index: int, target: str, set_index: int = 0) -> int:
    """h = sm(master); then h = sm(h ^ v) for v in (repetition, grid_index, code, set_index)."""
    h = _splitmix64(int(master) & _MASK64)
    for v in (repetition, grid_index, TARGET_CODES[target], set_index):
        h = _splitmix64(h ^ (int(v) & _MASK64))
    return h


@dataclass(frozen=True)
class QubitLayout:
    env0: int = 0
    sys0: int = 1
    ancilla: int = 2
    sys1: int = 3
    env1: int = 4

    def __post_init__(self):
        chain = self.physical()
        if len(set(chain)) != 5:
            raise ValueError(f"layout indices must be distinct, got {chain}")
        steps = {b - a for a, b in zip(chain, chain[1:])}
        if steps not in ({1}, {-1}):
            raise ValueError(f"layout {chain} is not a consecutive env0-sys0-ancilla-sys1-env1 chain")

    @classmethod
    def from_chain(cls, qubits: Sequence[int]) -> QubitLayout:
        return cls(*[int(q) for q in qubits])

    def physical(self) -> tuple[int, ...]:
        return (self.env0, self.sys0, self.ancilla, self.sys1, self.env1)

    def measured(self) -> tuple[int, int, int]:
        return (self.sys0, self.ancilla, self.sys1)


# three disjoint linear sets on the 127-qubit device
DEVICE_SETS = (
    QubitLayout.from_chain(range(0, 5)),
    QubitLayout.from_chain(range(6, 11)),
    QubitLayout.from_chain(range(27, 32)),
)
# set assignment for (1/sqrt2, 1/sqrt3, 1/sqrt5): main run and its two cyclic shifts
SET_PERMUTATIONS = {"main": (0, 1, 2), "shift1": (1, 2, 0), "shift2": (2, 0, 1)}


def default_grid(points: int = 16, lo: float = 0.0, hi: float = 3.0) -> tuple[float, ...]:
    return tuple(float(v) for v in np.linspace(lo, hi, points))


@dataclass(frozen=True)
class ExperimentConfig:
    init: InitialState
    grid: tuple[float, ...] = field(default_factory=default_grid)
    shots: int = 20000
    repetitions: int = 10
    seed: int = 0
    noise: NoiseModel | None = None
    mitigation: bool = False
    layout: QubitLayout = field(default_factory=QubitLayout)
    target: str = "both"
    # Born probabilities instead of sampled shots (one estimate per point, zero spread)
    exact: bool = False
    # move environment states with two CX per pair instead of a full SWAP
    reset_aware_swap: bool = False

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        object.__setattr__(self, "grid", grid)
        if not grid:
            raise ValueError("grid must be non-empty")
        if any(g < 0 for g in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid values must be >= 0 and strictly increasing")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.target not in ("system", "environment", "both"):
            raise ValueError(f"unknown target {self.target!r}")

    @property
    def targets(self) -> tuple[str, ...]:
        return TARGETS if self.target == "both" else (self.target,)


def build_prep_circuit(init: InitialState, layout: QubitLayout | None = None) -> G.Circuit:
    """sin(lam/2)|0 0> + cos(lam/2)|1 1> on (sys0, sys1), routed through the ancilla."""
    lam = init.lam
    return G.Circuit(
        N_QUBITS,
        (
            G.sx(SYS0),
            G.rz(lam, SYS0),
            G.sx(SYS0),
            G.cx(SYS0, ANCILLA),
            G.cx(ANCILLA, SYS1),
            G.cx(SYS1, ANCILLA),
        ),
    )


def build_evolution_circuit(gamma_t: float) -> G.Circuit:
    p = damping_params(gamma_t)
    left = build_damping_circuit(p, SYS0, ENV0, N_QUBITS)
    right = build_damping_circuit(p, SYS1, ENV1, N_QUBITS)
    return left + right


def build_witness_circuit(target: str, reset_aware_swap: bool = False) -> G.Circuit:
    ops: list[G.Gate] = []
    if target == "environment":
        if reset_aware_swap:
            # leaves the environment value on the system qubit and garbage on env, which is never read
            ops += [G.cx(SYS0, ENV0), G.cx(ENV0, SYS0), G.cx(SYS1, ENV1), G.cx(ENV1, SYS1)]
        else:
            ops += [G.swap(ENV0, SYS0), G.swap(SYS1, ENV1)]
    elif target != "system":
        raise ValueError(f"unknown target {target!r}")
    ops += [G.sx(ANCILLA), G.cx(ANCILLA, SYS0), G.cx(ANCILLA, SYS1), G.sx(ANCILLA)]
    return G.Circuit(N_QUBITS, tuple(ops))


def build_full_circuit(cfg: ExperimentConfig, gamma_t: float, target: str) -> G.Circuit:
    return (
        build_prep_circuit(cfg.init, cfg.layout)
        + build_evolution_circuit(gamma_t)
        + build_witness_circuit(target, cfg.reset_aware_swap)
    )


def _xx_on_system(psi: np.ndarray) -> np.ndarray:
    idx = np.arange(2**N_QUBITS) ^ ((1 << SYS0) | (1 << SYS1))
    return psi[idx]


def embed_xi(xi: StateVector, ancilla_bit: int = 0) -> np.ndarray:
    """Place a 4-qubit state on (env0, sys0, sys1, env1) with the ancilla set to ``ancilla_bit``."""
    if xi.n_qubits != 4:
        raise ValueError("xi must be a 4-qubit state")
    out = np.zeros(2**N_QUBITS, dtype=complex)
    roles = (ENV0, SYS0, SYS1, ENV1)
    for i, amp in enumerate(xi.amps):
        j = ancilla_bit << ANCILLA
        for k, q in enumerate(roles):
            j |= ((i >> k) & 1) << q
        out[j] = amp
    return out


def witness_expected_state(xi: StateVector) -> np.ndarray:
    """(1/2)[ i(xi - XX xi)|0>_a + (xi + XX xi)|1>_a ] with XX on the system pair."""
    x0 = embed_xi(xi, 0)
    x1 = embed_xi(xi, 1)
    return 0.5 * (1j * (x0 - _xx_on_system(x0)) + (x1 + _xx_on_system(x1)))


def witness_stage_check(output: StateVector, xi: StateVector, atol: float = 1e-10) -> bool:
    """True iff ``output`` equals the witness-stage form of ``xi`` up to global phase."""
    expected = witness_expected_state(xi)
    if output.n_qubits != N_QUBITS:
        return False
    return G.unitary_equal_up_to_phase(output.amps.reshape(-1, 1), expected.reshape(-1, 1), atol)


def analytic_target_matrix(init: InitialState, gamma_t: float, target: str) -> np.ndarray:
    p = damping_params(gamma_t)
    return analytic_rho_s(init, p) if target == "system" else analytic_rho_env(init, p)


def closed_form_concurrence(init: InitialState, gamma_t: float, target: str) -> float:
    p = damping_params(gamma_t)
    if target == "system":
        return concurrence_system_closed(init, p)
    return concurrence_env_closed(init, p)


def ideal_distribution(cfg: ExperimentConfig, gamma_t: float, target: str) -> np.ndarray:
    """Born distribution over (sys0, ancilla, sys1) before readout errors."""
    circuit = G.transpile_to_basis(build_full_circuit(cfg, gamma_t, target))
    state = simulate(circuit, cfg.noise)
    return probabilities(state, MEASURED)


@dataclass(frozen=True)
class TargetSeries:
    mean: np.ndarray
    stderr: np.ndarray
    raw: np.ndarray  # (grid, repetitions) clipped concurrence estimates
    p010: np.ndarray  # mean P(010) used by the estimator (after mitigation if enabled)


@dataclass(frozen=True)
class ConcurrenceSeries:
    gamma_t: tuple[float, ...]
    system: TargetSeries | None
    environment: TargetSeries | None
    mitigated: bool
    set_index: int = 0
    layout: QubitLayout = field(default_factory=QubitLayout)
    alpha: float = float("nan")

    def get(self, target: str) -> TargetSeries:
        series = self.system if target == "system" else self.environment
        if series is None:
            raise KeyError(f"no {target} series in this run")
        return series


def _aggregate(raw: np.ndarray, p010: np.ndarray) -> TargetSeries:
    n = raw.shape[1]
    stderr = raw.std(axis=1, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(raw.shape[0])
    return TargetSeries(raw.mean(axis=1), stderr, raw, p010.mean(axis=1))


def run_experiment(cfg: ExperimentConfig, set_index: int = 0) -> ConcurrenceSeries:
    measured = cfg.layout.measured()
    readout = readout_matrix(cfg.noise, measured) if cfg.noise is not None else None
    n_reps = 1 if cfg.exact else cfg.repetitions

    cals = []
    if cfg.mitigation:
        cal_noise = cfg.noise or NoiseModel.noiseless()
        for rep in range(n_reps):
            seed = derive_seed(cfg.seed, rep, CALIBRATION_GRID_INDEX, "calibration", set_index)
            cals.append(build_calibration(cal_noise, measured, None if cfg.exact else cfg.shots, seed))

    results = {}
    for target in cfg.targets:
        raw = np.zeros((len(cfg.grid), n_reps))
        p010 = np.zeros_like(raw)
        for gi, gt in enumerate(cfg.grid):
            dist = ideal_distribution(cfg, gt, target)
            if readout is not None:
                dist = readout @ dist
            for rep in range(n_reps):
                if cfg.exact:
                    observed = vector_to_dist(dist)
                else:
                    seed = derive_seed(cfg.seed, rep, gi, target, set_index)
                    observed = sample_distribution(dist, measured, cfg.shots, seed)
                if cfg.mitigation:
                    observed = mitigate(observed, cals[rep])
                if isinstance(observed, dict):
                    p010[gi, rep] = observed["010"]
                else:
                    p010[gi, rep] = observed.get("010") / observed.shots
                raw[gi, rep] = concurrence_from_counts(observed, shots=None if cfg.exact else cfg.shots)
        results[target] = _aggregate(raw, p010)
    return ConcurrenceSeries(
        cfg.grid,
        results.get("system"),
        results.get("environment"),
        cfg.mitigation,
        set_index,
        cfg.layout,
        cfg.init.alpha,
    )


def parallel_sets_run(configs: Sequence[tuple[ExperimentConfig, QubitLayout]]) -> list[ConcurrenceSeries]:
    """Run independent experiments on disjoint qubit sets; set index = list position."""
    seen: set[int] = set()
    for _, layout in configs:
        qubits = set(layout.physical())
        if qubits & seen:
            raise OverlappingLayouts(f"layout {layout.physical()} overlaps another set")
        seen |= qubits
    return [run_experiment(replace(cfg, layout=layout), i) for i, (cfg, layout) in enumerate(configs)]


def three_set_configs(
    permutation: str = "main", noise: NoiseModel | None = None, **overrides
) -> list[tuple[ExperimentConfig, QubitLayout]]:
    """The three simultaneous experiments (alpha = 1/sqrt2, 1/sqrt3, 1/sqrt5)."""
    sets = SET_PERMUTATIONS[permutation]
    out = []
    for alpha, set_id in zip(STUDY_ALPHAS, sets):
        cfg = ExperimentConfig(InitialState.from_alpha(alpha), noise=noise, **overrides)
        out.append((cfg, DEVICE_SETS[set_id]))
    return out


def ancilla_population_diagnostic(
    lambda_grid: Iterable[float],
    noise: NoiseModel | None,
    shots: int | None = None,
    seed: int = 0,
    layout: QubitLayout | None = None,
) -> list[tuple[float, float]]:
    """P(ancilla reads 0) after state preparation, per lambda.

    Includes the ancilla's readout error.  ``shots=None`` reports the exact
    probability; otherwise a seeded shot estimate.
    """
    layout = layout or QubitLayout()
    out = []
    for i, lam in enumerate(lambda_grid):
        circuit = G.transpile_to_basis(build_prep_circuit(InitialState(lam), layout))
        probs = probabilities(simulate(circuit, noise), [ANCILLA])
        if noise is not None:
            probs = readout_matrix(noise, [layout.ancilla]) @ probs
        if shots is None:
            p0 = float(probs[0])
        else:
            counts = sample_distribution(probs, [layout.ancilla], shots, derive_seed(seed, 0, i, "system"))
            p0 = counts.get("0") / shots
        out.append((lam / math.pi, p0))
    return out


def zero_crossing(gamma_t: Sequence[float], means: Sequence[float], threshold: float = ZERO_THRESHOLD) -> float | None:
    """First grid point where the series is below ``threshold`` and stays there at the next point."""
    m = list(means)
    for i, v in enumerate(m):
        if v < threshold and (i + 1 == len(m) or m[i + 1] < threshold):
            return float(gamma_t[i])
    return None


def onset(gamma_t: Sequence[float], means: Sequence[float], threshold: float = ZERO_THRESHOLD) -> float | None:
    """First grid point at or above ``threshold`` whose successor is too (birth estimator)."""
    m = list(means)
    for i, v in enumerate(m):
        if v >= threshold and (i + 1 == len(m) or m[i + 1] >= threshold):
            return float(gamma_t[i])
    return None


def closed_form_series(init: InitialState, grid: Sequence[float], target: str) -> np.ndarray:
    return np.array([closed_form_concurrence(init, gt, target) for gt in grid])
