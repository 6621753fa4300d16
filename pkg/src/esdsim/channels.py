"""Amplitude damping on a purification qubit, gate/readout noise, and mitigation."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import acos, asin, exp, sqrt
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import nnls

from . import gates as G
from .errors import (
    BadDistribution,
    BadProbability,
    LabelMismatch,
    NegativeTime,
    SingularCalibration,
    ZeroShots,
)
from .simcore import (
    CountsHistogram,
    DensityMatrix,
    State,
    StateVector,
    _axis,
    _apply_op,
    _check_targets,
    apply_unitary,
    bitstrings,
)


@dataclass(frozen=True)
class DampingParams:
    gamma_t: float
    eta: float
    zeta: float
    theta: float

    @property
    def rotation_angle(self) -> float:
        """Controlled-RY angle that splits |1_s 0_e> into (eta, zeta); equals pi - 2*theta."""
        return 2 * acos(min(1.0, self.eta))


def damping_params(gamma_t: float) -> DampingParams:
    if not gamma_t >= 0:
        raise NegativeTime(f"gamma_t must be >= 0, got {gamma_t}")
    eta = exp(-gamma_t / 2)
    zeta = sqrt(-np.expm1(-gamma_t))
    return DampingParams(float(gamma_t), eta, zeta, asin(eta))


def build_damping_circuit(
    p: DampingParams, sys_qubit: int, env_qubit: int, n_qubits: int | None = None
) -> G.Circuit:
    """Isometry |0_s0_e> -> |0_s0_e>, |1_s0_e> -> eta|1_s0_e> + zeta|0_s1_e>.

    Controlled-RY (system controls environment) followed by CX back from the
    environment onto the system.
    """
    if n_qubits is None:
        n_qubits = max(sys_qubit, env_qubit) + 1
    ops = G.controlled_ry_ops(p.rotation_angle, sys_qubit, env_qubit)
    ops.append(G.cx(env_qubit, sys_qubit))
    return G.Circuit(n_qubits, tuple(ops))


def amplitude_damping_kraus(decay: float) -> tuple[np.ndarray, np.ndarray]:
    """Kraus pair of single-qubit amplitude damping with decay probability ``decay``."""
    k0 = np.array([[1, 0], [0, sqrt(1 - decay)]], dtype=complex)
    k1 = np.array([[0, sqrt(decay)], [0, 0]], dtype=complex)
    return k0, k1


def apply_kraus(rho: DensityMatrix, kraus: Sequence[np.ndarray], targets: Sequence[int]) -> DensityMatrix:
    n = rho.n_qubits
    targets = _check_targets(targets, n)
    t = rho.rho.reshape([2] * (2 * n))
    row_axes = [_axis(q, n) for q in targets]
    col_axes = [n + a for a in row_axes]
    out = np.zeros_like(t)
    for k in kraus:
        out += _apply_op(_apply_op(t, k, row_axes), k.conj(), col_axes)
    return DensityMatrix(n, out.reshape(2**n, 2**n))


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing gate noise plus independent per-qubit readout flips.

    ``readout`` is (P(read 1 | 0), P(read 0 | 1)) for every qubit not listed in
    ``readout_overrides`` (keyed by circuit qubit index).
    """

    p1: float = 0.001
    p2: float = 0.01
    readout: tuple[float, float] = (0.02, 0.03)
    readout_overrides: Mapping[int, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise BadProbability(f"{name}={v} outside [0, 1]")
        object.__setattr__(self, "readout", tuple(float(v) for v in self.readout))
        overrides = {int(q): tuple(float(v) for v in flips) for q, flips in self.readout_overrides.items()}
        object.__setattr__(self, "readout_overrides", overrides)
        for flips in [self.readout, *overrides.values()]:
            if len(flips) != 2 or not all(0 <= v <= 1 for v in flips):
                raise BadProbability(f"readout flips {flips} must be two probabilities")

    @classmethod
    def noiseless(cls) -> NoiseModel:
        return cls(0.0, 0.0, (0.0, 0.0))

    @classmethod
    def readout_only(cls, p01: float = 0.02, p10: float = 0.03) -> NoiseModel:
        return cls(0.0, 0.0, (p01, p10))

    def confusion(self, qubit: int) -> np.ndarray:
        """Row-stochastic [[P(0|0), P(1|0)], [P(0|1), P(1|1)]]."""
        p01, p10 = self.readout_overrides.get(qubit, self.readout)
        return np.array([[1 - p01, p01], [p10, 1 - p10]])

    def to_dict(self) -> dict:
        d = {"p1": self.p1, "p2": self.p2, "readout": list(self.readout)}
        if self.readout_overrides:
            d["readout_overrides"] = {q: list(v) for q, v in sorted(self.readout_overrides.items())}
        return d


def apply_depolarizing(rho: DensityMatrix, qubits: Sequence[int], p: float) -> DensityMatrix:
    """rho -> (1-p) rho + p * mean over the 4^k Pauli conjugations on ``qubits``."""
    if not 0 <= p <= 1:
        raise BadProbability(f"p={p} outside [0, 1]")
    qubits = _check_targets(qubits, rho.n_qubits)
    if p == 0:
        return rho
    n = rho.n_qubits
    t = rho.rho.reshape([2] * (2 * n))
    row_axes = [_axis(q, n) for q in qubits]
    col_axes = [n + a for a in row_axes]
    # averaging over all Paulis on a qubit == replacing it by I/2 (partial trace twirl)
    mixed = t
    for r, c in zip(row_axes, col_axes):
        traced = np.trace(mixed, axis1=r, axis2=c)
        mixed = np.multiply.outer(traced, np.eye(2) / 2)
        # outer appends (row, col) at the end; move them back
        mixed = np.moveaxis(mixed, [-2, -1], [r, c])
    out = (1 - p) * t + p * mixed
    return DensityMatrix(n, out.reshape(2**n, 2**n))


def simulate(circuit: G.Circuit, noise: NoiseModel | None = None, initial: State | None = None) -> State:
    """Run a circuit from |0...0> (or ``initial``).

    State-vector engine when ``noise`` is None; otherwise the density-matrix
    engine with depolarizing noise after every gate.
    """
    n = circuit.n_qubits
    if noise is None:
        state = initial if initial is not None else StateVector.zeros(n)
        for g in circuit.ops:
            state = apply_unitary(state, G.gate_matrix(g), g.targets)
        return state
    state = initial if initial is not None else DensityMatrix.zeros(n)
    if isinstance(state, StateVector):
        state = state.to_density_matrix()
    for g in circuit.ops:
        state = apply_unitary(state, G.gate_matrix(g), g.targets)
        p = noise.p2 if len(g.targets) == 2 else noise.p1
        state = apply_depolarizing(state, g.targets, p)
    return state


def readout_matrix(noise: NoiseModel, measured: Sequence[int]) -> np.ndarray:
    """Column-stochastic true->observed map; ``measured[0]`` is the leading bit."""
    a = np.ones((1, 1))
    for q in measured:
        a = np.kron(a, noise.confusion(q).T)
    return a


def dist_to_vector(dist: Mapping[str, float], k: int) -> np.ndarray:
    v = np.zeros(2**k)
    for key, p in dist.items():
        if len(key) != k:
            raise LabelMismatch(f"outcome {key!r} has length != {k}")
        v[int(key, 2)] = p
    return v


def vector_to_dist(v: np.ndarray) -> dict[str, float]:
    k = int(np.log2(len(v)))
    return {key: float(p) for key, p in zip(bitstrings(k), v)}


def apply_readout_noise(
    counts_probabilities: Mapping[str, float], noise: NoiseModel, measured: Sequence[int]
) -> dict[str, float]:
    v = dist_to_vector(counts_probabilities, len(measured))
    if np.any(v < -1e-12) or abs(v.sum() - 1) > 1e-9:
        raise BadDistribution("input must be a probability distribution")
    return vector_to_dist(readout_matrix(noise, measured) @ v)


@dataclass(frozen=True)
class CalibrationMatrix:
    measured_qubits: tuple
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        k = len(self.measured_qubits)
        if a.shape != (2**k, 2**k):
            raise LabelMismatch(f"calibration shape {a.shape} does not match {k} qubits")
        if np.any(a < 0) or np.any(a > 1) or np.max(np.abs(a.sum(axis=0) - 1)) > 1e-9:
            raise BadDistribution("calibration columns must be probability distributions")
        a.setflags(write=False)
        object.__setattr__(self, "measured_qubits", tuple(self.measured_qubits))
        object.__setattr__(self, "a", a)


def build_calibration(
    noise: NoiseModel, measured: Sequence[int], shots: int | None, seed: int | np.random.Generator = 0
) -> CalibrationMatrix:
    """Prepare each basis state, read it out through ``noise``, record the column.

    Preparations are ideal; only readout errors enter.  ``shots=None`` returns
    the exact confusion matrix.
    """
    exact = readout_matrix(noise, measured)
    if shots is None:
        return CalibrationMatrix(tuple(measured), exact)
    if shots < 1:
        raise ZeroShots(f"shots must be >= 1, got {shots}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    cols = [rng.multinomial(shots, col / col.sum()) / shots for col in exact.T]
    return CalibrationMatrix(tuple(measured), np.array(cols).T)


def mitigate(counts: CountsHistogram | Mapping[str, float], cal: CalibrationMatrix) -> dict[str, float]:
    """Nonnegative least-squares inversion of the calibration, renormalized."""
    k = len(cal.measured_qubits)
    if isinstance(counts, CountsHistogram):
        if tuple(counts.bit_labels) != cal.measured_qubits:
            raise LabelMismatch(f"counts over {counts.bit_labels}, calibration over {cal.measured_qubits}")
        observed = dist_to_vector(counts.frequencies(), k)
    else:
        observed = dist_to_vector(counts, k)
    if np.linalg.cond(cal.a) > 1e10:
        raise SingularCalibration("calibration matrix is numerically rank-deficient")
    x, _ = nnls(cal.a, observed)
    total = x.sum()
    if total <= 0:
        raise BadDistribution("mitigated distribution is empty")
    return vector_to_dist(x / total)

