"""Dense state-vector / density-matrix core for up to five qubits.

Endianness: qubit 0 is the least significant bit of a basis-state index, so
``|q4 q3 q2 q1 q0>`` has index ``sum(q_k << k)``.  A k-qubit operator acting on
``targets`` uses the same convention locally: ``targets[0]`` is bit 0 of the
operator's row/column index.

Measured bitstrings are written in the order the qubits were requested:
character ``j`` of an outcome belongs to ``measured[j]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import BadTarget, NonUnitary, ZeroShots

MAX_QUBITS = 5
UNITARY_TOL = 1e-12
NORM_TOL = 1e-12
PSD_TOL = 1e-10


def _check_n(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise BadTarget(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")


def _check_targets(targets: Sequence[int], n_qubits: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if not targets:
        raise BadTarget("no target qubits given")
    if len(set(targets)) != len(targets):
        raise BadTarget(f"duplicated target in {targets}")
    for t in targets:
        if not 0 <= t < n_qubits:
            raise BadTarget(f"qubit {t} out of range for {n_qubits} qubits")
    return targets


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        _check_n(self.n_qubits)
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.shape != (2**self.n_qubits,):
            raise BadTarget(f"expected {2**self.n_qubits} amplitudes, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitude")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def zeros(cls, n_qubits: int) -> StateVector:
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> StateVector:
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def to_density_matrix(self) -> DensityMatrix:
        return DensityMatrix(self.n_qubits, np.outer(self.amps, self.amps.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    n_qubits: int
    rho: np.ndarray

    def __post_init__(self):
        _check_n(self.n_qubits)
        dim = 2**self.n_qubits
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (dim, dim):
            raise BadTarget(f"expected a {dim}x{dim} matrix, got {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise ValueError("non-finite matrix entry")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def zeros(cls, n_qubits: int) -> DensityMatrix:
        return StateVector.zeros(n_qubits).to_density_matrix()

    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    def is_valid(self, tol: float = NORM_TOL, psd_tol: float = PSD_TOL) -> bool:
        """Trace one, Hermitian and positive semidefinite within tolerance."""
        if abs(np.trace(self.rho) - 1) > tol:
            return False
        if np.max(np.abs(self.rho - self.rho.conj().T)) > tol:
            return False
        return bool(np.linalg.eigvalsh(self.rho).min() >= -psd_tol)


State = Union[StateVector, DensityMatrix]


@dataclass(frozen=True)
class CountsHistogram:
    bit_labels: tuple
    counts: Mapping[str, int]
    shots: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "bit_labels", tuple(self.bit_labels))
        counts = {str(k): int(v) for k, v in self.counts.items()}
        k = len(self.bit_labels)
        for key, v in counts.items():
            if len(key) != k or set(key) - {"0", "1"}:
                raise BadTarget(f"bitstring {key!r} does not match {k} labels")
            if v < 0:
                raise ValueError(f"negative count for {key!r}")
        total = sum(counts.values())
        if self.shots and self.shots != total:
            raise ValueError(f"counts sum to {total}, shots={self.shots}")
        object.__setattr__(self, "counts", dict(sorted(counts.items())))
        object.__setattr__(self, "shots", total)

    def frequencies(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self.counts.items()}

    def get(self, outcome: str) -> int:
        return self.counts.get(outcome, 0)


def _axis(qubit: int, n_qubits: int) -> int:
    # C-order reshape puts the most significant qubit on axis 0
    return n_qubits - 1 - qubit


def _apply_op(tensor: np.ndarray, u: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract operator ``u`` into ``tensor`` along ``axes`` (local bit 0 first)."""
    k = len(axes)
    u_t = u.reshape([2] * (2 * k))
    # operator tensor axes run from local MSB to LSB
    ordered = list(reversed(axes))
    out = np.tensordot(u_t, tensor, axes=(list(range(k, 2 * k)), ordered))
    return np.moveaxis(out, list(range(k)), ordered)


def check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NonUnitary(f"operator must be square, got shape {u.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > tol:
        raise NonUnitary("operator fails the unitarity check")
    return u


def apply_unitary(state: State, u: np.ndarray, targets: Sequence[int]) -> State:
    n = state.n_qubits
    targets = _check_targets(targets, n)
    u = check_unitary(u)
    if u.shape != (2 ** len(targets),) * 2:
        raise BadTarget(f"{u.shape[0]}x{u.shape[0]} operator on {len(targets)} targets")
    if isinstance(state, StateVector):
        psi = _apply_op(state.amps.reshape([2] * n), u, [_axis(t, n) for t in targets])
        return StateVector(n, psi.reshape(-1))
    rho = state.rho.reshape([2] * (2 * n))
    rho = _apply_op(rho, u, [_axis(t, n) for t in targets])
    rho = _apply_op(rho, u.conj(), [n + _axis(t, n) for t in targets])
    return DensityMatrix(n, rho.reshape(2**n, 2**n))


def apply_operator_batch(matrix: np.ndarray, u: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Left-multiply a full ``2^n x 2^n`` matrix by ``u`` embedded on ``targets``.

    Used to accumulate whole-circuit unitaries without building embeddings.
    """
    cols = matrix.shape[1]
    t = matrix.reshape([2] * n_qubits + [cols])
    t = _apply_op(t, u, [_axis(q, n_qubits) for q in targets])
    return t.reshape(2**n_qubits, cols)


def partial_trace(state: State, keep: Sequence[int]) -> DensityMatrix:
    """Reduce to ``keep``; kept qubits are relabelled 0.. in ascending order."""
    n = state.n_qubits
    keep = sorted(_check_targets(keep, n)) if len(keep) else []
    if not keep:
        raise BadTarget("keep set must be non-empty")
    if isinstance(state, StateVector):
        state = state.to_density_matrix()
    if len(keep) == n:
        return state
    letters = "abcdefghijklmnopqrst"
    rows = list(letters[:n])
    cols = list(letters[n : 2 * n])
    kept_axes = sorted(_axis(q, n) for q in keep)
    for a in range(n):
        if a not in kept_axes:
            cols[a] = rows[a]
    spec = "".join(rows + cols) + "->" + "".join([rows[a] for a in kept_axes] + [cols[a] for a in kept_axes])
    d = 2 ** len(keep)
    reduced = np.einsum(spec, state.rho.reshape([2] * (2 * n))).reshape(d, d)
    return DensityMatrix(len(keep), reduced)


def probabilities(state: State, measured: Sequence[int]) -> np.ndarray:
    """Marginal Born distribution over ``measured``.

    Entry ``i`` is the probability of the bitstring ``format(i, f"0{k}b")``,
    i.e. ``measured[0]`` is the most significant bit of the returned index.
    """
    n = state.n_qubits
    measured = _check_targets(measured, n)
    if isinstance(state, StateVector):
        full = np.abs(state.amps) ** 2
    else:
        full = np.clip(np.diag(state.rho).real, 0.0, None)
    t = full.reshape([2] * n)
    axes = [_axis(q, n) for q in measured]
    others = tuple(a for a in range(n) if a not in axes)
    marg = t.sum(axis=others) if others else t
    # remaining axes are in ascending order; reorder to measured order
    remaining = sorted(axes)
    marg = np.transpose(marg, [remaining.index(a) for a in axes])
    return marg.reshape(-1)


def born_probability(state: State, measured: Sequence[int], outcome: str) -> float:
    if len(outcome) != len(measured) or set(outcome) - {"0", "1"}:
        raise BadTarget(f"outcome {outcome!r} does not match {len(measured)} measured qubits")
    return float(probabilities(state, measured)[int(outcome, 2)])


def bitstrings(k: int) -> list[str]:
    return [format(i, f"0{k}b") for i in range(2**k)]


def sample_distribution(
    probs: np.ndarray, labels: Sequence, shots: int, rng: np.random.Generator | int
) -> CountsHistogram:
    """Draw ``shots`` outcomes from a distribution indexed like :func:`probabilities`."""
    if shots < 1:
        raise ZeroShots(f"shots must be >= 1, got {shots}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    p = p / p.sum()
    draws = rng.multinomial(shots, p)
    keys = bitstrings(len(labels))
    return CountsHistogram(tuple(labels), {keys[i]: int(c) for i, c in enumerate(draws) if c}, shots)


def sample_counts(state: State, measured: Sequence[int], shots: int, seed: int) -> CountsHistogram:
    if shots < 1:
        raise ZeroShots(f"shots must be >= 1, got {shots}")
    return sample_distribution(probabilities(state, measured), measured, shots, seed)
