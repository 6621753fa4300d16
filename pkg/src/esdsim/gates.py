"""Hardware basis gates, routed circuits and the basis transpiler.

The native alphabet is {ID, X, SQRT_X, RZ, ECR}.  Circuits are authored in
{ID, X, SQRT_X, RZ, CX, SWAP} on a linear nearest-neighbour chain and rewritten
gate by gate; there is no placement or routing pass.

Two-qubit gates take ``targets=(control, target)``.  ECR is fixed as

    ECR = (X_c I_t - Y_c X_t) / sqrt(2) = X_c exp(-i pi/4 Z_c X_t),

locally equivalent to CX (see :func:`local_equivalence_invariants`).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from math import pi, sqrt
from typing import Iterable

import numpy as np

from .errors import DimensionMismatch, UnroutableGate
from .simcore import apply_operator_batch, check_unitary


class GateKind(str, enum.Enum):
    ID = "ID"
    X = "X"
    SQRT_X = "SQRT_X"
    RZ = "RZ"
    CX = "CX"
    ECR = "ECR"
    SWAP = "SWAP"

    @property
    def n_qubits(self) -> int:
        return 2 if self in (GateKind.CX, GateKind.ECR, GateKind.SWAP) else 1


BASIS_GATES = frozenset({GateKind.ID, GateKind.X, GateKind.SQRT_X, GateKind.RZ, GateKind.ECR})
AUTHORING_GATES = frozenset({GateKind.ID, GateKind.X, GateKind.SQRT_X, GateKind.RZ, GateKind.CX, GateKind.SWAP})


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    targets: tuple[int, ...]
    param: float | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        if len(targets) != kind.n_qubits:
            raise ValueError(f"{kind.value} acts on {kind.n_qubits} qubit(s), got {targets}")
        if len(set(targets)) != len(targets):
            raise ValueError(f"{kind.value} needs distinct targets, got {targets}")
        if kind is GateKind.RZ:
            if self.param is None or not np.isfinite(self.param):
                raise ValueError("RZ needs one finite angle")
            object.__setattr__(self, "param", float(self.param))
        elif self.param is not None:
            raise ValueError(f"{kind.value} takes no parameter")

    def __str__(self) -> str:
        args = ",".join(map(str, self.targets))
        if self.param is not None:
            return f"{self.kind.value}({self.param:.6g})[{args}]"
        return f"{self.kind.value}[{args}]"


# convenience constructors used by circuit builders
def id_(q: int) -> Gate:
    return Gate(GateKind.ID, (q,))


def x(q: int) -> Gate:
    return Gate(GateKind.X, (q,))


def sx(q: int) -> Gate:
    return Gate(GateKind.SQRT_X, (q,))


def rz(lam: float, q: int) -> Gate:
    return Gate(GateKind.RZ, (q,), lam)


def cx(control: int, target: int) -> Gate:
    return Gate(GateKind.CX, (control, target))


def ecr(control: int, target: int) -> Gate:
    return Gate(GateKind.ECR, (control, target))


def swap(a: int, b: int) -> Gate:
    return Gate(GateKind.SWAP, (a, b))


def linear_coupling(n_qubits: int) -> frozenset[tuple[int, int]]:
    return frozenset((i, i + 1) for i in range(n_qubits - 1))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[Gate, ...] = ()
    coupling: frozenset[tuple[int, int]] | None = None

    def __post_init__(self):
        coupling = self.coupling
        if coupling is None:
            coupling = linear_coupling(self.n_qubits)
        coupling = frozenset(tuple(sorted(p)) for p in coupling)
        object.__setattr__(self, "coupling", coupling)
        object.__setattr__(self, "ops", tuple(self.ops))
        for g in self.ops:
            for t in g.targets:
                if not 0 <= t < self.n_qubits:
                    raise UnroutableGate(f"{g} touches qubit outside 0..{self.n_qubits - 1}")
            if g.kind.n_qubits == 2 and tuple(sorted(g.targets)) not in coupling:
                raise UnroutableGate(f"{g} acts on a non-adjacent pair")

    def extend(self, ops: Iterable[Gate]) -> Circuit:
        return Circuit(self.n_qubits, self.ops + tuple(ops), self.coupling)

    def __add__(self, other: Circuit) -> Circuit:
        return self.extend(other.ops)

    def __len__(self) -> int:
        return len(self.ops)

    def count(self, kind: GateKind) -> int:
        return sum(g.kind is kind for g in self.ops)


_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_P0 = np.diag([1, 0]).astype(complex)
_P1 = np.diag([0, 1]).astype(complex)
_SQRT_X = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])

# local index = bit(targets[0]) + 2*bit(targets[1]), hence kron(target_op, control_op)
_CX = np.kron(_I2, _P0) + np.kron(_X, _P1)
_ECR = (np.kron(_I2, _X) - np.kron(_X, _Y)) / sqrt(2)
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

PAULIS = (_I2, _X, _Y, _Z)


def rz_matrix(lam: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * lam), np.exp(0.5j * lam)])


def gate_matrix(g: Gate) -> np.ndarray:
    kind = g.kind
    if kind is GateKind.RZ:
        return rz_matrix(g.param)
    return {
        GateKind.ID: _I2,
        GateKind.X: _X,
        GateKind.SQRT_X: _SQRT_X,
        GateKind.CX: _CX,
        GateKind.ECR: _ECR,
        GateKind.SWAP: _SWAP,
    }[kind].copy()


def ry_equivalent(lam: float) -> np.ndarray:
    """The product SQRT_X . RZ(lam) . SQRT_X, i.e. [[sin, cos], [cos, -sin]](lam/2)."""
    return _SQRT_X @ rz_matrix(lam) @ _SQRT_X


def ry_ops(theta: float, q: int) -> list[Gate]:
    """Basis-gate sequence for RY(theta) up to global phase (time order).

    Uses SQRT_X RZ(pi - theta) SQRT_X = RY(theta) Z, preceded by RZ(pi) ~ Z.
    """
    return [rz(pi, q), sx(q), rz(pi - theta, q), sx(q)]


def controlled_ry_ops(theta: float, control: int, target: int) -> list[Gate]:
    return [*ry_ops(theta / 2, target), cx(control, target), *ry_ops(-theta / 2, target), cx(control, target)]


# CX(c, t) == RZ_c(pi/2) SQRT_X_t ECR(c, t) X_c, exactly (global phase 1).
# Each entry: (kind, role, angle) with role "c" or "t", listed in time order.
CX_TO_ECR: tuple[tuple[GateKind, str, float | None], ...] = (
    (GateKind.X, "c", None),
    (GateKind.ECR, "ct", None),
    (GateKind.RZ, "c", pi / 2),
    (GateKind.SQRT_X, "t", None),
)


def _dress_cx(control: int, target: int) -> list[Gate]:
    roles = {"c": (control,), "t": (target,), "ct": (control, target)}
    return [Gate(kind, roles[role], angle) for kind, role, angle in CX_TO_ECR]


def transpile_to_basis(c: Circuit) -> Circuit:
    """Rewrite an authored circuit into {ID, X, SQRT_X, RZ, ECR}."""
    out: list[Gate] = []
    for g in c.ops:
        if g.kind is GateKind.SWAP:
            a, b = g.targets
            for step in (cx(a, b), cx(b, a), cx(a, b)):
                out.extend(_dress_cx(*step.targets))
        elif g.kind is GateKind.CX:
            out.extend(_dress_cx(*g.targets))
        else:
            out.append(g)
    # Circuit() re-validates adjacency and raises UnroutableGate
    return Circuit(c.n_qubits, tuple(out), c.coupling)


def circuit_unitary(c: Circuit) -> np.ndarray:
    dim = 2**c.n_qubits
    u = np.eye(dim, dtype=complex)
    for g in c.ops:
        u = apply_operator_batch(u, gate_matrix(g), g.targets, c.n_qubits)
    return u


def unitary_equal_up_to_phase(u: np.ndarray, v: np.ndarray, atol: float = 1e-10) -> bool:
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        raise DimensionMismatch(f"{u.shape} vs {v.shape}")
    flat_v = v.reshape(-1)
    nz = np.flatnonzero(np.abs(flat_v) > 1e-8)
    if nz.size == 0:
        return bool(np.max(np.abs(u)) <= atol)
    k = nz[0]
    if abs(u.reshape(-1)[k]) <= 1e-8:
        return False
    phase = u.reshape(-1)[k] / flat_v[k]
    phase /= abs(phase)
    return bool(np.max(np.abs(u - phase * v)) <= atol)


_MAGIC = np.array([[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex) / sqrt(2)


def local_equivalence_invariants(u: np.ndarray) -> tuple[complex, float]:
    """Makhlin invariants (G1, G2) of a two-qubit gate.

    G1 is complex in general and G2 real; two gates are locally equivalent iff
    both agree.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise DimensionMismatch(f"expected 4x4, got {u.shape}")
    check_unitary(u, tol=1e-10)
    ub = _MAGIC.conj().T @ u @ _MAGIC
    m = ub.T @ ub
    det = np.linalg.det(u)
    tr = np.trace(m)
    g1 = tr**2 / (16 * det)
    g2 = (tr**2 - np.trace(m @ m)) / (4 * det)
    return complex(g1), float(g2.real)


def invariants_close(a: tuple[complex, float], b: tuple[complex, float], atol: float = 1e-9) -> bool:
    return abs(a[0] - b[0]) <= atol and abs(a[1] - b[1]) <= atol


def random_circuit(rng: np.random.Generator, n_qubits: int, n_gates: int) -> Circuit:
    """Random routed circuit over the authoring alphabet on a linear chain."""
    kinds = sorted(AUTHORING_GATES, key=lambda k: k.value)
    if n_qubits < 2:
        kinds = [k for k in kinds if k.n_qubits == 1]
    ops = []
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        if kind.n_qubits == 2:
            a = int(rng.integers(n_qubits - 1))
            pair = (a, a + 1) if rng.random() < 0.5 else (a + 1, a)
            ops.append(Gate(kind, pair))
        else:
            q = int(rng.integers(n_qubits))
            param = float(rng.uniform(-2 * pi, 2 * pi)) if kind is GateKind.RZ else None
            ops.append(Gate(kind, (q,), param))
    return Circuit(n_qubits, tuple(ops))
