"""Closed-form X-state layer: reduced states, concurrence, witness, ESD/ESB times.

Initial state: sin(lam/2)|00> + cos(lam/2)|11>, with s = sin(lam/2), c = cos(lam/2).
After damping each qubit onto its own environment qubit (eta = e^{-gt/2},
zeta = sqrt(1 - e^{-gt})) the system pair is

    [[s^2 + c^2 zeta^4, 0, 0, s c eta^2],
     [0, c^2 eta^2 zeta^2, 0, 0],
     [0, 0, c^2 eta^2 zeta^2, 0],
     [s c eta^2, 0, 0, c^2 eta^4]]

and the environment pair is the same matrix with eta and zeta exchanged.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .channels import DampingParams, damping_params
from .errors import LabelMismatch, NotXForm, QualityWarning
from .simcore import CountsHistogram

# s and c closer than this are treated as the balanced case (no ESD / ESB)
BALANCED_TOL = 1e-12
BISECT_BRACKET = (0.0, 50.0)
BISECT_TOL = 1e-9
WITNESS_OUTCOME = "010"

_X_MASK = np.eye(4, dtype=bool) | np.fliplr(np.eye(4, dtype=bool))


@dataclass(frozen=True)
class InitialState:
    lam: float

    @classmethod
    def from_alpha(cls, alpha: float) -> InitialState:
        """State with amplitude ``alpha`` on |00> (alpha = sin(lam/2))."""
        if not 0 <= alpha <= 1:
            raise ValueError(f"alpha must be in [0, 1], got {alpha}")
        return cls(2 * math.asin(alpha))

    @property
    def s(self) -> float:
        return math.sin(self.lam / 2)

    @property
    def c(self) -> float:
        return math.cos(self.lam / 2)

    @property
    def alpha(self) -> float:
        return self.s

    def amplitudes(self) -> tuple[float, float]:
        return self.s, self.c


STUDY_ALPHAS = (1 / math.sqrt(2), 1 / math.sqrt(3), 1 / math.sqrt(5))


def _xstate(d00: float, d11: float, d22: float, d33: float, corner: float) -> np.ndarray:
    rho = np.diag([d00, d11, d22, d33]).astype(complex)
    rho[0, 3] = rho[3, 0] = corner
    return rho


def analytic_rho_s(init: InitialState, p: DampingParams) -> np.ndarray:
    s, c = init.s, init.c
    e2, z2 = p.eta**2, p.zeta**2
    mid = c * c * e2 * z2
    return _xstate(s * s + c * c * z2 * z2, mid, mid, c * c * e2 * e2, s * c * e2)


def analytic_rho_env(init: InitialState, p: DampingParams) -> np.ndarray:
    s, c = init.s, init.c
    e2, z2 = p.eta**2, p.zeta**2
    mid = c * c * e2 * z2
    return _xstate(s * s + c * c * e2 * e2, mid, mid, c * c * z2 * z2, s * c * z2)


def check_xform(rho: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise NotXForm(f"expected a 4x4 matrix, got {rho.shape}")
    if np.max(np.abs(rho[~_X_MASK]), initial=0.0) >= tol:
        raise NotXForm("entries off the diagonal and anti-diagonal are non-zero")
    if abs(np.trace(rho) - 1) > 1e-12:
        raise NotXForm("trace differs from one")
    return rho


def concurrence_xstate(rho: np.ndarray) -> float:
    r = check_xform(rho)
    d = np.clip(np.diag(r).real, 0.0, None)
    a = abs(r[0, 3]) - math.sqrt(d[1] * d[2])
    b = abs(r[1, 2]) - math.sqrt(d[0] * d[3])
    return float(min(1.0, 2 * max(0.0, a, b)))


def concurrence_system_closed(init: InitialState, p: DampingParams) -> float:
    s, c = init.s, init.c
    return max(0.0, -2 * p.eta**2 * (c * c * p.zeta**2 - s * c))


def concurrence_env_closed(init: InitialState, p: DampingParams) -> float:
    s, c = init.s, init.c
    return max(0.0, -2 * p.zeta**2 * (c * c * p.eta**2 - s * c))


def witness_probability(rho: np.ndarray) -> float:
    """Overlap <Phi|rho|Phi> with Phi = (|00> + |11>)/sqrt(2)."""
    r = np.asarray(rho, dtype=complex)
    return float(0.5 * (r[0, 0].real + r[3, 3].real) + r[0, 3].real)


def concurrence_from_witness(p_phi: float) -> float:
    return max(0.0, 2 * p_phi - 1)


def concurrence_from_counts(
    counts: CountsHistogram | Mapping[str, float], labels: tuple | None = None, shots: int | None = None
) -> float:
    """max(0, 4 P(010) - 1) with bit order (sys0, ancilla, sys1), clipped to 1.

    Raises a QualityWarning when the estimate exceeds 1 by more than three
    binomial standard errors.  For a plain distribution (e.g. mitigated
    frequencies) pass ``shots`` to size that margin; without it the
    distribution is treated as exact.
    """
    if isinstance(counts, CountsHistogram):
        if len(counts.bit_labels) != 3 or (labels is not None and tuple(labels) != counts.bit_labels):
            raise LabelMismatch(f"expected three witness qubits, got labels {counts.bit_labels}")
        p010 = counts.get(WITNESS_OUTCOME) / counts.shots
        sigma = 4 * math.sqrt(p010 * (1 - p010) / counts.shots)
    else:
        if any(len(k) != 3 for k in counts):
            raise LabelMismatch("distribution keys must be three-bit strings")
        p010 = float(counts.get(WITNESS_OUTCOME, 0.0))
        sigma = 4 * math.sqrt(max(p010 * (1 - p010), 0.0) / shots) if shots else 0.0
    raw = 4 * p010 - 1
    if raw > 1 + 3 * sigma + 1e-12:
        warnings.warn(f"witness estimate {raw:.4f} exceeds 1 beyond sampling error", QualityWarning, stacklevel=2)
    return min(1.0, max(0.0, raw))


def _bisect(f: Callable[[float], float], lo: float, hi: float, tol: float = BISECT_TOL) -> float:
    flo = f(lo)
    if flo == 0 or np.sign(flo) == np.sign(f(hi)):
        raise ValueError("bracket does not straddle a sign change")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _is_balanced_or_above(init: InitialState) -> bool:
    return init.s >= init.c - BALANCED_TOL


def _xstate_margin(rho: np.ndarray) -> float:
    # unclipped corner term of the X-state concurrence; stays accurate where 2*P_phi - 1 cancels
    return 2 * (abs(rho[0, 3]) - math.sqrt(rho[1, 1].real * rho[2, 2].real))


def _margin_fn(rho_fn, init: InitialState) -> Callable[[float], float]:
    return lambda gt: _xstate_margin(rho_fn(init, damping_params(gt)))


def esd_time_closed(init: InitialState) -> float | None:
    if _is_balanced_or_above(init):
        return None
    return -math.log1p(-init.s / init.c)


def esb_time_closed(init: InitialState) -> float | None:
    if _is_balanced_or_above(init):
        return None
    return -math.log(init.s / init.c)


def esd_time_bisect(init: InitialState) -> float | None:
    if _is_balanced_or_above(init):
        return None
    return _bisect(_margin_fn(analytic_rho_s, init), *BISECT_BRACKET)


def esb_time_bisect(init: InitialState) -> float | None:
    if _is_balanced_or_above(init):
        return None
    # the environment margin vanishes at gt=0 itself; start just above it
    return _bisect(_margin_fn(analytic_rho_env, init), 1e-12, BISECT_BRACKET[1])


def _checked(closed: float | None, bisected: float | None, what: str) -> float | None:
    if closed is not None and abs(closed - bisected) > BISECT_TOL:
        raise ArithmeticError(f"{what}: closed form {closed} and bisection {bisected} disagree")
    return closed


def esd_time(init: InitialState) -> float | None:
    """Sudden-death gamma*t of the system pair, or None when decay is asymptotic."""
    return _checked(esd_time_closed(init), esd_time_bisect(init), "esd_time")


def esb_time(init: InitialState) -> float | None:
    """Sudden-birth gamma*t of the environment pair, or None when birth is at t=0."""
    return _checked(esb_time_closed(init), esb_time_bisect(init), "esb_time")
