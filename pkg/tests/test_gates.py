from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import haar_unitary
from esdsim import gates as G
from esdsim.entanglement import InitialState
from esdsim.errors import DimensionMismatch, UnroutableGate
from esdsim.protocol import build_prep_circuit

CX = G.gate_matrix(G.cx(0, 1))
ECR = G.gate_matrix(G.ecr(0, 1))
SWAP = G.gate_matrix(G.swap(0, 1))


class TestGateMatrices:
    def test_sqrt_x(self):
        expected = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
        np.testing.assert_array_equal(G.gate_matrix(G.sx(0)), expected)

    def test_rz_zero_is_identity(self):
        np.testing.assert_allclose(G.gate_matrix(G.rz(0.0, 0)), np.eye(2), atol=1e-15)

    def test_cx_involution(self):
        np.testing.assert_allclose(CX @ CX, np.eye(4), atol=1e-15)

    def test_cx_convention(self):
        # control is targets[0] = local bit 0
        out = CX @ np.eye(4)[:, 0b01]
        np.testing.assert_array_equal(out, np.eye(4)[:, 0b11])

    @pytest.mark.parametrize("m", [CX, ECR, SWAP])
    def test_unitary(self, m):
        np.testing.assert_allclose(m @ m.conj().T, np.eye(4), atol=1e-15)

    def test_matrix_is_a_copy(self):
        m = G.gate_matrix(G.x(0))
        m[0, 0] = 5
        assert G.gate_matrix(G.x(0))[0, 0] == 0

    def test_gate_validation(self):
        with pytest.raises(ValueError):
            G.Gate(G.GateKind.CX, (0,))
        with pytest.raises(ValueError):
            G.Gate(G.GateKind.RZ, (0,))
        with pytest.raises(ValueError):
            G.Gate(G.GateKind.X, (0,), 1.0)
        with pytest.raises(ValueError):
            G.cx(1, 1)


class TestRyEquivalent:
    def test_half_pi(self):
        np.testing.assert_allclose(G.ry_equivalent(math.pi / 2), np.array([[1, 1], [1, -1]]) / math.sqrt(2), atol=1e-15)

    def test_pi(self):
        np.testing.assert_allclose(G.ry_equivalent(math.pi), np.diag([1, -1]), atol=1e-15)

    def test_zero(self):
        np.testing.assert_allclose(G.ry_equivalent(0.0), [[0, 1], [1, 0]], atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(lam=st.floats(-10, 10))
    def test_real_orthogonal(self, lam):
        m = G.ry_equivalent(lam)
        s, c = math.sin(lam / 2), math.cos(lam / 2)
        np.testing.assert_allclose(m, [[s, c], [c, -s]], atol=1e-14)

    @pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 2, 2.5, -1.1])
    def test_ry_ops(self, theta):
        u = G.circuit_unitary(G.Circuit(1, G.ry_ops(theta, 0)))
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        assert G.unitary_equal_up_to_phase(u, np.array([[c, -s], [s, c]]))

    @pytest.mark.parametrize("theta", [0.0, 0.7, math.pi])
    def test_controlled_ry(self, theta):
        u = G.circuit_unitary(G.Circuit(2, G.controlled_ry_ops(theta, 0, 1)))
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        expected = np.eye(4, dtype=complex)
        # control = qubit 0 set: indices 0b01 and 0b11
        expected[np.ix_([1, 3], [1, 3])] = [[c, -s], [s, c]]
        # each RY sequence carries a global -i, so the pair contributes -1
        np.testing.assert_allclose(u, -expected, atol=1e-12)


class TestTranspiler:
    def test_single_cx(self):
        t = G.transpile_to_basis(G.Circuit(2, (G.cx(0, 1),)))
        assert all(g.kind in G.BASIS_GATES for g in t.ops)
        assert G.unitary_equal_up_to_phase(G.circuit_unitary(t), CX)

    def test_dressing_is_phase_exact(self):
        t = G.transpile_to_basis(G.Circuit(2, (G.cx(1, 0),)))
        np.testing.assert_allclose(G.circuit_unitary(t), G.circuit_unitary(G.Circuit(2, (G.cx(1, 0),))), atol=1e-12)

    def test_empty(self):
        assert len(G.transpile_to_basis(G.Circuit(3))) == 0

    def test_swap_uses_three_ecr(self):
        t = G.transpile_to_basis(G.Circuit(2, (G.swap(0, 1),)))
        assert t.count(G.GateKind.ECR) == 3
        assert G.unitary_equal_up_to_phase(G.circuit_unitary(t), SWAP)

    def test_prep_circuit_state(self):
        c = build_prep_circuit(InitialState(math.pi / 2))
        a = G.circuit_unitary(G.transpile_to_basis(c))[:, 0]
        b = G.circuit_unitary(c)[:, 0]
        assert G.unitary_equal_up_to_phase(a.reshape(-1, 1), b.reshape(-1, 1))
        expected = np.zeros(32)
        expected[0] = expected[0b01010] = 1 / math.sqrt(2)
        assert G.unitary_equal_up_to_phase(a.reshape(-1, 1), expected.reshape(-1, 1))

    def test_nonadjacent_rejected(self):
        with pytest.raises(UnroutableGate):
            G.Circuit(3, (G.cx(0, 2),))

    def test_out_of_range_rejected(self):
        with pytest.raises(UnroutableGate):
            G.Circuit(2, (G.x(2),))

    def test_corrupted_rule_detected(self, monkeypatch):
        broken = tuple(r for r in G.CX_TO_ECR if r[0] is not G.GateKind.X)
        monkeypatch.setattr(G, "CX_TO_ECR", broken)
        t = G.transpile_to_basis(G.Circuit(2, (G.cx(0, 1),)))
        assert not G.unitary_equal_up_to_phase(G.circuit_unitary(t), CX)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 4), n_gates=st.integers(0, 15))
    def test_random_circuits(self, seed, n, n_gates):
        c = G.random_circuit(np.random.default_rng(seed), n, n_gates)
        t = G.transpile_to_basis(c)
        assert all(g.kind in G.BASIS_GATES for g in t.ops)
        assert G.unitary_equal_up_to_phase(G.circuit_unitary(t), G.circuit_unitary(c))


class TestPhaseEquality:
    def test_phase(self, rng):
        u = haar_unitary(rng, 4)
        assert G.unitary_equal_up_to_phase(u, 1j * u)
        assert G.unitary_equal_up_to_phase(u, np.exp(0.3j) * u)

    def test_x_vs_z(self):
        assert not G.unitary_equal_up_to_phase(G.gate_matrix(G.x(0)), np.diag([1, -1]))

    def test_not_phase_related(self):
        assert not G.unitary_equal_up_to_phase(np.eye(2), np.diag([1, 1j]))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            G.unitary_equal_up_to_phase(np.eye(2), np.eye(4))


class TestInvariants:
    def test_cx_values(self):
        g1, g2 = G.local_equivalence_invariants(CX)
        assert abs(g1) < 1e-12 and g2 == pytest.approx(1, abs=1e-12)

    def test_ecr_matches_cx(self):
        assert G.invariants_close(G.local_equivalence_invariants(ECR), G.local_equivalence_invariants(CX))

    def test_swap_differs(self):
        g1, g2 = G.local_equivalence_invariants(SWAP)
        assert g1 == pytest.approx(-1, abs=1e-12) and g2 == pytest.approx(-3, abs=1e-12)
        assert not G.invariants_close((g1, g2), G.local_equivalence_invariants(CX))

    def test_identity(self):
        g1, g2 = G.local_equivalence_invariants(np.eye(4))
        assert g1 == pytest.approx(1) and g2 == pytest.approx(3)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_local_dressing_invariance(self, seed):
        rng = np.random.default_rng(seed)
        u = haar_unitary(rng, 4)
        a, b, c, d = (haar_unitary(rng, 2) for _ in range(4))
        v = np.kron(a, b) @ u @ np.kron(c, d)
        assert G.invariants_close(G.local_equivalence_invariants(u), G.local_equivalence_invariants(v))

    def test_global_phase_invariance(self, rng):
        u = haar_unitary(rng, 4)
        assert G.invariants_close(G.local_equivalence_invariants(u), G.local_equivalence_invariants(np.exp(0.7j) * u))

    def test_rejects_wrong_shape(self):
        with pytest.raises(DimensionMismatch):
            G.local_equivalence_invariants(np.eye(2))
