import itertools

import numpy as np
import pytest

from vqgap.ansatz import (
    AnsatzName,
    build,
    build_onehot_block,
    build_vqe_ref,
    build_vqgap,
    build_vqgape_esu2,
    build_vqgape_rxl,
    controlled_subtract,
    expected_counts,
)
from vqgap.instance import GapInstance, InstanceError, generate_instance
from vqgap.layout import LayoutKind, index_to_bitstring, layout
from vqgap.simulator import Circuit, Gate, exact_distribution, probabilities, run


def onehot_angles(T, A, pattern):
    """Angles that steer each one-hot block to a basis state.

    ``pattern[i] = j`` puts task i on agent j; ``j = A`` selects the
    unassigned slot.  An angle of pi moves the excitation one step on.
    """
    theta = np.zeros(T * A)
    for i, j in enumerate(pattern):
        theta[i * A:i * A + j] = np.pi
    return theta


class TestOnehotBlock:
    @pytest.mark.parametrize("A", [1, 2, 3, 4])
    def test_support_is_one_hot(self, A):
        gates = build_onehot_block(range(A + 1), range(A))
        rng = np.random.default_rng(A)
        for _ in range(20):
            dist = exact_distribution(run(Circuit(A + 1, gates, A), rng.uniform(0, 2 * np.pi, A)))
            assert all(b.count("1") == 1 for b in dist)

    def test_each_state_reachable(self):
        gates = build_onehot_block(range(4), range(3))
        for j in range(4):
            theta = np.zeros(3)
            theta[:j] = np.pi
            dist = exact_distribution(run(Circuit(4, gates, 3), theta))
            assert dist == pytest.approx({"0" * j + "1" + "0" * (3 - j): 1.0})

    def test_overlap_rejected(self):
        with pytest.raises(InstanceError):
            build_onehot_block([0, 1, 1], [0, 1])


class TestDescriptorFormulas:
    @pytest.mark.parametrize("T,A", [(t, a) for t in range(1, 7) for a in range(1, 5)])
    def test_vqgap(self, T, A):
        inst = generate_instance(T, A, seed=T * 10 + A)
        circuit, d = build_vqgap(inst, layout(inst, LayoutKind.VQGAP))
        assert d.num_params == T * A
        assert d.two_qubit_gates == 2 * T * A
        assert d.two_qubit_depth == 2 * A
        assert expected_counts(AnsatzName.VQGAP_REF, inst) == {
            "num_params": d.num_params, "two_qubit_gates": d.two_qubit_gates, "two_qubit_depth": d.two_qubit_depth,
        }

    @pytest.mark.parametrize("T,A", [(t, a) for t in range(1, 7) for a in range(1, 5)])
    @pytest.mark.parametrize("reps", [1, 2, 3])
    def test_esu2(self, T, A, reps):
        inst = generate_instance(T, A, seed=0)
        lay = layout(inst, LayoutKind.VQGAPE)
        Q = lay.num_qubits
        _, d = build_vqgape_esu2(lay, reps)
        assert d.num_params == Q * (2 + 2 * reps)
        assert d.two_qubit_gates == (Q - 1) * reps
        # each later CNOT chain can start once qubit 1 is released, two layers on
        depth = {1: 0, 2: reps}.get(Q, Q - 1 + 2 * (reps - 1))
        assert d.two_qubit_depth == depth

    @pytest.mark.parametrize("T,A", [(t, a) for t in range(1, 7) for a in range(1, 5)])
    def test_rxl(self, T, A):
        inst = generate_instance(T, A, seed=0)
        lay = layout(inst, LayoutKind.VQGAPE)
        _, d = build_vqgape_rxl(lay)
        assert d.two_qubit_gates == 0 and d.num_params == lay.num_qubits

    def test_t4a3_esu2_rep1(self):
        inst = generate_instance(4, 3, seed=1)
        _, d = build_vqgape_esu2(layout(inst, LayoutKind.VQGAPE), 1)
        assert (d.num_qubits, d.num_params, d.two_qubit_gates) == (8, 32, 7)


class TestVqgapCircuit:
    def test_support_respects_task_constraint(self, small):
        lay = layout(small, LayoutKind.VQGAP)
        circuit, _ = build_vqgap(small, lay)
        rng = np.random.default_rng(0)
        for _ in range(25):
            dist = exact_distribution(run(circuit, rng.uniform(0, 2 * np.pi, circuit.num_params)))
            for bits in dist:
                for block in (lay.block(i) for i in range(small.tasks)):
                    assert sum(bits[q] == "1" for q in block) == 1

    def test_layout_mismatch(self, small):
        with pytest.raises(InstanceError):
            build_vqgap(small, layout(small, LayoutKind.VQGAPE))


def slack_values(inst, lay, bits):
    return [sum(int(bits[q]) << k for k, q in enumerate(reg)) for reg in lay.slack_index]


class TestSlackArithmetic:
    @pytest.mark.parametrize("m,amount", [(m, a) for m in (1, 2, 3) for a in range(8)])
    def test_controlled_subtract_register(self, m, amount):
        reg = list(range(1, m + 1))
        for start in range(1 << m):
            for ctrl in (0, 1):
                prep = [Gate("X", (0,))] if ctrl else []
                prep += [Gate("X", (q,)) for k, q in enumerate(reg) if (start >> k) & 1]
                gates = prep + controlled_subtract(0, reg, amount % (1 << m))
                psi = run(Circuit(m + 1, gates, 0))
                idx = int(np.argmax(np.abs(psi)))
                value = idx >> 1
                expected = (start - amount) % (1 << m) if ctrl else start
                assert value == expected and (idx & 1) == ctrl

    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("T,A", [(1, 1), (2, 1), (2, 2), (3, 2)])
    def test_registers_hold_residual_mod(self, seed, T, A):
        rng = np.random.default_rng(100 * seed + 10 * T + A)
        inst = GapInstance(
            T, A,
            rng.integers(1, 6, size=(T, A)).tolist(),
            rng.integers(1, 8, size=(T, A)).tolist(),
            rng.integers(1, 8, size=A).tolist(),
        )
        lay = layout(inst, LayoutKind.VQE_FULL)
        circuit, _ = build_vqe_ref(inst, lay)
        for pattern in itertools.product(range(A + 1), repeat=T):
            psi = run(circuit, onehot_angles(T, A, pattern))
            idx = int(np.argmax(np.abs(psi)))
            assert abs(psi[idx]) == pytest.approx(1.0)
            bits = index_to_bitstring(idx, lay.num_qubits)
            for j, reg in enumerate(lay.slack_index):
                load = sum(inst.weights[i][j] for i, a in enumerate(pattern) if a == j)
                assert slack_values(inst, lay, bits)[j] == (inst.budgets[j] - load) % (1 << len(reg))

    def test_superposition_keeps_task_constraint(self, small):
        lay = layout(small, LayoutKind.VQE_FULL)
        circuit, _ = build_vqe_ref(small, lay)
        p = probabilities(run(circuit, np.random.default_rng(3).uniform(0, 6, circuit.num_params)))
        for idx in np.flatnonzero(p > 1e-12):
            bits = index_to_bitstring(int(idx), lay.num_qubits)
            for i in range(small.tasks):
                assert sum(bits[q] == "1" for q in lay.block(i)) == 1


def test_build_dispatch(small):
    lay = layout(small, LayoutKind.VQGAPE)
    _, d = build("VQGAPE_ESU2", small, lay, 2)
    assert d.name is AnsatzName.VQGAPE_ESU2 and d.reps == 2
    with pytest.raises(InstanceError):
        build_vqgape_esu2(lay, 0)
