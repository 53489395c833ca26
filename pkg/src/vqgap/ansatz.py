"""Parameterised circuits for the VQE, VQGAP and VQGAPe formulations."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from vqgap.instance import GapInstance, InstanceError
from vqgap.layout import LayoutKind, VariableLayout, register_width
from vqgap.simulator import Circuit, Gate


class AnsatzName(str, enum.Enum):
    VQE_REF = "VQE_REF"
    VQGAP_REF = "VQGAP_REF"
    VQGAPE_RXL = "VQGAPE_RXL"
    VQGAPE_ESU2 = "VQGAPE_ESU2"


@dataclass(frozen=True)
class AnsatzDescriptor:
    name: AnsatzName
    num_qubits: int
    num_params: int
    two_qubit_gates: int
    two_qubit_depth: int
    reps: int | None = None


def describe(name: AnsatzName, circuit: Circuit, reps: int | None = None) -> AnsatzDescriptor:
    return AnsatzDescriptor(
        name=name,
        num_qubits=circuit.num_qubits,
        num_params=circuit.num_params,
        two_qubit_gates=circuit.two_qubit_gate_count,
        two_qubit_depth=circuit.two_qubit_depth,
        reps=reps,
    )


def build_onehot_block(block_qubits: Sequence[int], slots: Sequence[int]) -> list[Gate]:
    """Rotate a single excitation along ``block_qubits``.

    Starting from an excitation on the first qubit, each ``CRY`` moves part of
    the amplitude one position further and the following ``CNOT`` clears the
    source, so the block is always in a superposition of one-hot states.
    """
    block_qubits = list(block_qubits)
    if len(set(block_qubits)) != len(block_qubits):
        raise InstanceError(f"block qubits overlap: {block_qubits}")
    if len(slots) != len(block_qubits) - 1 or not slots:
        raise InstanceError("a block over A+1 qubits needs A >= 1 parameter slots")
    gates = [Gate("X", (block_qubits[0],))]
    for k, slot in enumerate(slots, start=1):
        prev, cur = block_qubits[k - 1], block_qubits[k]
        gates.append(Gate("CRY", (prev, cur), slot=slot))
        gates.append(Gate("CNOT", (cur, prev)))
    return gates


def _onehot_layer(instance: GapInstance, layout: VariableLayout) -> list[Gate]:
    A = instance.agents
    gates: list[Gate] = []
    for i in range(instance.tasks):
        gates += build_onehot_block(layout.block(i), range(i * A, (i + 1) * A))
    return gates


def build_vqgap(instance: GapInstance, layout: VariableLayout) -> tuple[Circuit, AnsatzDescriptor]:
    if layout.kind is not LayoutKind.VQGAP:
        raise InstanceError(f"VQGAP ansatz needs a VQGAP layout, got {layout.kind.value}")
    circuit = Circuit(layout.num_qubits, _onehot_layer(instance, layout), instance.tasks * instance.agents)
    return circuit, describe(AnsatzName.VQGAP_REF, circuit)


def _controlled_increment(control: int, register: Sequence[int]) -> list[Gate]:
    """``register += 1 (mod 2**len)`` when ``control`` is set; LSB first."""
    gates = []
    for k in reversed(range(len(register))):
        gates.append(Gate("MCX", (control, *register[:k], register[k])))
    return gates


def controlled_subtract(control: int, register: Sequence[int], amount: int) -> list[Gate]:
    """``register -= amount (mod 2**len)`` when ``control`` is set.

    Complementing the register turns subtraction into addition; ``amount`` is
    added one binary digit at a time, each ``2**k`` being an increment of the
    sub-register starting at bit ``k``.
    """
    m = len(register)
    flip = [Gate("X", (q,)) for q in register]
    body = []
    for k in range(m):
        if (amount >> k) & 1:
            body += _controlled_increment(control, register[k:])
    return flip + body + flip if body else []


def build_vqe_ref(instance: GapInstance, layout: VariableLayout) -> tuple[Circuit, AnsatzDescriptor]:
    """One-hot assignment blocks followed by reversible slack arithmetic.

    Each slack register is loaded with its agent's budget and the weight of
    every task assigned to that agent is subtracted, controlled on the
    assignment qubit, so the registers end up holding
    ``(B_j - sum_i w_ij x_ij) mod 2**m_j`` for every assignment branch.
    """
    if layout.kind is not LayoutKind.VQE_FULL:
        raise InstanceError(f"VQE ansatz needs a VQE_FULL layout, got {layout.kind.value}")
    gates = _onehot_layer(instance, layout)
    for j, reg in enumerate(layout.slack_index):
        budget = instance.budgets[j]
        gates += [Gate("X", (q,)) for k, q in enumerate(reg) if (budget >> k) & 1]
        for i in range(instance.tasks):
            w = instance.weights[i][j] % (1 << len(reg))
            gates += controlled_subtract(layout.x_index[i][j], reg, w)
    circuit = Circuit(layout.num_qubits, gates, instance.tasks * instance.agents)
    return circuit, describe(AnsatzName.VQE_REF, circuit)


def build_vqgape_rxl(layout: VariableLayout) -> tuple[Circuit, AnsatzDescriptor]:
    if layout.kind is not LayoutKind.VQGAPE:
        raise InstanceError(f"RXL ansatz needs a VQGAPE layout, got {layout.kind.value}")
    Q = layout.num_qubits
    circuit = Circuit(Q, [Gate("RX", (q,), slot=q) for q in range(Q)], Q)
    return circuit, describe(AnsatzName.VQGAPE_RXL, circuit)


def build_vqgape_esu2(layout: VariableLayout, reps: int = 1) -> tuple[Circuit, AnsatzDescriptor]:
    """``reps`` x (RY, RZ layer + linear CNOT chain), then a closing RY, RZ layer."""
    if layout.kind is not LayoutKind.VQGAPE:
        raise InstanceError(f"ESU2 ansatz needs a VQGAPE layout, got {layout.kind.value}")
    if reps < 1:
        raise InstanceError("ESU2 needs reps >= 1")
    Q = layout.num_qubits
    gates: list[Gate] = []
    slot = 0

    def rotations():
        nonlocal slot
        for kind in ("RY", "RZ"):
            for q in range(Q):
                gates.append(Gate(kind, (q,), slot=slot))
                slot += 1

    for _ in range(reps):
        rotations()
        gates.extend(Gate("CNOT", (q, q + 1)) for q in range(Q - 1))
    rotations()
    circuit = Circuit(Q, gates, slot)
    return circuit, describe(AnsatzName.VQGAPE_ESU2, circuit, reps)


def build(
    name: AnsatzName | str, instance: GapInstance, layout: VariableLayout, reps: int = 1
) -> tuple[Circuit, AnsatzDescriptor]:
    name = AnsatzName(name)
    if name is AnsatzName.VQE_REF:
        return build_vqe_ref(instance, layout)
    if name is AnsatzName.VQGAP_REF:
        return build_vqgap(instance, layout)
    if name is AnsatzName.VQGAPE_RXL:
        return build_vqgape_rxl(layout)
    return build_vqgape_esu2(layout, reps)


# closed forms used to cross-check the measured descriptor counts

def expected_counts(name: AnsatzName, instance: GapInstance, reps: int = 1) -> dict[str, int]:
    T, A = instance.tasks, instance.agents
    if name is AnsatzName.VQGAP_REF:
        return {"num_params": T * A, "two_qubit_gates": 2 * T * A, "two_qubit_depth": 2 * A}
    Q = T * register_width(A)
    if name is AnsatzName.VQGAPE_RXL:
        return {"num_params": Q, "two_qubit_gates": 0, "two_qubit_depth": 0}
    if name is AnsatzName.VQGAPE_ESU2:
        return {"num_params": Q * (2 + 2 * reps), "two_qubit_gates": (Q - 1) * reps}
    return {"num_params": T * A}
