"""Qubit layouts for the three formulations and bitstring decoders.

Bitstrings are written with qubit 0 as the first character.  Basis-state
indices are little-endian: qubit ``q`` is bit ``q`` of the index.

Qubit order inside a layout is task-major: for every task the block
``x_i1 .. x_iA, s_i`` (VQE_FULL, VQGAP) or the code bits ``e_i1 .. e_im``
(VQGAPE, least significant first), followed for VQE_FULL by one slack
register per agent, least significant bit first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from vqgap.instance import GapInstance, InstanceError


class LayoutKind(str, enum.Enum):
    VQE_FULL = "VQE_FULL"
    VQGAP = "VQGAP"
    VQGAPE = "VQGAPE"


def register_width(value: int) -> int:
    """``ceil(log2(value + 1))`` computed exactly on integers."""
    return int(value).bit_length()


@dataclass(frozen=True)
class VariableLayout:
    kind: LayoutKind
    num_qubits: int
    x_index: tuple[tuple[int, ...], ...] | None = None
    s_index: tuple[int, ...] | None = None
    slack_index: tuple[tuple[int, ...], ...] | None = None
    code_index: tuple[tuple[int, ...], ...] | None = None

    def block(self, task: int) -> tuple[int, ...]:
        """Qubits holding task ``task``: one-hot block or code bits."""
        if self.kind is LayoutKind.VQGAPE:
            return self.code_index[task]
        return self.x_index[task] + (self.s_index[task],)

    def all_indices(self) -> list[int]:
        out: list[int] = []
        for group in (self.x_index, self.slack_index, self.code_index):
            if group:
                for row in group:
                    out.extend(row)
        if self.s_index:
            out.extend(self.s_index)
        return out


def layout(instance: GapInstance, kind: LayoutKind | str) -> VariableLayout:
    kind = LayoutKind(kind)
    T, A = instance.tasks, instance.agents
    if kind is LayoutKind.VQGAPE:
        m = register_width(A)
        codes = tuple(tuple(range(i * m, (i + 1) * m)) for i in range(T))
        return VariableLayout(kind, T * m, code_index=codes)

    x_index = tuple(tuple(range(i * (A + 1), i * (A + 1) + A)) for i in range(T))
    s_index = tuple(i * (A + 1) + A for i in range(T))
    q = T * (A + 1)
    if kind is LayoutKind.VQGAP:
        return VariableLayout(kind, q, x_index=x_index, s_index=s_index)

    slack = []
    for b in instance.budgets:
        m = register_width(b)
        slack.append(tuple(range(q, q + m)))
        q += m
    return VariableLayout(kind, q, x_index=x_index, s_index=s_index, slack_index=tuple(slack))


# -- bitstring helpers -------------------------------------------------------


def index_to_bitstring(index: int, num_qubits: int) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in range(num_qubits))


def bitstring_to_index(bits: str | Sequence[int]) -> int:
    return sum(1 << q for q, b in enumerate(bits) if int(b))


def _bits(layout: VariableLayout, bitstring: str | Sequence[int]) -> list[int]:
    if len(bitstring) != layout.num_qubits:
        raise InstanceError(
            f"bitstring has {len(bitstring)} bits, layout {layout.kind.value} needs {layout.num_qubits}"
        )
    bits = [int(b) for b in bitstring]
    if any(b not in (0, 1) for b in bits):
        raise InstanceError(f"bitstring must contain only 0/1, got {bitstring!r}")
    return bits


def _require(layout: VariableLayout, kind: LayoutKind) -> None:
    if layout.kind is not kind:
        raise InstanceError(f"expected a {kind.value} layout, got {layout.kind.value}")


# -- decoders ----------------------------------------------------------------


@dataclass(frozen=True)
class Decoded:
    x: list[list[int]]
    s: list[int]
    r: list[int]
    b: list[list[int]] | None = None


def residuals(instance: GapInstance, x) -> list[int]:
    """Classically computed residual budgets ``|B_j - sum_i w_ij x_ij|``."""
    return [
        abs(instance.budgets[j] - sum(instance.weights[i][j] * x[i][j] for i in range(instance.tasks)))
        for j in range(instance.agents)
    ]


def decode_vqgap(instance: GapInstance, layout: VariableLayout, bitstring) -> Decoded:
    _require(layout, LayoutKind.VQGAP)
    bits = _bits(layout, bitstring)
    x = [[bits[q] for q in row] for row in layout.x_index]
    s = [bits[q] for q in layout.s_index]
    return Decoded(x, s, residuals(instance, x))


def decode_vqgape(instance: GapInstance, layout: VariableLayout, bitstring) -> Decoded:
    _require(layout, LayoutKind.VQGAPE)
    bits = _bits(layout, bitstring)
    A = instance.agents
    x, s = [], []
    for row in layout.code_index:
        code = sum(bits[q] << k for k, q in enumerate(row))
        # code 0 and codes above A match no agent: task unassigned
        x.append([1 if code == j + 1 else 0 for j in range(A)])
        s.append(0 if 1 <= code <= A else 1)
    return Decoded(x, s, residuals(instance, x))


def decode_vqe_full(instance: GapInstance, layout: VariableLayout, bitstring) -> Decoded:
    _require(layout, LayoutKind.VQE_FULL)
    bits = _bits(layout, bitstring)
    x = [[bits[q] for q in row] for row in layout.x_index]
    s = [bits[q] for q in layout.s_index]
    b = [[bits[q] for q in reg] for reg in layout.slack_index]
    r = [sum(bit << k for k, bit in enumerate(reg)) for reg in b]
    return Decoded(x, s, r, b)


def decode(instance: GapInstance, layout: VariableLayout, bitstring) -> Decoded:
    return {
        LayoutKind.VQE_FULL: decode_vqe_full,
        LayoutKind.VQGAP: decode_vqgap,
        LayoutKind.VQGAPE: decode_vqgape,
    }[layout.kind](instance, layout, bitstring)


# -- vectorised evaluation over basis states ---------------------------------


def basis_objective(
    instance: GapInstance, layout: VariableLayout, indices: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Profit and penalty of every basis state (or of ``indices``), as int64 arrays.

    The extended objective is ``penalty - profit``; a basis state is feasible
    exactly when its penalty is zero.
    """
    if indices is None:
        indices = np.arange(1 << layout.num_qubits, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    T, A = instance.tasks, instance.agents
    C = instance.penalty_constant

    def bit(q):
        return (indices >> q) & 1

    if layout.kind is LayoutKind.VQGAPE:
        codes = [sum(bit(q) << k for k, q in enumerate(row)) for row in layout.code_index]
        x = [[(codes[i] == j + 1).astype(np.int64) for j in range(A)] for i in range(T)]
        s = [1 - sum(row) for row in x]
    else:
        x = [[bit(q) for q in row] for row in layout.x_index]
        s = [bit(q) for q in layout.s_index]

    gain = np.zeros(len(indices), dtype=np.int64)
    penalty = np.zeros(len(indices), dtype=np.int64)
    for i in range(T):
        for j in range(A):
            gain += instance.profits[i][j] * x[i][j]
        penalty += C * (1 - sum(x[i]) - s[i]) ** 2
    for j in range(A):
        load = sum(instance.weights[i][j] * x[i][j] for i in range(T))
        if layout.kind is LayoutKind.VQE_FULL:
            r = sum(bit(q) << k for k, q in enumerate(layout.slack_index[j]))
        else:
            r = np.abs(instance.budgets[j] - load)
        penalty += C * (instance.budgets[j] - load - r) ** 2
    return gain, penalty
