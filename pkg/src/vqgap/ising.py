"""Penalty QUBO compilation and the equivalent diagonal Ising Hamiltonian.

Coefficients are accumulated exactly (ints / Fractions) and converted to
floats once, since penalty terms grow like ``C * B_j**2``.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from vqgap.instance import GapInstance, InstanceError
from vqgap.layout import LayoutKind, VariableLayout


@dataclass(frozen=True)
class QuboModel:
    """``offset + sum_{a<=b} q[a,b] x_a x_b`` over binary ``x``; ``q[a,a]`` is linear."""

    num_vars: int
    coefficients: Mapping[tuple[int, int], Fraction]
    offset: Fraction

    def value(self, bits) -> Fraction:
        bits = [int(b) for b in bits]
        if len(bits) != self.num_vars:
            raise InstanceError(f"expected {self.num_vars} bits, got {len(bits)}")
        total = Fraction(self.offset)
        for (a, b), c in self.coefficients.items():
            total += c * bits[a] * bits[b]
        return total


def _add_squared(acc, terms: dict[int, int], const: int, weight: int) -> int:
    """Add ``weight * (const + sum_v terms[v] x_v)**2`` into ``acc``; return the constant part."""
    items = sorted(terms.items())
    for n, (u, cu) in enumerate(items):
        # x_u**2 == x_u for binaries
        acc[(u, u)] += weight * (cu * cu + 2 * const * cu)
        for v, cv in items[n + 1:]:
            acc[(u, v)] += weight * 2 * cu * cv
    return weight * const * const


def build_qubo(instance: GapInstance, layout: VariableLayout) -> QuboModel:
    """Expand the extended objective with residuals held in binary slack registers."""
    if layout.kind is not LayoutKind.VQE_FULL:
        raise InstanceError("QUBO compilation needs the VQE_FULL layout")
    C = instance.penalty_constant
    acc: dict[tuple[int, int], int] = defaultdict(int)
    offset = 0
    for i, row in enumerate(layout.x_index):
        for j, q in enumerate(row):
            acc[(q, q)] -= instance.profits[i][j]
    # C * (1 - sum_j x_ij - s_i)^2
    for i, row in enumerate(layout.x_index):
        terms = {q: -1 for q in row}
        terms[layout.s_index[i]] = -1
        offset += _add_squared(acc, terms, 1, C)
    # C * (B_j - sum_i w_ij x_ij - sum_k 2^(k-1) b_jk)^2
    for j, reg in enumerate(layout.slack_index):
        terms = {layout.x_index[i][j]: -instance.weights[i][j] for i in range(instance.tasks)}
        for k, q in enumerate(reg):
            terms[q] = -(1 << k)
        offset += _add_squared(acc, terms, instance.budgets[j], C)
    coeffs = {key: Fraction(v) for key, v in sorted(acc.items()) if v != 0}
    return QuboModel(layout.num_qubits, coeffs, Fraction(offset))


@dataclass(frozen=True)
class IsingModel:
    """``offset + sum_i h_i z_i - sum_{i>j} J_ij z_i z_j`` with ``z = 1 - 2 * bit``."""

    num_qubits: int
    h: tuple[float, ...]
    couplings: Mapping[tuple[int, int], float]  # keys (i, j) with i > j
    offset: float

    def to_dict(self) -> dict:
        return {
            "offset": self.offset,
            "h": list(self.h),
            "J": [[i, j, c] for (i, j), c in sorted(self.couplings.items())],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "IsingModel":
        h = tuple(float(v) for v in data["h"])
        couplings = {(int(i), int(j)): float(c) for i, j, c in data["J"]}
        return cls(len(h), h, couplings, float(data["offset"]))


def to_ising(qubo: QuboModel) -> IsingModel:
    offset = Fraction(qubo.offset)
    h = [Fraction(0)] * qubo.num_vars
    J: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
    for (a, b), c in qubo.coefficients.items():
        if a == b:
            # c * (1 - z)/2
            offset += c / 2
            h[a] -= c / 2
        else:
            # c * (1 - z_a)(1 - z_b)/4; the pair term enters with a minus sign
            offset += c / 4
            h[a] -= c / 4
            h[b] -= c / 4
            i, j = max(a, b), min(a, b)
            J[(i, j)] -= c / 4
    return IsingModel(
        num_qubits=qubo.num_vars,
        h=tuple(float(v) for v in h),
        couplings={k: float(v) for k, v in sorted(J.items()) if v != 0},
        offset=float(offset),
    )


def evaluate(ising: IsingModel, bitstring) -> float:
    bits = [int(b) for b in bitstring]
    if len(bits) != ising.num_qubits:
        raise InstanceError(f"expected {ising.num_qubits} bits, got {len(bits)}")
    z = [1 - 2 * b for b in bits]
    value = ising.offset + sum(hi * zi for hi, zi in zip(ising.h, z))
    value -= sum(c * z[i] * z[j] for (i, j), c in ising.couplings.items())
    return value


def energies(ising: IsingModel) -> np.ndarray:
    """Diagonal of the Hamiltonian: the Ising value of every basis state."""
    n = ising.num_qubits
    out = np.empty(1 << n, dtype=np.float64)
    step = 1 << min(n, 18)
    for start in range(0, 1 << n, step):
        idx = np.arange(start, start + step, dtype=np.int64)
        z = [(1 - 2 * ((idx >> q) & 1)).astype(np.float64) for q in range(n)]
        chunk = np.full(step, ising.offset, dtype=np.float64)
        for q, hq in enumerate(ising.h):
            if hq:
                chunk += hq * z[q]
        for (i, j), c in ising.couplings.items():
            chunk -= c * (z[i] * z[j])
        out[start:start + step] = chunk
    return out


def expectation(ising: IsingModel, distribution: Mapping[str, float]) -> float:
    """Expected Ising value under a ``bitstring -> probability`` distribution."""
    total = sum(distribution.values())
    if abs(total - 1.0) > 1e-9:
        raise InstanceError(f"distribution sums to {total}, not 1")
    return sum(p * evaluate(ising, b) for b, p in distribution.items())


def ising_for(instance: GapInstance, layout: VariableLayout) -> IsingModel:
    return to_ising(build_qubo(instance, layout))
