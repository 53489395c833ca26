"""Dense statevector simulation of parameterised circuits.

Amplitudes are stored little-endian: qubit ``q`` is bit ``q`` of the
basis-state index.  The state array is viewed as a ``[2] * Q`` tensor, so
qubit ``q`` lives on axis ``Q - 1 - q`` and every gate is applied in place by
pairing the target axis slices under the control conditions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 26

PARAMETRIC = {"RX", "RY", "RZ", "CRY"}
ARITY = {"X": 1, "H": 1, "RX": 1, "RY": 1, "RZ": 1, "CNOT": 2, "CRY": 2}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """One gate; for controlled kinds ``qubits`` is ``(*controls, target)``."""

    name: str
    qubits: tuple[int, ...]
    slot: int | None = None
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.name != "MCX" and self.name not in ARITY:
            raise CircuitError(f"unknown gate {self.name!r}")
        if self.name == "MCX":
            if len(self.qubits) < 2:
                raise CircuitError("MCX needs at least one control")
        elif len(self.qubits) != ARITY[self.name]:
            raise CircuitError(f"{self.name} acts on {ARITY[self.name]} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.name} operands must be distinct, got {self.qubits}")
        if self.name in PARAMETRIC:
            if (self.slot is None) == (self.angle is None):
                raise CircuitError(f"{self.name} needs exactly one of a parameter slot or a fixed angle")
        elif self.slot is not None or self.angle is not None:
            raise CircuitError(f"{self.name} takes no angle")

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[:-1] if self.name in ("CNOT", "CRY", "MCX") else ()

    @property
    def target(self) -> int:
        return self.qubits[-1]

    def to_dict(self) -> dict:
        out: dict = {"gate": self.name, "qubits": list(self.qubits)}
        if self.slot is not None:
            out["param_slot"] = self.slot
        elif self.angle is not None:
            out["angle"] = self.angle
        return out


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...]
    num_params: int

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.num_qubits < 1:
            raise CircuitError("a circuit needs at least one qubit")
        used = set()
        for g in self.gates:
            if max(g.qubits) >= self.num_qubits or min(g.qubits) < 0:
                raise CircuitError(f"{g.name} on {g.qubits} outside a {self.num_qubits}-qubit register")
            if g.slot is not None:
                if not 0 <= g.slot < self.num_params:
                    raise CircuitError(f"parameter slot {g.slot} out of range")
                used.add(g.slot)
        if len(used) != self.num_params:
            missing = sorted(set(range(self.num_params)) - used)
            raise CircuitError(f"parameter slots {missing} are never used")

    @property
    def two_qubit_gate_count(self) -> int:
        return sum(1 for g in self.gates if len(g.qubits) >= 2)

    @property
    def two_qubit_depth(self) -> int:
        """Depth counting only gates acting on two or more qubits."""
        level = [0] * self.num_qubits
        for g in self.gates:
            if len(g.qubits) < 2:
                continue
            d = max(level[q] for q in g.qubits) + 1
            for q in g.qubits:
                level[q] = d
        return max(level, default=0)

    def to_json(self) -> str:
        return json.dumps([g.to_dict() for g in self.gates], indent=1) + "\n"


# -- gate application ----------------------------------------------------------


def _matrix(name: str, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if name == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if name in ("RY", "CRY"):
        return np.array([[c, -s], [s, c]], dtype=complex)
    if name == "RZ":
        return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])
    raise CircuitError(name)


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_Y = np.array([[0, -1j], [1j, 0]])


def _pair(view: np.ndarray, n: int, controls: Iterable[int], target: int):
    base = [slice(None)] * n
    for c in controls:
        base[n - 1 - c] = 1
    lo, hi = list(base), list(base)
    lo[n - 1 - target] = 0
    hi[n - 1 - target] = 1
    return tuple(lo), tuple(hi)


def _apply_1q(view, n, controls, target, u) -> None:
    lo, hi = _pair(view, n, controls, target)
    a0 = view[lo].copy()
    a1 = view[hi].copy()
    view[lo] = u[0, 0] * a0 + u[0, 1] * a1
    view[hi] = u[1, 0] * a0 + u[1, 1] * a1


def _apply_x(view, n, controls, target) -> None:
    lo, hi = _pair(view, n, controls, target)
    tmp = view[lo].copy()
    view[lo] = view[hi]
    view[hi] = tmp


def apply_gate(state: np.ndarray, gate: Gate, theta: float = 0.0, adjoint: bool = False) -> None:
    """Apply ``gate`` (or its adjoint) to ``state`` in place."""
    n = state.size.bit_length() - 1
    view = state.reshape([2] * n)
    if gate.name in ("X", "CNOT", "MCX"):
        _apply_x(view, n, gate.controls, gate.target)
    elif gate.name == "H":
        _apply_1q(view, n, (), gate.target, _H)
    else:
        u = _matrix(gate.name, -theta if adjoint else theta)
        _apply_1q(view, n, gate.controls, gate.target, u)


def _apply_pauli(state: np.ndarray, qubit: int, which: int) -> None:
    n = state.size.bit_length() - 1
    view = state.reshape([2] * n)
    if which == 1:
        _apply_x(view, n, (), qubit)
    elif which == 2:
        _apply_1q(view, n, (), qubit, _Y)
    elif which == 3:
        lo, hi = _pair(view, n, (), qubit)
        view[hi] *= -1


def _angle(gate: Gate, params: np.ndarray) -> float:
    if gate.slot is not None:
        return float(params[gate.slot])
    return float(gate.angle or 0.0)


def _check(circuit: Circuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=float).ravel()
    if params.size != circuit.num_params:
        raise CircuitError(f"circuit takes {circuit.num_params} parameters, got {params.size}")
    if circuit.num_qubits > MAX_QUBITS:
        raise CircuitError(f"{circuit.num_qubits} qubits exceeds the simulator limit of {MAX_QUBITS}")
    return params


def run(circuit: Circuit, params: Sequence[float] = ()) -> np.ndarray:
    """Statevector ``U(params)|0...0>``."""
    params = _check(circuit, params)
    state = np.zeros(1 << circuit.num_qubits, dtype=np.complex128)
    state[0] = 1.0
    for g in circuit.gates:
        apply_gate(state, g, _angle(g, params))
    return state


def probabilities(state: np.ndarray) -> np.ndarray:
    p = np.abs(state) ** 2
    return p / p.sum()


def exact_distribution(state: np.ndarray, cutoff: float = 1e-14) -> dict[str, float]:
    from vqgap.layout import index_to_bitstring

    n = state.size.bit_length() - 1
    p = np.abs(state) ** 2
    return {index_to_bitstring(int(i), n): float(p[i]) for i in np.flatnonzero(p > cutoff)}


# -- sampling ------------------------------------------------------------------


@dataclass(frozen=True)
class Histogram:
    """Measurement counts on basis-state indices (sorted, zero counts omitted)."""

    num_qubits: int
    indices: np.ndarray
    counts: np.ndarray

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> dict[str, int]:
        from vqgap.layout import index_to_bitstring

        return {
            index_to_bitstring(int(i), self.num_qubits): int(c)
            for i, c in zip(self.indices, self.counts)
        }

    @classmethod
    def from_dict(cls, counts: dict[str, int], num_qubits: int | None = None) -> "Histogram":
        from vqgap.layout import bitstring_to_index

        if num_qubits is None:
            num_qubits = len(next(iter(counts)))
        pairs = sorted((bitstring_to_index(b), int(c)) for b, c in counts.items() if c)
        idx = np.array([i for i, _ in pairs], dtype=np.int64)
        cnt = np.array([c for _, c in pairs], dtype=np.int64)
        return cls(num_qubits, idx, cnt)

    @classmethod
    def merge(cls, parts: Sequence["Histogram"]) -> "Histogram":
        idx = np.concatenate([h.indices for h in parts])
        cnt = np.concatenate([h.counts for h in parts])
        uniq, inv = np.unique(idx, return_inverse=True)
        return cls(parts[0].num_qubits, uniq, np.bincount(inv, weights=cnt).astype(np.int64))


def sample_probabilities(p: np.ndarray, shots: int, rng: np.random.Generator) -> Histogram:
    if shots < 1:
        raise CircuitError("shots must be >= 1")
    cdf = np.cumsum(p)
    draws = np.searchsorted(cdf, rng.random(shots) * cdf[-1], side="right")
    draws = np.minimum(draws, p.size - 1)
    idx, cnt = np.unique(draws, return_counts=True)
    return Histogram(p.size.bit_length() - 1, idx.astype(np.int64), cnt.astype(np.int64))


def sample(state: np.ndarray, shots: int, seed) -> Histogram:
    """Draw ``shots`` computational-basis measurements; deterministic in ``seed``."""
    return sample_probabilities(np.abs(state) ** 2, shots, np.random.default_rng(seed))


# -- noise ---------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseConfig:
    """Gate-level depolarizing noise sampled as random Pauli errors."""

    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise CircuitError(f"{name} must lie in [0, 1], got {v}")

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0


def _seed_words(seed) -> list[int]:
    return list(seed) if isinstance(seed, (list, tuple)) else [int(seed)]


def run_trajectory(circuit: Circuit, params, noise: NoiseConfig, rng: np.random.Generator) -> np.ndarray:
    """One stochastic trajectory: after each gate, a random non-identity Pauli
    on its operands with probability ``p1`` (one-qubit gates) or ``p2``."""
    params = _check(circuit, params)
    state = np.zeros(1 << circuit.num_qubits, dtype=np.complex128)
    state[0] = 1.0
    for g in circuit.gates:
        apply_gate(state, g, _angle(g, params))
        k = len(g.qubits)
        p = noise.p1 if k == 1 else noise.p2
        if p > 0.0 and rng.random() < p:
            code = int(rng.integers(1, 4**k))
            for q in g.qubits:
                _apply_pauli(state, q, code & 3)
                code >>= 2
    return state


def run_noisy(
    circuit: Circuit,
    params,
    noise: NoiseConfig,
    trajectories: int,
    shots_per_trajectory: int,
    seed,
) -> Histogram:
    """Aggregate shots over Pauli-noise trajectories.

    Trajectory ``t`` draws its errors and shots from the stream ``(*seed, t)``.
    With zero noise every trajectory is the ideal state, so the whole shot
    budget is drawn from it with ``seed`` exactly as :func:`sample` does.
    """
    if trajectories < 1:
        raise CircuitError("trajectories must be >= 1")
    if noise.is_noiseless:
        return sample(run(circuit, params), trajectories * shots_per_trajectory, seed)
    words = _seed_words(seed)
    parts = []
    for t in range(trajectories):
        rng = np.random.default_rng(words + [t])
        state = run_trajectory(circuit, params, noise, rng)
        parts.append(sample_probabilities(np.abs(state) ** 2, shots_per_trajectory, rng))
    return Histogram.merge(parts)
