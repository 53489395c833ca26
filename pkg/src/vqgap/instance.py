"""Generalized Assignment Problem instances, objectives and an exact solver.

A task is either assigned to exactly one agent or left unassigned; every
agent has an integer resource budget.  Agents are indexed ``0..A-1`` in
matrices, while *assignment patterns* (one entry per task) use ``0`` for
"unassigned" and ``j + 1`` for "assigned to agent j".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Sequence

import numpy as np

MAX_ENUMERATION = 10**7

Matrix = tuple[tuple[int, ...], ...]


class InstanceError(ValueError):
    """Raised for malformed instances or mismatched assignments."""

    def __init__(self, problems: Sequence[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class GapInstance:
    tasks: int
    agents: int
    profits: Matrix
    weights: Matrix
    budgets: tuple[int, ...]

    def __post_init__(self):
        # normalise nested lists to tuples so instances stay hashable
        object.__setattr__(self, "profits", _as_matrix(self.profits))
        object.__setattr__(self, "weights", _as_matrix(self.weights))
        object.__setattr__(self, "budgets", tuple(self.budgets))

    @property
    def penalty_constant(self) -> int:
        """``1 + sum(p)``: larger than any achievable profit."""
        return 1 + sum(sum(row) for row in self.profits)

    def to_dict(self) -> dict:
        return {
            "tasks": self.tasks,
            "agents": self.agents,
            "profits": [list(r) for r in self.profits],
            "weights": [list(r) for r in self.weights],
            "budgets": list(self.budgets),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GapInstance":
        try:
            inst = cls(
                tasks=data["tasks"],
                agents=data["agents"],
                profits=data["profits"],
                weights=data["weights"],
                budgets=data["budgets"],
            )
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"malformed instance document: {exc}") from exc
        problems = validate(inst)
        if problems:
            raise InstanceError(problems)
        return inst

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def load(cls, path: str | Path) -> "GapInstance":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _as_matrix(rows) -> Matrix:
    try:
        return tuple(tuple(r) for r in rows)
    except TypeError:
        return tuple(rows)


def validate(instance: GapInstance) -> list[str]:
    """Return every invariant violation; an empty list means the instance is valid."""
    errors = []
    T, A = instance.tasks, instance.agents
    if not isinstance(T, int) or T < 1:
        errors.append(f"tasks: must be a positive integer, got {T!r}")
    if not isinstance(A, int) or A < 1:
        errors.append(f"agents: must be a positive integer, got {A!r}")
    if errors:
        return errors

    for name, lower in (("profits", 0), ("weights", 1)):
        matrix = getattr(instance, name)
        if len(matrix) != T:
            errors.append(f"{name}: expected {T} rows, got {len(matrix)}")
        for i, row in enumerate(matrix):
            if not isinstance(row, tuple) or len(row) != A:
                size = len(row) if isinstance(row, tuple) else "scalar"
                errors.append(f"{name}[{i}]: expected {A} entries, got {size}")
                continue
            for j, v in enumerate(row):
                if not _is_int(v) or v < lower:
                    errors.append(f"{name}[{i}][{j}]: must be an integer >= {lower}, got {v!r}")
    if len(instance.budgets) != A:
        errors.append(f"budgets: expected {A} entries, got {len(instance.budgets)}")
    for j, b in enumerate(instance.budgets):
        if not _is_int(b) or b < 1:
            errors.append(f"budgets[{j}]: must be an integer >= 1, got {b!r}")
    return errors


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _check_x(instance: GapInstance, x) -> None:
    if len(x) != instance.tasks or any(len(row) != instance.agents for row in x):
        raise InstanceError(
            f"assignment must be {instance.tasks}x{instance.agents}, got {len(x)} rows"
        )


def profit(instance: GapInstance, x) -> int:
    _check_x(instance, x)
    return sum(
        int(p) * int(b)
        for prow, xrow in zip(instance.profits, x)
        for p, b in zip(prow, xrow)
    )


def agent_loads(instance: GapInstance, x) -> list[int]:
    _check_x(instance, x)
    return [
        sum(int(instance.weights[i][j]) * int(x[i][j]) for i in range(instance.tasks))
        for j in range(instance.agents)
    ]


def is_feasible(instance: GapInstance, x) -> bool:
    """At most one agent per task and no agent over budget."""
    _check_x(instance, x)
    if any(sum(int(b) for b in row) > 1 for row in x):
        return False
    return all(load <= b for load, b in zip(agent_loads(instance, x), instance.budgets))


def extended_objective(instance: GapInstance, x, s, r) -> int:
    """Penalised minimisation objective over assignment, task slack and residuals.

    Both penalty terms vanish exactly when ``sum_j x_ij + s_i == 1`` for every
    task and ``sum_i w_ij x_ij + r_j == B_j`` for every agent.
    """
    _check_x(instance, x)
    if len(s) != instance.tasks:
        raise InstanceError(f"s must have {instance.tasks} entries, got {len(s)}")
    if len(r) != instance.agents:
        raise InstanceError(f"r must have {instance.agents} entries, got {len(r)}")
    if any(int(v) < 0 for v in r):
        raise InstanceError(f"residuals must be non-negative, got {list(r)}")
    C = instance.penalty_constant
    value = -profit(instance, x)
    for row, si in zip(x, s):
        value += C * (1 - sum(int(b) for b in row) - int(si)) ** 2
    for load, b, rj in zip(agent_loads(instance, x), instance.budgets, r):
        value += C * (b - load - int(rj)) ** 2
    return value


def pattern_to_x(pattern: Sequence[int], agents: int) -> list[list[int]]:
    """Expand a per-task agent pattern (0 = unassigned, j = agent j-1) into x."""
    return [[1 if code == j + 1 else 0 for j in range(agents)] for code in pattern]


def x_to_pattern(x) -> tuple[int, ...]:
    pattern = []
    for row in x:
        ones = [j for j, b in enumerate(row) if b]
        if len(ones) > 1:
            raise InstanceError("task assigned to more than one agent")
        pattern.append(ones[0] + 1 if ones else 0)
    return tuple(pattern)


@dataclass(frozen=True)
class BruteForceResult:
    optimal_cost: int
    agents: int
    optimal_patterns: np.ndarray = field(repr=False)
    feasible_patterns: np.ndarray = field(repr=False)

    @property
    def optimal_profit(self) -> int:
        return -self.optimal_cost

    @property
    def feasible_count(self) -> int:
        return len(self.feasible_patterns)

    @property
    def optimal_set(self) -> list[list[list[int]]]:
        return [pattern_to_x(p, self.agents) for p in self.optimal_patterns.tolist()]


def brute_force_solve(instance: GapInstance, chunk: int = 1 << 18) -> BruteForceResult:
    """Enumerate all ``(A+1)^T`` one-agent-per-task patterns.

    Only patterns satisfying the per-task constraint are considered; among
    those the feasible ones are kept.  Since the penalty constant exceeds the
    total profit, the minimum of the extended objective is minus the best
    feasible profit.
    """
    T, A = instance.tasks, instance.agents
    total = (A + 1) ** T
    if total > MAX_ENUMERATION:
        raise InstanceError(
            f"(A+1)^T = {total} patterns exceeds the enumeration bound {MAX_ENUMERATION}"
        )
    # column 0 is the "unassigned" choice
    p_ext = np.zeros((T, A + 1), dtype=np.int64)
    w_ext = np.zeros((T, A + 1), dtype=np.int64)
    p_ext[:, 1:] = instance.profits
    w_ext[:, 1:] = instance.weights
    budgets = np.asarray(instance.budgets, dtype=np.int64)
    radix = (A + 1) ** np.arange(T, dtype=np.int64)

    best = None
    optimal, feasible = [], []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        codes = (idx[:, None] // radix[None, :]) % (A + 1)
        loads = np.zeros((len(idx), A), dtype=np.int64)
        gains = np.zeros(len(idx), dtype=np.int64)
        for i in range(T):
            gains += p_ext[i, codes[:, i]]
            for j in range(A):
                loads[:, j] += w_ext[i, j + 1] * (codes[:, i] == j + 1)
        ok = np.all(loads <= budgets, axis=1)
        codes, gains = codes[ok], gains[ok]
        feasible.append(codes.astype(np.int8))
        if len(gains) == 0:
            continue
        top = int(gains.max())
        if best is None or top > best:
            best = top
            optimal = [codes[gains == top].astype(np.int8)]
        elif top == best:
            optimal.append(codes[gains == top].astype(np.int8))

    # the all-unassigned pattern is always feasible, so best is set
    return BruteForceResult(
        optimal_cost=-best,
        agents=A,
        optimal_patterns=np.concatenate(optimal),
        feasible_patterns=np.concatenate(feasible),
    )


def generate_instance(
    tasks: int,
    agents: int,
    max_budget: int = 3,
    max_profit: int = 10,
    seed: int = 0,
) -> GapInstance:
    """Random instance with independent uniform integer entries.

    Weights lie in ``1..max_budget`` and profits in ``1..max_profit``.  Budgets
    are drawn from the upper half-range ``2**(m-1)..max_budget`` with
    ``m = ceil(log2(max_budget + 1))``, so every slack register has the full
    width ``m`` and the VQE qubit count depends only on ``T``, ``A`` and
    ``max_budget`` (22 for T=4, A=3, max_budget=3).
    """
    if min(tasks, agents, max_budget, max_profit) < 1:
        raise InstanceError("tasks, agents, max_budget and max_profit must all be >= 1")
    rng = np.random.default_rng(seed)
    weights = rng.integers(1, max_budget, size=(tasks, agents), endpoint=True)
    low_budget = 1 << (int(max_budget).bit_length() - 1)
    budgets = rng.integers(low_budget, max_budget, size=agents, endpoint=True)
    profits = rng.integers(1, max_profit, size=(tasks, agents), endpoint=True)
    return GapInstance(
        tasks=tasks,
        agents=agents,
        profits=profits.tolist(),
        weights=weights.tolist(),
        budgets=budgets.tolist(),
    )


def all_patterns(instance: GapInstance):
    """Iterate every per-task agent pattern; small instances only."""
    return product(range(instance.agents + 1), repeat=instance.tasks)
