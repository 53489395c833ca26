"""Evaluation indices for a batch of runs against the brute-force optimum.

A measured bitstring is *feasible* when its decoded variables make every
penalty term vanish, and *optimal* when its extended objective equals the
brute-force minimum.  ``N_feas`` / ``N_best`` are counted in the bitstring
space of the run's own layout, so a uniform sampler has ``C == 1``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from vqgap.instance import BruteForceResult, GapInstance, brute_force_solve, is_feasible
from vqgap.layout import LayoutKind, register_width
from vqgap.simulator import Histogram

REPORT_COLUMNS = [
    "algorithm", "ansatz", "reps", "shots", "noise_p1", "noise_p2", "Q", "theta", "g2", "d2",
    "P_feas_mean", "P_feas_std", "C_feas_mean", "C_best_mean",
    "best_err_pct_mean", "exp_err_pct_mean", "runs",
]


def feasibility(instance: GapInstance, x) -> bool:
    return is_feasible(instance, x)


def solution_counts(instance: GapInstance, kind: LayoutKind | str, oracle: BruteForceResult | None = None) -> tuple[int, int]:
    """``(N_best, N_feas)`` for a layout, from the per-task pattern enumeration.

    In the one-hot layouts every feasible pattern corresponds to exactly one
    zero-penalty bitstring (task slack and, for VQE, slack registers are fixed
    by the pattern).  In the encoded layout an unassigned task can be written
    with code 0 or any code above ``A``.
    """
    kind = LayoutKind(kind)
    oracle = oracle or brute_force_solve(instance)
    if kind is not LayoutKind.VQGAPE:
        return len(oracle.optimal_patterns), len(oracle.feasible_patterns)
    spare = (1 << register_width(instance.agents)) - instance.agents

    def weight(patterns: np.ndarray) -> int:
        free = (patterns == 0).sum(axis=1)
        return int(sum(spare ** int(k) for k in free))

    return weight(oracle.optimal_patterns), weight(oracle.feasible_patterns)


def coefficient_of_performance(p: float, n: int, num_qubits: int) -> float | None:
    """Success probability relative to uniform guessing; ``None`` when ``n == 0``."""
    if n < 1:
        return None
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    return p / (n / 2.0**num_qubits)


def percentage_errors(best_cost: float, expected_cost: float, oracle_cost: float) -> dict:
    """Absolute percentage errors; falls back to absolute errors when the optimum is 0."""
    if oracle_cost == 0:
        return {
            "best_error_pct": abs(best_cost),
            "expected_error_pct": abs(expected_cost),
            "absolute": True,
        }
    scale = abs(oracle_cost)
    return {
        "best_error_pct": 100.0 * abs(best_cost - oracle_cost) / scale,
        "expected_error_pct": 100.0 * abs(expected_cost - oracle_cost) / scale,
        "absolute": False,
    }


@dataclass(frozen=True)
class RunMetrics:
    P_feas: float
    P_best: float
    C_feas: float | None
    C_best: float | None
    best_error_pct: float
    expected_error_pct: float
    absolute_errors: bool
    N_best: int
    N_feas: int
    Q: int


def histogram_metrics(
    hist: Histogram,
    objective: np.ndarray,
    feasible: np.ndarray,
    oracle_cost: int,
    counts: tuple[int, int],
    expected_cost: float,
    best_cost: float,
) -> RunMetrics:
    shots = hist.shots
    p_feas = float(hist.counts[feasible[hist.indices]].sum()) / shots
    p_best = float(hist.counts[objective[hist.indices] == oracle_cost].sum()) / shots
    n_best, n_feas = counts
    Q = hist.num_qubits
    err = percentage_errors(best_cost, expected_cost, oracle_cost)
    return RunMetrics(
        P_feas=p_feas,
        P_best=p_best,
        C_feas=coefficient_of_performance(p_feas, n_feas, Q),
        C_best=coefficient_of_performance(p_best, n_best, Q),
        best_error_pct=err["best_error_pct"],
        expected_error_pct=err["expected_error_pct"],
        absolute_errors=err["absolute"],
        N_best=n_best,
        N_feas=n_feas,
        Q=Q,
    )


def run_metrics(run, table, oracle: BruteForceResult, counts: tuple[int, int] | None = None) -> RunMetrics:
    """Metrics of one :class:`~vqgap.driver.RunResult` using its layout's cost table."""
    if counts is None:
        counts = solution_counts(table.instance, table.layout.kind, oracle)
    return histogram_metrics(
        run.histogram, table.objective, table.feasible, oracle.optimal_cost, counts,
        run.expected_cost, run.best_cost,
    )


@dataclass(frozen=True)
class Stat:
    mean: float
    std: float
    min: float
    max: float

    @classmethod
    def of(cls, values) -> "Stat":
        v = np.array([x for x in values if x is not None], dtype=float)
        if v.size == 0:
            return cls(math.nan, math.nan, math.nan, math.nan)
        return cls(float(v.mean()), float(v.std()), float(v.min()), float(v.max()))


@dataclass(frozen=True)
class MetricsReport:
    label: str
    algorithm: str
    ansatz: str
    reps: int | None
    shots: int
    noise_p1: float
    noise_p2: float
    Q: int
    theta: int
    g2: int
    d2: int
    runs: int
    N_best: int
    N_feas: int
    P_feas: Stat
    P_best: Stat
    C_feas: Stat
    C_best: Stat
    best_error_pct: Stat
    expected_error_pct: Stat
    absolute_errors: bool

    def row(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "ansatz": self.ansatz,
            "reps": "" if self.reps is None else self.reps,
            "shots": self.shots,
            "noise_p1": self.noise_p1,
            "noise_p2": self.noise_p2,
            "Q": self.Q,
            "theta": self.theta,
            "g2": self.g2,
            "d2": self.d2,
            "P_feas_mean": self.P_feas.mean,
            "P_feas_std": self.P_feas.std,
            "C_feas_mean": self.C_feas.mean,
            "C_best_mean": self.C_best.mean,
            "best_err_pct_mean": self.best_error_pct.mean,
            "exp_err_pct_mean": self.expected_error_pct.mean,
            "runs": self.runs,
        }

    def to_dict(self) -> dict:
        return asdict(self)


def aggregate(
    per_run: list[RunMetrics],
    *,
    label: str,
    algorithm: str,
    ansatz: str,
    reps: int | None,
    shots: int,
    noise_p1: float = 0.0,
    noise_p2: float = 0.0,
    theta: int,
    g2: int,
    d2: int,
) -> MetricsReport:
    """Average per-run metrics; std is the population standard deviation."""
    if not per_run:
        raise ValueError("cannot aggregate an empty list of runs")
    first = per_run[0]
    return MetricsReport(
        label=label,
        algorithm=algorithm,
        ansatz=ansatz,
        reps=reps,
        shots=shots,
        noise_p1=noise_p1,
        noise_p2=noise_p2,
        Q=first.Q,
        theta=theta,
        g2=g2,
        d2=d2,
        runs=len(per_run),
        N_best=first.N_best,
        N_feas=first.N_feas,
        P_feas=Stat.of(m.P_feas for m in per_run),
        P_best=Stat.of(m.P_best for m in per_run),
        C_feas=Stat.of(m.C_feas for m in per_run),
        C_best=Stat.of(m.C_best for m in per_run),
        best_error_pct=Stat.of(m.best_error_pct for m in per_run),
        expected_error_pct=Stat.of(m.expected_error_pct for m in per_run),
        absolute_errors=any(m.absolute_errors for m in per_run),
    )


def aggregate_runs(runs, instance: GapInstance, table=None, oracle: BruteForceResult | None = None,
                   shots: int | None = None, noise_p1: float = 0.0, noise_p2: float = 0.0) -> MetricsReport:
    """Aggregate :class:`~vqgap.driver.RunResult` objects sharing a config shape."""
    from vqgap.driver import LAYOUT_OF, CostTable
    from vqgap.layout import layout as make_layout

    if not runs:
        raise ValueError("cannot aggregate an empty list of runs")
    first = runs[0]
    oracle = oracle or brute_force_solve(instance)
    table = table or CostTable(instance, make_layout(instance, LAYOUT_OF[first.algorithm]))
    counts = solution_counts(instance, table.layout.kind, oracle)
    d = first.descriptor
    return aggregate(
        [run_metrics(r, table, oracle, counts) for r in runs],
        label=first.label,
        algorithm=first.algorithm.value,
        ansatz=first.ansatz.value,
        reps=first.reps if first.ansatz.value == "VQGAPE_ESU2" else None,
        shots=shots if shots is not None else first.histogram.shots,
        noise_p1=noise_p1,
        noise_p2=noise_p2,
        theta=d.num_params,
        g2=d.two_qubit_gates,
        d2=d.two_qubit_depth,
    )
