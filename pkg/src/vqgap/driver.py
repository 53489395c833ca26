"""Hybrid loop: sample the ansatz, score the shots classically, update angles."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from vqgap import ansatz as ansatz_lib
from vqgap.ansatz import AnsatzDescriptor, AnsatzName
from vqgap.instance import GapInstance, InstanceError, extended_objective
from vqgap.ising import IsingModel, energies, evaluate, ising_for
from vqgap.layout import (
    LayoutKind,
    VariableLayout,
    basis_objective,
    decode_vqgap,
    decode_vqgape,
    index_to_bitstring,
    layout as make_layout,
)
from vqgap.optimize import InitStrategy, Method, OptimizeResult, TraceRow, initial_parameters, minimize
from vqgap.simulator import Circuit, Histogram, NoiseConfig, probabilities, run, run_noisy, sample

log = logging.getLogger(__name__)


class Algorithm(str, enum.Enum):
    VQE = "VQE"
    VQGAP = "VQGAP"
    VQGAPE = "VQGAPE"


LAYOUT_OF = {
    Algorithm.VQE: LayoutKind.VQE_FULL,
    Algorithm.VQGAP: LayoutKind.VQGAP,
    Algorithm.VQGAPE: LayoutKind.VQGAPE,
}
LEGAL_ANSATZE = {
    Algorithm.VQE: {AnsatzName.VQE_REF},
    Algorithm.VQGAP: {AnsatzName.VQGAP_REF},
    Algorithm.VQGAPE: {AnsatzName.VQGAPE_RXL, AnsatzName.VQGAPE_ESU2},
}
DEFAULT_ANSATZ = {
    Algorithm.VQE: AnsatzName.VQE_REF,
    Algorithm.VQGAP: AnsatzName.VQGAP_REF,
    Algorithm.VQGAPE: AnsatzName.VQGAPE_RXL,
}

# independent random streams derived from a run seed
_EVAL, _FINAL, _INIT, _OPT = 0, 1, 2, 3


@dataclass(frozen=True)
class AlgorithmConfig:
    algorithm: Algorithm
    ansatz: AnsatzName | None = None
    reps: int = 1
    shots: int = 4096
    method: Method = Method.NELDER_MEAD
    max_iterations: int = 300
    tolerance: float = 1e-3
    initial_step: float = 0.5
    noise: NoiseConfig | None = None
    trajectories: int = 16
    seed: int = 0
    init: InitStrategy = InitStrategy.UNIFORM_RANDOM
    exact: bool = False  # score exact distributions instead of shots; for testing

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        name = DEFAULT_ANSATZ[self.algorithm] if self.ansatz is None else AnsatzName(self.ansatz)
        object.__setattr__(self, "ansatz", name)
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "init", InitStrategy(self.init))
        if name not in LEGAL_ANSATZE[self.algorithm]:
            raise InstanceError(f"ansatz {name.value} cannot be used with {self.algorithm.value}")
        if self.shots < 1:
            raise InstanceError("shots must be >= 1")
        if self.reps < 1:
            raise InstanceError("reps must be >= 1")
        if self.trajectories < 1:
            raise InstanceError("trajectories must be >= 1")

    @property
    def label(self) -> str:
        if self.ansatz is AnsatzName.VQGAPE_ESU2:
            return f"VQGAPE-ESU2-r{self.reps}"
        if self.ansatz is AnsatzName.VQGAPE_RXL:
            return "VQGAPE-RXL"
        return self.algorithm.value

    @property
    def noisy(self) -> bool:
        return self.noise is not None and not self.noise.is_noiseless

    def with_seed(self, seed: int) -> "AlgorithmConfig":
        return replace(self, seed=seed)


class CostTable:
    """Cost, exact objective and feasibility of every basis state of a layout."""

    def __init__(self, instance: GapInstance, layout: VariableLayout, chunk: int = 1 << 18):
        self.instance = instance
        self.layout = layout
        size = 1 << layout.num_qubits
        self.objective = np.empty(size, dtype=np.int64)
        self.feasible = np.empty(size, dtype=bool)
        for start in range(0, size, chunk):
            idx = np.arange(start, min(start + chunk, size), dtype=np.int64)
            gain, penalty = basis_objective(instance, layout, idx)
            self.objective[start:start + len(idx)] = penalty - gain
            self.feasible[start:start + len(idx)] = penalty == 0
        if layout.kind is LayoutKind.VQE_FULL:
            self.ising: IsingModel | None = ising_for(instance, layout)
            self.cost = energies(self.ising)
        else:
            self.ising = None
            self.cost = self.objective.astype(np.float64)
        bad = np.flatnonzero(~np.isfinite(self.cost))
        if bad.size:
            raise FloatingPointError(
                f"non-finite cost at bitstring {index_to_bitstring(int(bad[0]), layout.num_qubits)}"
            )

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    def mean(self, hist: Histogram) -> float:
        return float(np.dot(hist.counts, self.cost[hist.indices]) / hist.shots)


def cost_of_bitstring(config: AlgorithmConfig, instance: GapInstance, layout: VariableLayout, bitstring) -> float:
    """Score one measured bitstring (slow path, used as a cross-check of :class:`CostTable`)."""
    if len(bitstring) != layout.num_qubits:
        raise InstanceError(f"bitstring has {len(bitstring)} bits, layout needs {layout.num_qubits}")
    if config.algorithm is Algorithm.VQE:
        return evaluate(ising_for(instance, layout), bitstring)
    decoder = decode_vqgap if config.algorithm is Algorithm.VQGAP else decode_vqgape
    d = decoder(instance, layout, bitstring)
    return float(extended_objective(instance, d.x, d.s, d.r))


@dataclass
class Problem:
    """Everything a run needs that depends only on (instance, config shape)."""

    instance: GapInstance
    config: AlgorithmConfig

    @cached_property
    def layout(self) -> VariableLayout:
        return make_layout(self.instance, LAYOUT_OF[self.config.algorithm])

    @cached_property
    def circuit_and_descriptor(self) -> tuple[Circuit, AnsatzDescriptor]:
        return ansatz_lib.build(self.config.ansatz, self.instance, self.layout, self.config.reps)

    @property
    def circuit(self) -> Circuit:
        return self.circuit_and_descriptor[0]

    @property
    def descriptor(self) -> AnsatzDescriptor:
        return self.circuit_and_descriptor[1]

    @cached_property
    def table(self) -> CostTable:
        return CostTable(self.instance, self.layout)


def measure(config: AlgorithmConfig, circuit: Circuit, params, seed) -> Histogram:
    """One batch of ``config.shots`` measurements, noisy if configured."""
    if config.noisy:
        per = max(1, config.shots // config.trajectories)
        return run_noisy(circuit, params, config.noise, config.trajectories, per, seed)
    return sample(run(circuit, params), config.shots, seed)


def estimate_cost(config: AlgorithmConfig, problem: Problem, params, call: int) -> float:
    """Shot estimate of the expected cost; call ``k`` uses the stream ``(seed, 0, k)``."""
    if config.exact:
        p = probabilities(run(problem.circuit, params))
        return float(np.dot(p, problem.table.cost))
    hist = measure(config, problem.circuit, params, [config.seed, _EVAL, call])
    return problem.table.mean(hist)


@dataclass
class RunResult:
    label: str
    algorithm: Algorithm
    ansatz: AnsatzName
    reps: int
    seed: int
    num_qubits: int
    descriptor: AnsatzDescriptor
    theta0: np.ndarray
    theta: np.ndarray
    histogram: Histogram
    initial_histogram: Histogram
    expected_cost: float
    initial_expected_cost: float
    best_cost: float
    best_bitstring: str
    optimizer: OptimizeResult
    costs: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = self.descriptor
        return {
            "label": self.label,
            "algorithm": self.algorithm.value,
            "ansatz": self.ansatz.value,
            "reps": self.reps,
            "seed": self.seed,
            "num_qubits": self.num_qubits,
            "bit_order": "qubit 0 is the first character",
            "descriptor": {
                "num_params": d.num_params,
                "two_qubit_gates": d.two_qubit_gates,
                "two_qubit_depth": d.two_qubit_depth,
            },
            "theta0": self.theta0.tolist(),
            "theta": self.theta.tolist(),
            "expected_cost": self.expected_cost,
            "initial_expected_cost": self.initial_expected_cost,
            "best_cost": self.best_cost,
            "best_bitstring": self.best_bitstring,
            "status": self.optimizer.status,
            "nfev": self.optimizer.nfev,
            "histogram": self.histogram.to_dict(),
            "initial_histogram": self.initial_histogram.to_dict(),
            "costs": self.costs,
            "trace": [
                {"iteration": r.iteration, "cost": r.cost, "best_cost": r.best_cost, "eval_count": r.eval_count}
                for r in self.optimizer.trace
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunResult":
        """Rebuild a result from its JSON form; trace rows come back without parameters."""
        ansatz = AnsatzName(data["ansatz"])
        desc = data["descriptor"]
        reps = data["reps"] if ansatz is AnsatzName.VQGAPE_ESU2 else None
        trace = [
            TraceRow(r["iteration"], r["cost"], r["best_cost"], r["eval_count"], np.empty(0))
            for r in data["trace"]
        ]
        theta = np.array(data["theta"], dtype=float)
        n = data["num_qubits"]
        return cls(
            label=data["label"],
            algorithm=Algorithm(data["algorithm"]),
            ansatz=ansatz,
            reps=data["reps"],
            seed=data["seed"],
            num_qubits=n,
            descriptor=AnsatzDescriptor(ansatz, n, desc["num_params"], desc["two_qubit_gates"],
                                        desc["two_qubit_depth"], reps),
            theta0=np.array(data["theta0"], dtype=float),
            theta=theta,
            histogram=Histogram.from_dict(data["histogram"], n),
            initial_histogram=Histogram.from_dict(data["initial_histogram"], n),
            expected_cost=data["expected_cost"],
            initial_expected_cost=data["initial_expected_cost"],
            best_cost=data["best_cost"],
            best_bitstring=data["best_bitstring"],
            optimizer=OptimizeResult(theta, trace[-1].best_cost if trace else float("nan"), trace,
                                     data["status"], data["nfev"]),
            costs=dict(data["costs"]),
        )


def _summarise(table: CostTable, hist: Histogram) -> tuple[float, float, str, dict[str, float]]:
    costs = table.cost[hist.indices]
    best = int(np.argmin(costs))
    n = table.num_qubits
    scored = {index_to_bitstring(int(i), n): float(c) for i, c in zip(hist.indices, costs)}
    return table.mean(hist), float(costs[best]), index_to_bitstring(int(hist.indices[best]), n), scored


def run_algorithm(config: AlgorithmConfig, instance: GapInstance, problem: Problem | None = None) -> RunResult:
    """layout -> ansatz -> minimise the estimated cost -> resample at the final angles."""
    problem = problem or Problem(instance, config)
    circuit, descriptor = problem.circuit, problem.descriptor
    table = problem.table

    theta0 = initial_parameters(circuit.num_params, config.init, seed=[config.seed, _INIT])
    calls = 0

    def objective(theta: np.ndarray) -> float:
        nonlocal calls
        calls += 1
        return estimate_cost(config, problem, theta, calls)

    opt = minimize(
        objective,
        theta0,
        method=config.method,
        max_iterations=config.max_iterations,
        tolerance=config.tolerance,
        seed=[config.seed, _OPT],
        initial_step=config.initial_step,
    )
    theta = opt.x if opt.trace else theta0

    initial_hist = measure(config, circuit, theta0, [config.seed, _FINAL, 0])
    final_hist = measure(config, circuit, theta, [config.seed, _FINAL, 1])
    initial_mean = table.mean(initial_hist)
    mean, best_cost, best_bits, scored = _summarise(table, final_hist)
    log.debug("%s seed=%d: %d evals, E0=%.3f -> E=%.3f, best=%s", config.label, config.seed, opt.nfev, initial_mean, mean, best_cost)
    return RunResult(
        label=config.label,
        algorithm=config.algorithm,
        ansatz=config.ansatz,
        reps=config.reps,
        seed=config.seed,
        num_qubits=circuit.num_qubits,
        descriptor=descriptor,
        theta0=theta0,
        theta=np.asarray(theta),
        histogram=final_hist,
        initial_histogram=initial_hist,
        expected_cost=mean,
        initial_expected_cost=initial_mean,
        best_cost=best_cost,
        best_bitstring=best_bits,
        optimizer=opt,
        costs=scored,
    )
