"""Derivative-free minimisers for shot-noisy variational costs.

All methods share one contract: ``minimize(f, x0, method, ...)`` returns the
best point found together with a per-iteration trace whose ``best_cost``
column never increases.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class Method(str, enum.Enum):
    NELDER_MEAD = "NELDER_MEAD"
    SPSA = "SPSA"
    COBYLA = "COBYLA"


class InitStrategy(str, enum.Enum):
    ZEROS = "ZEROS"
    UNIFORM_RANDOM = "UNIFORM_RANDOM"


class OptimizerError(RuntimeError):
    pass


@dataclass
class TraceRow:
    iteration: int
    cost: float
    best_cost: float
    eval_count: int
    params: np.ndarray = field(repr=False)


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    trace: list[TraceRow]
    status: str  # "max-iterations" | "tolerance" | "stall"
    nfev: int

    def trace_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iteration", "cost", "best_cost", "eval_count"])
        for row in self.trace:
            writer.writerow([row.iteration, repr(row.cost), repr(row.best_cost), row.eval_count])
        return buf.getvalue()


class _Counted:
    """Evaluation counter that rejects non-finite values."""

    def __init__(self, f: Callable[[np.ndarray], float]):
        self.f = f
        self.count = 0

    def __call__(self, x: np.ndarray) -> float:
        self.count += 1
        y = float(self.f(np.array(x, dtype=float)))
        if not math.isfinite(y):
            raise OptimizerError(f"objective returned {y} at evaluation {self.count}, x={list(x)}")
        return y


def initial_parameters(n: int, strategy: InitStrategy | str = InitStrategy.ZEROS, seed=None) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one parameter")
    strategy = InitStrategy(strategy)
    if strategy is InitStrategy.ZEROS:
        return np.zeros(n)
    return np.random.default_rng(seed).uniform(0.0, 2 * np.pi, size=n)


def minimize(
    f: Callable[[np.ndarray], float],
    x0,
    method: Method | str = Method.NELDER_MEAD,
    max_iterations: int = 300,
    tolerance: float = 1e-3,
    seed=None,
    initial_step: float = 0.5,
    stall_iterations: int | None = None,
) -> OptimizeResult:
    """Minimise ``f`` starting at ``x0``.

    ``max_iterations = 0`` returns ``x0`` untouched without evaluating ``f``.
    ``stall_iterations`` stops early once the best cost has not improved for
    that many iterations.
    """
    x0 = np.array(x0, dtype=float).ravel()
    if x0.size == 0:
        raise ValueError("x0 must not be empty")
    if max_iterations < 0:
        raise ValueError("max_iterations must be >= 0")
    fc = _Counted(f)
    if max_iterations == 0:
        return OptimizeResult(x0, math.nan, [], "max-iterations", 0)
    method = Method(method)
    if method is Method.NELDER_MEAD:
        return _nelder_mead(fc, x0, max_iterations, tolerance, initial_step, stall_iterations)
    if method is Method.SPSA:
        return _spsa(fc, x0, max_iterations, tolerance, seed, initial_step, stall_iterations)
    return _cobyla(fc, x0, max_iterations, tolerance, initial_step)


class _Tracker:
    def __init__(self, fc: _Counted, stall: int | None):
        self.fc = fc
        self.trace: list[TraceRow] = []
        self.best_x: np.ndarray | None = None
        self.best = math.inf
        self.stall = stall
        self._since = 0

    def offer(self, x, y) -> None:
        if y < self.best:
            self.best, self.best_x = y, np.array(x, dtype=float)
            self._since = -1

    def record(self, cost: float) -> None:
        self._since += 1
        self.trace.append(
            TraceRow(len(self.trace) + 1, cost, self.best, self.fc.count, self.best_x.copy())
        )

    @property
    def stalled(self) -> bool:
        return self.stall is not None and self._since >= self.stall

    def result(self, status: str) -> OptimizeResult:
        return OptimizeResult(self.best_x, self.best, self.trace, status, self.fc.count)


def _nelder_mead(fc, x0, max_iter, tol, step, stall) -> OptimizeResult:
    n = x0.size
    track = _Tracker(fc, stall)
    simplex = np.vstack([x0] + [x0 + step * e for e in np.eye(n)])
    values = np.array([fc(v) for v in simplex])
    for v, y in zip(simplex, values):
        track.offer(v, y)

    status = "max-iterations"
    for _ in range(max_iter):
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]

        xr = centroid + (centroid - worst)
        yr = fc(xr)
        track.offer(xr, yr)
        if yr < values[0]:
            xe = centroid + 2.0 * (centroid - worst)
            ye = fc(xe)
            track.offer(xe, ye)
            simplex[-1], values[-1] = (xe, ye) if ye < yr else (xr, yr)
        elif yr < values[-2]:
            simplex[-1], values[-1] = xr, yr
        else:
            if yr < values[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (worst - centroid)
            yc = fc(xc)
            track.offer(xc, yc)
            if yc < min(yr, values[-1]):
                simplex[-1], values[-1] = xc, yc
            else:
                simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
                values[1:] = [fc(v) for v in simplex[1:]]
                for v, y in zip(simplex[1:], values[1:]):
                    track.offer(v, y)

        track.record(float(values.min()))
        size = np.max(np.abs(simplex - simplex[np.argmin(values)]))
        if size < tol:
            status = "tolerance"
            break
        if track.stalled:
            status = "stall"
            break
    return track.result(status)


def _spsa(fc, x0, max_iter, tol, seed, step, stall) -> OptimizeResult:
    """Simultaneous-perturbation stochastic approximation with standard gain decay."""
    rng = np.random.default_rng(seed)
    track = _Tracker(fc, stall)
    alpha, gamma = 0.602, 0.101
    big_a = 0.1 * max_iter
    c = step / 2

    # calibrate the learning rate so the first update moves about `step`
    mags = []
    for _ in range(5):
        delta = rng.choice([-1.0, 1.0], size=x0.size)
        mags.append(abs(fc(x0 + c * delta) - fc(x0 - c * delta)) / (2 * c))
    a = step * (big_a + 1) ** alpha / max(float(np.mean(mags)), 1e-12)

    x = x0.copy()
    status = "max-iterations"
    for k in range(max_iter):
        ak = a / (k + 1 + big_a) ** alpha
        ck = c / (k + 1) ** gamma
        delta = rng.choice([-1.0, 1.0], size=x.size)
        xp, xm = x + ck * delta, x - ck * delta
        yp, ym = fc(xp), fc(xm)
        track.offer(xp, yp)
        track.offer(xm, ym)
        update = ak * (yp - ym) / (2 * ck) * delta
        x = x - update
        track.record(0.5 * (yp + ym))
        if np.max(np.abs(update)) < tol and k > 0:
            status = "tolerance"
            break
        if track.stalled:
            status = "stall"
            break
    return track.result(status)


def _cobyla(fc, x0, max_iter, tol, step) -> OptimizeResult:
    from scipy.optimize import minimize as scipy_minimize

    track = _Tracker(fc, None)

    def wrapped(x):
        y = fc(x)
        track.offer(x, y)
        track.record(y)
        return y

    res = scipy_minimize(
        wrapped, x0, method="COBYLA", options={"maxiter": max_iter, "rhobeg": step, "tol": tol}
    )
    status = "tolerance" if res.status == 1 else "max-iterations"
    return track.result(status)
