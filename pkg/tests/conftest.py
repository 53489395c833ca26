import itertools
import sys

import pytest

from vqgap.instance import GapInstance, generate_instance


def all_x(T, A):
    """Every binary T x A matrix, as nested lists."""
    for flat in itertools.product((0, 1), repeat=T * A):
        yield [list(flat[i * A:(i + 1) * A]) for i in range(T)]


def naive_optimum(inst):
    """Best feasible profit by enumerating all raw binary matrices."""
    best, count = None, 0
    for x in all_x(inst.tasks, inst.agents):
        if any(sum(r) > 1 for r in x):
            continue
        loads = [sum(inst.weights[i][j] * x[i][j] for i in range(inst.tasks)) for j in range(inst.agents)]
        if any(l > b for l, b in zip(loads, inst.budgets)):
            continue
        count += 1
        value = sum(inst.profits[i][j] * x[i][j] for i in range(inst.tasks) for j in range(inst.agents))
        best = value if best is None else max(best, value)
    return best, count


@pytest.fixture
def tiny():
    return GapInstance(1, 1, [[3]], [[1]], [1])


@pytest.fixture
def small():
    return GapInstance(
        tasks=2, agents=2,
        profits=[[4, 2], [3, 5]],
        weights=[[2, 1], [2, 3]],
        budgets=[3, 3],
    )


@pytest.fixture
def t4a3():
    return generate_instance(4, 3, max_budget=3, max_profit=10, seed=1)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
