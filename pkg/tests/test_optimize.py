import numpy as np
import pytest

from vqgap.optimize import InitStrategy, Method, OptimizerError, initial_parameters, minimize


def quadratic(x):
    return float(np.sum((np.asarray(x) - 1.0) ** 2))


def rosenbrock(x):
    x = np.asarray(x)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1 - x[:-1]) ** 2))


class TestNelderMead:
    def test_quadratic_2d(self):
        res = minimize(quadratic, [0.0, 0.0], Method.NELDER_MEAD, tolerance=1e-8, max_iterations=300)
        assert np.allclose(res.x, [1, 1], atol=1e-3)

    def test_rosenbrock(self):
        res = minimize(rosenbrock, [-1.2, 1.0], Method.NELDER_MEAD, max_iterations=500, tolerance=1e-10)
        assert np.allclose(res.x, [1, 1], atol=1e-2)

    @pytest.mark.parametrize("dim", [1, 2, 4, 6, 8, 10])
    def test_convex_quadratic_200_iterations(self, dim):
        rng = np.random.default_rng(dim)
        m = rng.normal(size=(dim, dim))
        hess = m @ m.T / dim + np.eye(dim)
        centre = rng.uniform(-1, 1, dim)

        def f(x):
            d = np.asarray(x) - centre
            return float(d @ hess @ d)

        res = minimize(f, np.zeros(dim), Method.NELDER_MEAD, max_iterations=200, tolerance=1e-9, initial_step=1.0)
        assert res.fun <= 1e-4
        assert len(res.trace) <= 200

    def test_tolerance_status(self):
        res = minimize(quadratic, [0.0], Method.NELDER_MEAD, tolerance=1e-2)
        assert res.status == "tolerance"


class TestSpsa:
    def test_quadratic(self):
        # the decaying gain sequence converges slowly; 300 steps get within ~0.1 of the minimiser
        res = minimize(quadratic, [0.0, 0.0, 0.0], Method.SPSA, max_iterations=300, seed=1, tolerance=0)
        assert res.fun < 5e-2
        assert np.allclose(res.x, 1.0, atol=0.2)

    def test_noisy_quadratic_improves(self):
        rng = np.random.default_rng(0)
        res = minimize(lambda x: quadratic(x) + 0.01 * rng.normal(), [3.0, -2.0], Method.SPSA,
                       max_iterations=200, seed=2, tolerance=0)
        assert quadratic(res.x) < 0.5


class TestCobyla:
    def test_quadratic(self):
        res = minimize(quadratic, [0.0, 0.0], Method.COBYLA, max_iterations=300, tolerance=1e-8)
        assert np.allclose(res.x, [1, 1], atol=1e-3)

    def test_respects_budget(self):
        res = minimize(rosenbrock, [0.0, 0.0], Method.COBYLA, max_iterations=25)
        assert res.nfev <= 25


@pytest.mark.parametrize("method", list(Method))
class TestContract:
    def test_best_is_monotone(self, method):
        rng = np.random.default_rng(4)
        res = minimize(lambda x: rosenbrock(x) + rng.normal(), [0.0, 0.0, 0.0], method, max_iterations=80, seed=0)
        best = [row.best_cost for row in res.trace]
        assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
        assert res.fun == best[-1]

    def test_reproducible(self, method):
        a = minimize(rosenbrock, [0.5, 0.5], method, max_iterations=50, seed=3)
        b = minimize(rosenbrock, [0.5, 0.5], method, max_iterations=50, seed=3)
        assert np.array_equal(a.x, b.x) and a.trace_csv() == b.trace_csv()

    def test_zero_budget_returns_start(self, method):
        calls = []
        res = minimize(lambda x: calls.append(x) or 0.0, [0.3, 0.4], method, max_iterations=0)
        assert calls == [] and res.trace == [] and list(res.x) == [0.3, 0.4]

    def test_non_finite_aborts(self, method):
        with pytest.raises(OptimizerError):
            minimize(lambda x: float("nan"), [0.0], method, max_iterations=5, seed=0)

    def test_iteration_budget(self, method):
        res = minimize(rosenbrock, [2.0, 2.0], method, max_iterations=30, tolerance=0, seed=0)
        assert 1 <= len(res.trace) <= 30 or method is Method.COBYLA


def test_trace_csv_header():
    res = minimize(quadratic, [0.0], max_iterations=3)
    lines = res.trace_csv().splitlines()
    assert lines[0] == "iteration,cost,best_cost,eval_count"
    assert len(lines) == 1 + len(res.trace)


class TestInitialParameters:
    def test_zeros(self):
        assert list(initial_parameters(3, InitStrategy.ZEROS)) == [0, 0, 0]

    def test_uniform_range_and_seed(self):
        a = initial_parameters(500, InitStrategy.UNIFORM_RANDOM, seed=1)
        b = initial_parameters(500, "UNIFORM_RANDOM", seed=1)
        assert np.array_equal(a, b)
        assert a.min() >= 0 and a.max() < 2 * np.pi

    def test_empty(self):
        with pytest.raises(ValueError):
            initial_parameters(0)
