import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vqgap.instance import (
    GapInstance,
    InstanceError,
    brute_force_solve,
    extended_objective,
    generate_instance,
    is_feasible,
    pattern_to_x,
    profit,
    validate,
)
from vqgap.layout import LayoutKind, layout

from conftest import all_x, naive_optimum


class TestValidate:
    def test_well_formed(self, small):
        assert validate(small) == []

    def test_row_length_mismatch(self):
        inst = GapInstance(2, 2, [[1, 1], [1, 1]], [[1, 1, 1], [1, 1]], [2, 2])
        errors = validate(inst)
        assert any(e.startswith("weights[0]") for e in errors)

    def test_nonpositive_budget(self):
        errors = validate(GapInstance(1, 1, [[1]], [[1]], [0]))
        assert errors == ["budgets[0]: must be an integer >= 1, got 0"]

    def test_reports_every_violation(self):
        inst = GapInstance(1, 2, [[-1, 1]], [[0, 1]], [1])
        errors = validate(inst)
        assert len(errors) == 3

    def test_from_dict_raises(self):
        with pytest.raises(InstanceError):
            GapInstance.from_dict({"tasks": 1, "agents": 1, "profits": [[1]], "weights": [[1]], "budgets": [0]})

    def test_json_roundtrip(self, small):
        again = GapInstance.from_dict(json.loads(small.to_json()))
        assert again == small


def test_penalty_constant(small):
    assert small.penalty_constant == 1 + 4 + 2 + 3 + 5


class TestProfit:
    def test_empty(self, small):
        assert profit(small, [[0, 0], [0, 0]]) == 0

    def test_single_term(self):
        inst = GapInstance(1, 2, [[2, 5]], [[1, 1]], [1, 1])
        assert profit(inst, [[0, 1]]) == 5

    def test_random_resummation(self):
        inst = generate_instance(4, 3, seed=11)
        rng = random.Random(0)
        for _ in range(20):
            x = [[rng.randint(0, 1) for _ in range(3)] for _ in range(4)]
            expected = 0
            for i in range(4):
                for j in range(3):
                    if x[i][j]:
                        expected += inst.profits[i][j]
            assert profit(inst, x) == expected

    def test_dimension_mismatch(self, small):
        with pytest.raises(InstanceError):
            profit(small, [[1, 0]])


class TestExtendedObjective:
    def test_all_unassigned_is_zero(self, small):
        assert extended_objective(small, [[0, 0], [0, 0]], [1, 1], list(small.budgets)) == 0

    def test_double_assignment_penalised(self):
        inst = GapInstance(1, 2, [[2, 3]], [[1, 1]], [3, 3])
        value = extended_objective(inst, [[1, 1]], [0], [2, 2])
        C = inst.penalty_constant
        assert value == -5 + C
        assert value >= C - 5

    def test_negative_residual_rejected(self, small):
        with pytest.raises(InstanceError):
            extended_objective(small, [[0, 0], [0, 0]], [1, 1], [-1, 3])

    def test_feasible_equals_minus_profit(self, small):
        for x in all_x(2, 2):
            if not is_feasible(small, x):
                continue
            s = [1 - sum(r) for r in x]
            r = [small.budgets[j] - sum(small.weights[i][j] * x[i][j] for i in range(2)) for j in range(2)]
            assert extended_objective(small, x, s, r) == -profit(small, x)

    def test_violation_never_beats_feasible(self, small):
        """With slack chosen to minimise penalties, any infeasible x still loses."""
        opt, _ = naive_optimum(small)
        for x in all_x(2, 2):
            if is_feasible(small, x):
                continue
            best = min(
                extended_objective(small, x, s, r)
                for s in ([a, b] for a in (0, 1) for b in (0, 1))
                for r in ([a, b] for a in range(4) for b in range(4))
            )
            assert best > -opt
            assert best > 0


class TestBruteForce:
    def test_single_fits(self, tiny):
        res = brute_force_solve(tiny)
        assert res.optimal_cost == -3
        assert res.optimal_set == [[[1]]]

    def test_single_does_not_fit(self):
        res = brute_force_solve(GapInstance(1, 1, [[3]], [[2]], [1]))
        assert res.optimal_cost == 0
        assert res.optimal_set == [[[0]]]

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_naive_enumeration(self, seed):
        inst = generate_instance(3, 2, max_budget=3, seed=seed)
        best, count = naive_optimum(inst)
        res = brute_force_solve(inst)
        assert res.optimal_cost == -best
        assert res.feasible_count == count
        for x in res.optimal_set:
            assert is_feasible(inst, x) and profit(inst, x) == best

    def test_chunked_enumeration_agrees(self, t4a3):
        whole = brute_force_solve(t4a3)
        pieces = brute_force_solve(t4a3, chunk=7)
        assert whole.optimal_cost == pieces.optimal_cost
        assert whole.feasible_count == pieces.feasible_count

    def test_lower_bounds_every_pattern(self, t4a3):
        res = brute_force_solve(t4a3)
        for pattern in res.feasible_patterns.tolist():
            x = pattern_to_x(pattern, 3)
            assert -profit(t4a3, x) >= res.optimal_cost

    def test_too_large(self):
        inst = generate_instance(12, 5, seed=0)
        with pytest.raises(InstanceError):
            brute_force_solve(inst)


class TestGenerate:
    def test_deterministic(self):
        assert generate_instance(4, 3, 3, 10, seed=7) == generate_instance(4, 3, 3, 10, seed=7)

    def test_bounds_and_validity(self):
        for seed in range(20):
            inst = generate_instance(5, 3, max_budget=5, max_profit=4, seed=seed)
            assert validate(inst) == []
            w = np.array(inst.weights)
            assert w.min() >= 1 and w.max() <= 5
            assert 1 <= min(inst.budgets) and max(inst.budgets) <= 5
            p = np.array(inst.profits)
            assert p.min() >= 1 and p.max() <= 4

    @pytest.mark.parametrize("seed", range(5))
    def test_t5a3_has_26_vqe_variables(self, seed):
        inst = generate_instance(5, 3, max_budget=3, seed=seed)
        assert layout(inst, LayoutKind.VQE_FULL).num_qubits == 26

    def test_rejects_zero(self):
        with pytest.raises(InstanceError):
            generate_instance(0, 3)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), T=st.integers(1, 3), A=st.integers(1, 3))
def test_optimum_matches_naive_property(seed, T, A):
    inst = generate_instance(T, A, max_budget=4, max_profit=6, seed=seed)
    best, count = naive_optimum(inst)
    res = brute_force_solve(inst)
    assert res.optimal_cost == -best
    assert res.feasible_count == count
