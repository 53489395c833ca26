import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vqgap.instance import GapInstance, InstanceError, brute_force_solve, extended_objective, generate_instance
from vqgap.ising import (
    IsingModel,
    QuboModel,
    build_qubo,
    energies,
    evaluate,
    expectation,
    ising_for,
    to_ising,
)
from vqgap.layout import LayoutKind, decode_vqe_full, index_to_bitstring, layout


def bitstrings(n):
    return ("".join(b) for b in itertools.product("01", repeat=n))


class TestBuildQubo:
    @pytest.fixture
    def model(self):
        inst = GapInstance(1, 1, [[2]], [[1]], [1])
        return build_qubo(inst, layout(inst, LayoutKind.VQE_FULL))

    def test_assigned(self, model):
        assert model.value("100") == -2

    def test_unassigned_full_residual(self, model):
        assert model.value("011") == 0

    def test_task_penalty(self, model):
        assert model.value("110") >= 3 - 2

    def test_rejects_other_layouts(self, small):
        with pytest.raises(InstanceError):
            build_qubo(small, layout(small, LayoutKind.VQGAP))

    @pytest.mark.parametrize("seed", range(4))
    def test_exact_expansion(self, seed):
        inst = generate_instance(2, 2, max_budget=3, seed=seed)
        lay = layout(inst, LayoutKind.VQE_FULL)
        qubo = build_qubo(inst, lay)
        for b in bitstrings(lay.num_qubits):
            d = decode_vqe_full(inst, lay, b)
            assert qubo.value(b) == extended_objective(inst, d.x, d.s, d.r)


class TestToIsing:
    def test_linear(self):
        ising = to_ising(QuboModel(1, {(0, 0): Fraction(1)}, Fraction(0)))
        assert ising.offset == 0.5 and ising.h == (-0.5,)

    def test_pair(self):
        ising = to_ising(QuboModel(2, {(0, 1): Fraction(1)}, Fraction(0)))
        assert ising.offset == 0.25
        assert ising.h == (-0.25, -0.25)
        assert ising.couplings == {(1, 0): -0.25}

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(-9, 9), min_size=7, max_size=7))
    def test_random_three_variable(self, c):
        keys = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]
        qubo = QuboModel(3, {k: Fraction(v) for k, v in zip(keys, c)}, Fraction(c[6]))
        ising = to_ising(qubo)
        for b in bitstrings(3):
            assert evaluate(ising, b) == pytest.approx(float(qubo.value(b)), abs=1e-12)


class TestEvaluate:
    def test_zero_model(self):
        assert evaluate(IsingModel(2, (0.0, 0.0), {}, 1.5), "01") == 1.5

    def test_single_field(self):
        assert evaluate(IsingModel(1, (1.0,), {}, 0.0), "0") == 1.0

    def test_length_mismatch(self):
        with pytest.raises(InstanceError):
            evaluate(IsingModel(2, (0.0, 0.0), {}, 0.0), "0")

    def test_energies_match_pointwise(self, small):
        ising = ising_for(small, layout(small, LayoutKind.VQE_FULL))
        e = energies(ising)
        for idx in range(0, 1 << ising.num_qubits, 7):
            assert e[idx] == pytest.approx(evaluate(ising, index_to_bitstring(idx, ising.num_qubits)), abs=1e-9)

    def test_json_roundtrip(self, small):
        ising = ising_for(small, layout(small, LayoutKind.VQE_FULL))
        again = IsingModel.from_dict(ising.to_dict())
        assert again == ising


class TestExpectation:
    def test_point_mass(self):
        ising = IsingModel(1, (2.0,), {}, 1.0)
        assert expectation(ising, {"1": 1.0}) == evaluate(ising, "1")

    def test_uniform_two(self):
        ising = IsingModel(1, (1.0,), {}, 3.0)  # "0" -> 4, "1" -> 2
        assert expectation(ising, {"0": 0.5, "1": 0.5}) == 3.0

    def test_unnormalised(self):
        with pytest.raises(InstanceError):
            expectation(IsingModel(1, (1.0,), {}, 0.0), {"0": 0.5})


def test_roundtrip_exhaustive_and_argmin():
    rng = np.random.default_rng(5)
    checked = 0
    for seed in rng.integers(0, 10_000, size=12):
        inst = generate_instance(2, 2, max_budget=int(rng.integers(1, 8)), seed=int(seed))
        lay = layout(inst, LayoutKind.VQE_FULL)
        if lay.num_qubits > 14:
            continue
        e = energies(ising_for(inst, lay))
        worst = 0.0
        for idx in range(1 << lay.num_qubits):
            d = decode_vqe_full(inst, lay, index_to_bitstring(idx, lay.num_qubits))
            ref = extended_objective(inst, d.x, d.s, d.r)
            worst = max(worst, abs(e[idx] - ref) / (1 + abs(ref)))
        assert worst <= 1e-9
        assert round(e.min()) == brute_force_solve(inst).optimal_cost
        checked += 1
    assert checked >= 5
