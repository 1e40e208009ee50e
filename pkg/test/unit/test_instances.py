from __future__ import annotations

import math

import pytest

from qmitm.brute_oracle import brute_exactly_one, brute_ilp, brute_subset_sum
from qmitm.errors import InstanceError
from qmitm.genbench import gen_cnf, gen_knapsack
from qmitm.instances import (
    Assignment,
    CnfFormula,
    IlpInstance,
    KnapsackInstance,
    PartialAssignment,
    Sense,
    eval_ilp,
    exactly_one_sat_to_group_ilp,
    knapsack_to_ilp,
    optimize_by_bisection,
    satisfied_clause_set,
)
from qmitm.rng import SplitMix64


def _cube(n: int):
    return [Assignment.from_index(i, n) for i in range(1 << n)]


class TestKnapsackToIlp:
    def test_two_opposed_rows(self):
        inst = knapsack_to_ilp(KnapsackInstance((1, 2, 3), 5))
        assert inst.a == ((1, 2, 3), (-1, -2, -3))
        assert inst.b == (5, -5)
        assert inst.equality_rows == frozenset()

    def test_single_variable(self):
        inst = knapsack_to_ilp(KnapsackInstance((7,), 7))
        assert eval_ilp(inst, Assignment((1,)))
        assert not eval_ilp(inst, Assignment((0,)))

    def test_unreachable_target_is_infeasible(self):
        inst = knapsack_to_ilp(KnapsackInstance((2, 2), 3))
        assert not any(eval_ilp(inst, x) for x in _cube(2))

    @pytest.mark.parametrize(
        "coefficients, target", [((), 1), ((0, 1), 1), ((1, 2), 0), ((-1,), 1)]
    )
    def test_rejects_invalid_knapsack(self, coefficients, target):
        with pytest.raises(InstanceError):
            KnapsackInstance(coefficients, target)


class TestExactlyOneReduction:
    def test_positive_clause(self):
        inst = exactly_one_sat_to_group_ilp(CnfFormula(2, ((1, 2),)))
        assert inst.a == ((1, 1),)
        assert inst.b == (1,)
        assert inst.is_pure_equality

    def test_negative_literal(self):
        inst = exactly_one_sat_to_group_ilp(CnfFormula(1, ((-1,),)))
        assert inst.a == ((-1,),)
        assert inst.b == (0,)
        assert [x.bits for x in _cube(1) if eval_ilp(inst, x)] == [(0,)]

    def test_feasible_set(self):
        inst = exactly_one_sat_to_group_ilp(CnfFormula(2, ((1, -2), (2,))))
        assert [x.bits for x in _cube(2) if eval_ilp(inst, x)] == [(1, 1)]


class TestEvalIlp:
    def test_knapsack_rows(self):
        inst = IlpInstance(a=((1, 2, 3), (-1, -2, -3)), b=(5, -5), n=3)
        assert eval_ilp(inst, Assignment((0, 1, 1)))
        assert not eval_ilp(inst, Assignment((1, 1, 1)))

    def test_all_zero_assignment(self):
        inst = IlpInstance(a=((3, -1), (1, 1)), b=(0, 2), n=2)
        assert eval_ilp(inst, Assignment((0, 0)))
        eq = IlpInstance(a=((1, 1),), b=(1,), n=2, equality_rows={0})
        assert not eval_ilp(eq, Assignment((0, 0)))

    def test_single_row(self):
        assert not eval_ilp(IlpInstance(a=((1,),), b=(0,), n=1), Assignment((1,)))

    def test_no_rows(self):
        inst = IlpInstance(a=(), b=(), n=3)
        assert inst.d == 0
        assert all(eval_ilp(inst, x) for x in _cube(3))

    def test_wrong_length(self):
        with pytest.raises(InstanceError):
            eval_ilp(IlpInstance(a=((1, 1),), b=(1,), n=2), Assignment((1,)))

    def test_rejects_oversized_coefficient(self):
        with pytest.raises(InstanceError):
            IlpInstance(a=((1 << 40, 0),), b=(0,), n=2)

    def test_rejects_missing_equality_row(self):
        with pytest.raises(InstanceError):
            IlpInstance(a=((1,),), b=(1,), n=1, equality_rows={1})


class TestOptimizeByBisection:
    def test_maximise_sum(self, first_feasible):
        inst = IlpInstance(a=((1, 1),), b=(1,), n=2)
        result = optimize_by_bisection(inst, (1, 1), Sense.MAX, first_feasible)
        assert result is not None
        assert result.value == 1

    def test_maximise_weighted(self, first_feasible):
        inst = IlpInstance(a=((1, 1),), b=(1,), n=2)
        result = optimize_by_bisection(inst, (2, 3), "max", first_feasible)
        assert result is not None
        assert result.value == 3
        assert result.witness.bits == (0, 1)

    def test_minimise(self, first_feasible):
        inst = IlpInstance(a=((-1, -1, -1),), b=(-2,), n=3)
        result = optimize_by_bisection(inst, (4, 1, 2), Sense.MIN, first_feasible)
        assert result is not None
        assert result.value == 3

    def test_infeasible_base(self, first_feasible):
        inst = IlpInstance(a=((1,),), b=(-1,), n=1)
        assert optimize_by_bisection(inst, (1,), Sense.MIN, first_feasible) is None

    def test_objective_length_checked(self, first_feasible):
        with pytest.raises(InstanceError):
            optimize_by_bisection(IlpInstance(a=(), b=(), n=2), (1,), Sense.MAX, first_feasible)


class TestSatisfiedClauseSet:
    def test_partial(self):
        f = CnfFormula(2, ((1, 2), (-2,)))
        p = PartialAssignment((2,), (1,))
        assert satisfied_clause_set(f, p) == 0b01

    def test_empty_partial(self):
        f = CnfFormula(2, ((1, 2), (-2,)))
        assert satisfied_clause_set(f, PartialAssignment((), ())) == 0

    def test_negative_literals(self):
        f = CnfFormula(3, ((-1,), (-1, 3)))
        p = PartialAssignment((1,), (0,))
        assert satisfied_clause_set(f, p) == 0b11


class TestAssignments:
    def test_index_bits_are_lsb_first(self):
        x = Assignment.from_index(0b110, 3)
        assert x.bits == (0, 1, 1)
        assert x.to_index() == 0b110
        assert str(x) == "011"

    def test_restrict_and_merge(self):
        x = Assignment((1, 0, 1, 1))
        a = x.restrict((1, 3))
        b = x.restrict((2, 4))
        assert a.bits == (1, 1)
        assert a.merge(b, 4) == x

    def test_merge_overlap(self):
        p = PartialAssignment((1, 2), (0, 1))
        with pytest.raises(InstanceError):
            p.merge(PartialAssignment((2,), (1,)), 3)

    def test_partial_support_must_increase(self):
        with pytest.raises(InstanceError):
            PartialAssignment((2, 1), (0, 0))


class TestCnfFormula:
    def test_duplicate_literals_collapse(self):
        assert CnfFormula(2, ((1, 1, -2),)).clauses == ((1, -2),)

    @pytest.mark.parametrize("clauses", [((),), ((1, -1),), ((3,),), ((0,),)])
    def test_rejects_bad_clauses(self, clauses):
        with pytest.raises(InstanceError):
            CnfFormula(2, clauses)

    def test_empty_formula_is_satisfied(self):
        f = CnfFormula(2, ())
        assert f.m == 0
        assert f.is_satisfied_by(Assignment((0, 0)))


def _random_system(seed: int, n: int) -> tuple[IlpInstance, tuple[int, ...]]:
    rng = SplitMix64(seed)
    d = 1 + rng.randbelow(2)
    a = tuple(tuple(rng.randbelow(11) - 5 for _ in range(n)) for _ in range(d))
    b = tuple(rng.randbelow(10) - 3 for _ in range(d))
    equality = frozenset(i for i in range(d) if rng.randbelow(4) == 0)
    objective = tuple(rng.randbelow(13) - 6 for _ in range(n))
    return IlpInstance(a=a, b=b, n=n, equality_rows=equality), objective


class TestReductionSoundness:
    @pytest.mark.parametrize("n", range(1, 13))
    def test_knapsack_rows_accept_exactly_the_target_sums(self, n):
        k = gen_knapsack(n, plant=True, seed=n, coefficient_bits=3).instance
        inst = knapsack_to_ilp(k)
        for x in _cube(n):
            chosen = sum(c for c, bit in zip(k.coefficients, x.bits) if bit)
            assert eval_ilp(inst, x) == (chosen == k.target)
        assert brute_ilp(inst).witnesses == brute_subset_sum(k.coefficients, k.target).witnesses

    @pytest.mark.parametrize("seed", range(30))
    def test_exactly_one_rows_match_clause_semantics(self, seed):
        n = 1 + seed % 10
        f = gen_cnf(n, 1.5, plant=seed % 2 == 0, seed=seed).instance
        inst = exactly_one_sat_to_group_ilp(f)
        for x in _cube(n):
            true_counts = [
                sum((lit > 0) == bool(x.bits[abs(lit) - 1]) for lit in clause)
                for clause in f.clauses
            ]
            assert eval_ilp(inst, x) == all(count == 1 for count in true_counts)
        assert brute_ilp(inst).witnesses == brute_exactly_one(f).witnesses


class TestBisectionAgainstExhaustiveOptimum:
    @pytest.mark.parametrize("seed", range(40))
    def test_random_system(self, seed, first_feasible):
        n = 2 + seed % 11
        inst, objective = _random_system(seed, n)
        sense = Sense.MAX if seed % 2 else Sense.MIN
        values = [
            sum(c for c, bit in zip(objective, x.bits) if bit)
            for x in _cube(n)
            if eval_ilp(inst, x)
        ]
        result = optimize_by_bisection(inst, objective, sense, first_feasible)
        if not values:
            assert result is None
            return
        assert result is not None
        expected = max(values) if sense is Sense.MAX else min(values)
        assert result.value == expected
        assert eval_ilp(inst, result.witness)
        assert sum(c for c, bit in zip(objective, result.witness.bits) if bit) == expected

        span = 2 * sum(abs(v) for v in objective) + 1
        assert result.solve_calls <= math.ceil(math.log2(span)) + 1

    def test_zero_objective_takes_one_call(self, first_feasible):
        inst = IlpInstance(a=((1, 1),), b=(1,), n=2)
        result = optimize_by_bisection(inst, (0, 0), Sense.MIN, first_feasible)
        assert result is not None
        assert result.value == 0
        assert result.solve_calls == 1
