from __future__ import annotations

import logging
import math

import pytest

from qmitm.brute_oracle import brute_cnf
from qmitm.cnfsat import (
    build_tables,
    choose_alpha,
    cnf_oracle,
    entropy2,
    partition_blocks,
    predicted_table_cost,
    solve_cnf,
    verify_claim,
)
from qmitm.errors import GuardError, InstanceError
from qmitm.genbench import gen_cnf
from qmitm.instances import Assignment, CnfFormula, PartialAssignment


@pytest.fixture
def chain() -> CnfFormula:
    # (x1) and (not x1 or x2)
    return CnfFormula(2, ((1,), (-1, 2)))


class TestAlpha:
    def test_entropy(self):
        assert entropy2(0.5) == pytest.approx(1.0)
        assert entropy2(0.0) == 0.0
        assert entropy2(1.0) == 0.0
        with pytest.raises(InstanceError):
            entropy2(1.5)

    @pytest.mark.parametrize("c, expected, tol", [(1.0, 0.0756, 5e-4), (2.0, 0.036, 1e-3)])
    def test_largest_alpha(self, c, expected, tol):
        params = choose_alpha(c)
        assert params.alpha == pytest.approx(expected, abs=tol)
        assert (1 - params.alpha) / 2 >= c * entropy2(params.alpha) + params.alpha
        assert params.k * params.alpha >= 1
        assert params.k == math.ceil(1 / params.alpha)

    def test_sparse_formulas_hit_the_ceiling(self):
        params = choose_alpha(0.25)
        assert params.alpha < 1 / 6
        assert params.alpha == pytest.approx(1 / 6)
        assert params.k * params.alpha >= 1

    @pytest.mark.parametrize("override", [0.0, 1 / 6, 0.3, -0.1])
    def test_override_out_of_range(self, override):
        with pytest.raises(InstanceError):
            choose_alpha(1.0, override)

    def test_override_violating_inequality_warns(self, caplog):
        with caplog.at_level(logging.WARNING, logger="qmitm.cnfsat"):
            params = choose_alpha(1.0, 0.15)
        assert params.alpha == 0.15
        assert params.k == 7
        assert "violates" in caplog.text

    def test_density_must_be_positive(self):
        with pytest.raises(InstanceError):
            choose_alpha(0.0)

    def test_fit_to_few_variables(self):
        params = choose_alpha(1.0).fit(5)
        assert params.k == 5
        assert params.alpha == pytest.approx(0.2)
        assert params.k * params.alpha >= 1

    def test_fit_leaves_large_n_alone(self):
        params = choose_alpha(1.0)
        assert params.fit(100) is params

    def test_budgets(self):
        params = choose_alpha(1.0)
        assert params.table_budget(12) == 1
        assert params.claim_threshold(12) == 12
        assert params.table_budget(0) == 0


class TestPartitionBlocks:
    def test_even(self):
        assert [len(b) for b in partition_blocks(10, 5)] == [2] * 5

    def test_uneven(self):
        blocks = partition_blocks(11, 5)
        assert tuple(len(b) for b in blocks) == (3, 2, 2, 2, 2)
        assert sum(blocks, ()) == tuple(range(1, 12))

    def test_two_blocks(self):
        assert partition_blocks(6, 2) == [(1, 2, 3), (4, 5, 6)]

    @pytest.mark.parametrize("n, k", [(3, 0), (3, 4)])
    def test_invalid(self, n, k):
        with pytest.raises(InstanceError):
            partition_blocks(n, k)


class TestBuildTables:
    def test_single_clause_key(self):
        tables = build_tables(CnfFormula(2, ((1,), (2,))), (1,), budget=1)
        assert tables.witness(0b01) == PartialAssignment((1,), (1,))
        assert tables.witness(0b10) is None
        assert tables.entries == 1

    def test_block_without_clauses(self):
        tables = build_tables(CnfFormula(2, ((1,),)), (2,), budget=1)
        assert tables.entries == 0

    def test_budget_limits_key_size(self):
        f = CnfFormula(3, ((1,), (1, 2), (1, 3)))
        tables = build_tables(f, (1,), budget=2)
        assert {k for k, _ in tables.items()} == {0b001, 0b010, 0b100, 0b011, 0b101, 0b110}

    @pytest.mark.parametrize("seed", range(4))
    def test_strategies_agree(self, seed):
        f = gen_cnf(8, 2.0, plant=False, seed=seed).instance
        block = (1, 2, 3)
        subsets = build_tables(f, block, 3, strategy="subsets")
        pairs = build_tables(f, block, 3, strategy="pairs")
        assert subsets.items() == pairs.items()
        assert subsets.strategy == "subsets"
        assert pairs.strategy == "pairs"

    @pytest.mark.parametrize("seed", range(3))
    def test_every_stored_key_is_found(self, seed):
        f = gen_cnf(8, 1.5, plant=False, seed=seed).instance
        tables = build_tables(f, (1, 2, 3, 4), 2)
        stored = dict(tables.items())
        for key, witness in stored.items():
            assert tables.witness(key) == witness
        for key in range(1 << f.m):
            if bin(key).count("1") <= 2 and key not in stored:
                assert tables.witness(key) is None

    def test_first_witness_in_counting_order(self):
        f = CnfFormula(2, ((1, 2),))
        tables = build_tables(f, (1, 2), budget=1)
        # b=01 (x1=1) comes before b=10 and b=11
        assert tables.witness(1) == PartialAssignment((1, 2), (1, 0))

    def test_unknown_strategy(self, chain):
        with pytest.raises(InstanceError):
            build_tables(chain, (1,), 1, strategy="greedy")

    def test_guard(self, chain, config):
        with pytest.raises(GuardError):
            build_tables(chain, (1, 2), 1, config.replace(max_enumeration_bits=1))


class TestCnfOracle:
    def test_completion_found(self, chain):
        tables = build_tables(chain, (1,), budget=2)
        assert cnf_oracle(PartialAssignment((2,), (1,)), tables, chain) == PartialAssignment(
            (1,), (1,)
        )

    def test_no_completion(self, chain):
        tables = build_tables(chain, (1,), budget=2)
        assert cnf_oracle(PartialAssignment((2,), (0,)), tables, chain) is None

    def test_complement_alone_satisfies(self):
        f = CnfFormula(2, ((2,),))
        tables = build_tables(f, (1,), budget=1)
        assert cnf_oracle(PartialAssignment((2,), (1,)), tables, f) == PartialAssignment((), ())

    def test_over_budget(self, chain):
        tables = build_tables(chain, (1,), budget=1)
        assert cnf_oracle(PartialAssignment((2,), (0,)), tables, chain) is None

    def test_support_checked(self, chain):
        tables = build_tables(chain, (1,), budget=1)
        with pytest.raises(InstanceError):
            cnf_oracle(PartialAssignment((1,), (1,)), tables, chain)


class TestSolveCnf:
    def test_chain(self, chain):
        result = solve_cnf(chain, seed=0)
        assert result.satisfiable
        assert result.assignment.bits == (1, 1)
        assert result.stats.details["k"] == 2
        assert result.stats.details["alpha"] == pytest.approx(0.5)

    def test_contradiction(self):
        f = CnfFormula(1, ((1,), (-1,)))
        result = solve_cnf(f, seed=0, retries=1)
        assert result.assignment is None
        assert result.block is None
        assert result.stats.quantum_queries > 0

    def test_planted_formulas(self):
        solved = 0
        for seed in range(20):
            f = gen_cnf(10, 2.0, plant=True, seed=seed).instance
            result = solve_cnf(f, seed=seed)
            if result.satisfiable:
                assert f.is_satisfied_by(result.assignment)
                solved += 1
        assert solved >= 18

    @pytest.mark.parametrize("seed", range(10))
    def test_unsatisfiable_is_never_claimed(self, seed):
        f = gen_cnf(8, 4.0, plant=False, seed=seed).instance
        if not brute_cnf(f).feasible:
            assert not solve_cnf(f, seed=seed).satisfiable

    def test_low_density_is_widened(self, chain, caplog):
        with caplog.at_level(logging.WARNING, logger="qmitm.cnfsat"):
            result = solve_cnf(chain, c=0.5, seed=0)
        assert "widening" in caplog.text
        assert result.satisfiable

    def test_block_stats(self, chain):
        result = solve_cnf(chain, seed=0)
        first = result.stats.details["blocks"][0]
        assert first["block"] == 1
        assert first["table_entries"] >= 1
        assert result.stats.classical_setup_evals >= 2

    def test_guard(self, config):
        f = gen_cnf(12, 1.0, seed=0).instance
        with pytest.raises(GuardError):
            solve_cnf(f, config=config.replace(max_enumeration_bits=4))

    @pytest.mark.slow
    def test_larger_planted_formulas(self):
        for seed in range(5):
            f = gen_cnf(16, 1.0, plant=True, seed=seed).instance
            result = solve_cnf(f, seed=seed)
            assert result.satisfiable
            assert f.is_satisfied_by(result.assignment)


class TestVerifyClaim:
    @pytest.mark.parametrize("c", [1.0, 2.0])
    def test_planted_assignments_have_a_block(self, c):
        params = choose_alpha(c)
        for seed in range(50):
            generated = gen_cnf(14, c, plant=True, seed=seed)
            block = verify_claim(generated.instance, generated.witness, params)
            assert 1 <= block <= params.fit(14).k

    def test_single_clause(self):
        f = CnfFormula(4, ((1,),))
        assert verify_claim(f, Assignment((1, 0, 0, 0)), choose_alpha(0.25)) == 2

    def test_needs_satisfying_assignment(self, chain):
        with pytest.raises(InstanceError):
            verify_claim(chain, Assignment((0, 0)), choose_alpha(1.0))

    def test_predicted_table_cost(self):
        assert predicted_table_cost(12, 0.0756, 3) == 96
        assert predicted_table_cost(0, 0.1, 2) == 4
