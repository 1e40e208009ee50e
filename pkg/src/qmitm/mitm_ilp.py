"""
Meet-in-the-middle plus Grover search for 0-1 ILP feasibility.

The variables split into a prefix block A of size floor(n/3) and the rest B. Every
assignment I to A contributes the d-tuple y_I of its partial row sums; those tuples go into
a dominance structure. Grover then searches the B-assignments u for one where some stored
y_I fits under b - z(u) on every row, z(u) being u's partial row sums. The structure costs
2^{n/3} to build and the search about sqrt(2^{2n/3}) queries.
"""

from __future__ import annotations

import bisect
import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import SolverConfiguration, default_configuration
from .errors import CertificateError, GuardError, InstanceError
from .instances import (
    Assignment,
    IlpInstance,
    KnapsackInstance,
    OptimizationResult,
    PartialAssignment,
    Sense,
    eval_ilp,
    knapsack_to_ilp,
    optimize_by_bisection,
)
from .qsearch import (
    MarkedSetSummary,
    SearchOutcome,
    bbht_search,
    bbht_with_retries,
    enumerate_marked,
)
from .rangetree import RangePoint, RangeTree, VisitCounter
from .rng import derive_seed
from .stats import SolveStats

__all__ = [
    "SplitPlan",
    "PreprocessedIlp",
    "IlpSolveResult",
    "GroupSolveResult",
    "split_variables",
    "enumerate_partial_tuples",
    "preprocess",
    "oracle_f",
    "recombine",
    "solve_ilp",
    "solve_knapsack",
    "solve_group_problem",
    "feasible_indices",
    "naive_grover_baseline",
]

_logger = logging.getLogger(__name__)

_CHUNK_BITS = 16


@dataclass(frozen=True)
class SplitPlan:
    n: int
    set_a: tuple[int, ...]
    set_b: tuple[int, ...]

    @property
    def size_a(self) -> int:
        return len(self.set_a)

    @property
    def size_b(self) -> int:
        return len(self.set_b)


def split_variables(n: int) -> SplitPlan:
    """
    A = {1..floor(n/3)}, B = the remaining variables.

    :raises: InstanceError: If n < 3.
    """
    if n < 3:
        raise InstanceError(f"the split needs at least 3 variables, got n={n}")
    k = n // 3
    return SplitPlan(n=n, set_a=tuple(range(1, k + 1)), set_b=tuple(range(k + 1, n + 1)))


def _index_bits(count: int, width: int, start: int = 0) -> np.ndarray:
    """Rows are the bits (LSB first) of start .. start+count-1."""
    idx = np.arange(start, start + count, dtype=np.int64)
    return (idx[:, None] >> np.arange(width, dtype=np.int64)) & 1


def _partial_sums(inst: IlpInstance, support: Sequence[int]) -> np.ndarray:
    """(2^|support|, d) array; row I holds the row sums of assignment index I over support."""
    columns = inst.matrix[:, [v - 1 for v in support]]
    bits = _index_bits(1 << len(support), len(support))
    return bits @ columns.T


def enumerate_partial_tuples(
    inst: IlpInstance, plan: SplitPlan
) -> list[tuple[tuple[int, ...], int]]:
    """
    :returns: (y_I, I) for every assignment I to A in binary counting order, where
        y_I(i) = sum over j in A of a_ij * I_j.
    """
    if plan.n != inst.n:
        raise InstanceError(f"plan covers {plan.n} variables, instance has {inst.n}")
    sums = _partial_sums(inst, plan.set_a)
    return [(tuple(row), index) for index, row in enumerate(sums.tolist())]


class _ExactTable:
    """
    Sorted exact-match table over the equality rows. With one inequality row present, each
    key keeps the A-assignment whose partial sum on that row is smallest.
    """

    def __init__(
        self,
        tuples: list[tuple[tuple[int, ...], int]],
        equality_rows: Sequence[int],
        inequality_row: Optional[int],
    ) -> None:
        best: dict[tuple[int, ...], tuple[int, int]] = {}
        for y, index in tuples:
            key = tuple(y[i] for i in equality_rows)
            slack = y[inequality_row] if inequality_row is not None else 0
            current = best.get(key)
            if current is None or slack < current[0]:
                best[key] = (slack, index)
        self._keys = sorted(best)
        self._slack = [best[k][0] for k in self._keys]
        self._witness = [best[k][1] for k in self._keys]
        self._equality_rows = tuple(equality_rows)
        self._inequality_row = inequality_row
        self._probe_cost = max(1, len(self._keys).bit_length())

    def __len__(self) -> int:
        return len(self._keys)

    def lookup(self, bounds: tuple[int, ...], counter: VisitCounter) -> Optional[int]:
        key = tuple(bounds[i] for i in self._equality_rows)
        counter.add(self._probe_cost)
        pos = bisect.bisect_left(self._keys, key)
        if pos == len(self._keys) or self._keys[pos] != key:
            return None
        if self._inequality_row is not None and self._slack[pos] > bounds[self._inequality_row]:
            return None
        return self._witness[pos]


@dataclass
class PreprocessedIlp:
    """
    The searchable structure over A's partial tuples: a range tree, or for systems with at
    most one inequality row and some equality rows, an exact-key table.
    """

    plan: SplitPlan
    kind: str
    size: int
    build_ops: int
    tree: Optional[RangeTree] = None
    table: Optional[_ExactTable] = None
    b_columns: tuple[tuple[int, ...], ...] = ()
    visits: VisitCounter = field(default_factory=VisitCounter)
    _eq_rows: tuple[int, ...] = ()

    def lookup(self, bounds: tuple[int, ...]) -> Optional[int]:
        if self.kind == "table":
            assert self.table is not None
            return self.table.lookup(bounds, self.visits)
        if self.kind == "tree":
            assert self.tree is not None
            # equality rows are stored twice, as y and -y, so dominance means equality
            coords = bounds + tuple(-bounds[i] for i in self._eq_rows)
            point = self.tree.query_dominated(coords, self.visits)
            return None if point is None else point.payload
        # no rows at all: the first A-assignment always fits
        self.visits.add(1)
        return 0


def preprocess(
    inst: IlpInstance, plan: SplitPlan, config: Optional[SolverConfiguration] = None
) -> PreprocessedIlp:
    """
    Builds the structure over the 2^|A| partial tuples.

    :raises: GuardError: If |A| exceeds the configured enumeration limit.
    """
    config = config or default_configuration()
    if plan.size_a > config.max_enumeration_bits:
        raise GuardError(
            f"|A|={plan.size_a} exceeds the enumeration limit of {config.max_enumeration_bits}"
        )
    tuples = enumerate_partial_tuples(inst, plan)
    b_columns = tuple(tuple(inst.a[i][v - 1] for i in range(inst.d)) for v in plan.set_b)
    size = len(tuples)

    if inst.d == 0:
        return PreprocessedIlp(plan, "none", size, size, b_columns=b_columns)

    eq_rows = tuple(sorted(inst.equality_rows))
    ineq_rows = inst.inequality_rows
    if eq_rows and len(ineq_rows) <= 1:
        table = _ExactTable(tuples, eq_rows, ineq_rows[0] if ineq_rows else None)
        _logger.debug("exact-key table over %d tuples holds %d keys", size, len(table))
        ops = size * max(1, size.bit_length())
        return PreprocessedIlp(plan, "table", size, ops, table=table, b_columns=b_columns)

    points = [
        RangePoint(coords=y + tuple(-y[i] for i in eq_rows), payload=index)
        for y, index in tuples
    ]
    dim = inst.d + len(eq_rows)
    tree = RangeTree.build(points, dim)
    ops = size * max(1, size.bit_length()) ** dim
    _logger.debug("range tree of dimension %d over %d tuples", dim, size)
    return PreprocessedIlp(
        plan, "tree", size, ops, tree=tree, b_columns=b_columns, _eq_rows=eq_rows
    )


def oracle_f(u: int, prep: PreprocessedIlp, inst: IlpInstance) -> Optional[int]:
    """
    The search predicate for B-assignment u: z = partial row sums of u over B, z_hat = b - z,
    then look for an A-tuple fitting under z_hat.

    :returns: The index of a matching A-assignment, or None.
    """
    if not 0 <= u < (1 << prep.plan.size_b):
        raise InstanceError(f"B-assignment index {u} outside [0, 2^{prep.plan.size_b})")
    z = [0] * inst.d
    j = 0
    while u:
        if u & 1:
            for i, coef in enumerate(prep.b_columns[j]):
                z[i] += coef
        u >>= 1
        j += 1
    bounds = tuple(bound - zi for bound, zi in zip(inst.b, z))
    return prep.lookup(bounds)


def recombine(plan: SplitPlan, a_index: int, b_index: int) -> Assignment:
    a_part = PartialAssignment.from_index(plan.set_a, a_index)
    b_part = PartialAssignment.from_index(plan.set_b, b_index)
    return a_part.merge(b_part, plan.n)


@dataclass(frozen=True)
class IlpSolveResult:
    assignment: Optional[Assignment]
    stats: SolveStats

    @property
    def feasible(self) -> bool:
        return self.assignment is not None


def solve_ilp(
    inst: IlpInstance,
    seed: int = 0,
    retries: Optional[int] = None,
    config: Optional[SolverConfiguration] = None,
) -> IlpSolveResult:
    """
    Decides feasibility of a 0-1 ILP.

    :param inst: The system; needs n >= 3.
    :param seed: Seed of the first search attempt.
    :param retries: Extra attempts with seeds seed+1.. after a failed search. Defaults to the
        configured value.

    :returns: A verified feasible assignment, or None when every attempt came back empty.
        None means infeasible with high probability, not certainly.

    :raises: GuardError: If either block is too large to enumerate.
    :raises: CertificateError: If a recombined assignment fails verification.
    """
    config = config or default_configuration()
    retries = config.retries if retries is None else retries
    started = time.perf_counter()

    plan = split_variables(inst.n)
    if plan.size_b > config.max_enumeration_bits:
        raise GuardError(
            f"|B|={plan.size_b} exceeds the enumeration limit of {config.max_enumeration_bits}"
        )
    prep = preprocess(inst, plan, config)
    summary = enumerate_marked(lambda u: oracle_f(u, prep, inst) is not None, 1 << plan.size_b)
    _logger.debug(
        "n=%d |A|=%d |B|=%d structure=%s marked=%d",
        inst.n,
        plan.size_a,
        plan.size_b,
        prep.kind,
        summary.M,
    )
    search = bbht_with_retries(
        summary, seed, retries, config.bbht_growth, config.bbht_cutoff_factor
    )

    assignment = None
    if search.found is not None:
        a_index = oracle_f(search.found, prep, inst)
        if a_index is None:
            raise CertificateError(f"search returned unmarked B-assignment {search.found}")
        assignment = recombine(plan, a_index, search.found)
        if not eval_ilp(inst, assignment):
            raise CertificateError(f"recombined assignment {assignment} is not feasible")
    else:
        _logger.info("No feasible assignment found after %d attempts", search.attempts)

    stats = SolveStats(
        quantum_queries=search.quantum_queries,
        classical_setup_evals=summary.classical_setup_evals,
        preprocess_ops=prep.build_ops,
        tree_visits=prep.visits.nodes,
        attempts=search.attempts,
        details={
            "split": [plan.size_a, plan.size_b],
            "structure": prep.kind,
            "structure_size": prep.size,
            "marked": summary.M,
        },
    )
    if config.record_wall_time:
        stats.wall_ms = (time.perf_counter() - started) * 1000.0
    return IlpSolveResult(assignment=assignment, stats=stats)


def solve_knapsack(
    k: KnapsackInstance,
    seed: int = 0,
    retries: Optional[int] = None,
    config: Optional[SolverConfiguration] = None,
) -> IlpSolveResult:
    return solve_ilp(knapsack_to_ilp(k), seed, retries, config)


@dataclass(frozen=True)
class GroupSolveResult:
    optimum: Optional[OptimizationResult]
    stats: SolveStats

    @property
    def assignment(self) -> Optional[Assignment]:
        return None if self.optimum is None else self.optimum.witness


def solve_group_problem(
    inst: IlpInstance,
    objective: Sequence[int],
    sense: Sense | str = Sense.MAX,
    seed: int = 0,
    retries: Optional[int] = None,
    config: Optional[SolverConfiguration] = None,
) -> GroupSolveResult:
    """
    Optimises a linear objective over a pure-equality 0-1 system. Each bisection step adds
    the objective threshold as the single inequality row, so the search runs on the exact-key
    table whose entries keep the best objective contribution per key.

    :raises: InstanceError: If the system has an inequality row.
    """
    if not inst.is_pure_equality:
        raise InstanceError("the group problem needs a system of equality rows only")
    config = config or default_configuration()
    total = SolveStats()
    calls = 0

    def feasibility(thresholded: IlpInstance) -> Optional[Assignment]:
        nonlocal calls
        result = solve_ilp(thresholded, derive_seed(seed, calls), retries, config)
        calls += 1
        total.absorb(result.stats)
        return result.assignment

    optimum = optimize_by_bisection(inst, objective, sense, feasibility)
    total.details["solve_calls"] = calls
    return GroupSolveResult(optimum=optimum, stats=total)


def feasible_indices(inst: IlpInstance, max_bits: int = 24) -> np.ndarray:
    """
    Indices of all feasible assignments in increasing order, evaluated in numpy chunks.

    :raises: GuardError: If n exceeds max_bits.
    """
    if inst.n > max_bits:
        raise GuardError(f"n={inst.n} exceeds the enumeration limit of {max_bits}")
    total = 1 << inst.n
    chunk = min(total, 1 << _CHUNK_BITS)
    eq = np.array(sorted(inst.equality_rows), dtype=np.int64)
    ineq = np.array(inst.inequality_rows, dtype=np.int64)
    b = np.array(inst.b, dtype=np.int64)
    found = []
    for start in range(0, total, chunk):
        sums = _index_bits(chunk, inst.n, start) @ inst.matrix.T
        ok = np.ones(chunk, dtype=bool)
        if ineq.size:
            ok &= np.all(sums[:, ineq] <= b[ineq], axis=1)
        if eq.size:
            ok &= np.all(sums[:, eq] == b[eq], axis=1)
        found.append(np.nonzero(ok)[0] + start)
    return np.concatenate(found)


def naive_grover_baseline(
    inst: IlpInstance, seed: int = 0, config: Optional[SolverConfiguration] = None
) -> SearchOutcome:
    """
    One BBHT search over all 2^n assignments with the full feasibility predicate; the
    sqrt(2^n) comparator for solve_ilp.
    """
    config = config or default_configuration()
    marked = feasible_indices(inst, config.max_enumeration_bits)
    summary = MarkedSetSummary(
        N=1 << inst.n, marked=tuple(int(x) for x in marked), classical_setup_evals=1 << inst.n
    )
    return bbht_search(summary, seed, config.bbht_growth, config.bbht_cutoff_factor)
