"""
Satisfiability of CNF formulas with at most c*n clauses of any width.

The variables are cut into k blocks of roughly alpha*n each. If a* satisfies F, some block
A_i carries at most alpha*m clauses on its own, so a* restricted to the complement of A_i
leaves at most alpha*m clauses open. For each block the solver tabulates, per set u of
at most alpha*m clauses, one assignment of A_i covering u, then Grover-searches the
complement assignments v for one whose open clauses appear in the table.
"""

from __future__ import annotations

import bisect
import itertools
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .config import SolverConfiguration, default_configuration
from .errors import CertificateError, GuardError, InstanceError
from .instances import Assignment, CnfFormula, PartialAssignment, satisfied_clause_set
from .qsearch import bbht_with_retries, enumerate_marked
from .rng import derive_seed
from .stats import SolveStats

__all__ = [
    "AlphaParams",
    "CoverTables",
    "CnfSolveResult",
    "entropy2",
    "choose_alpha",
    "partition_blocks",
    "build_tables",
    "cnf_oracle",
    "solve_cnf",
    "verify_claim",
    "predicted_table_cost",
]

_logger = logging.getLogger(__name__)

_ALPHA_CEILING = 1 / 6
_BISECTION_STEPS = 50
# absorbs float noise when alpha*m lands on an integer
_EPS = 1e-9


def _popcount(x: int) -> int:
    return bin(x).count("1")


def entropy2(alpha: float) -> float:
    """Binary entropy in bits; 0 at both endpoints."""
    if not 0.0 <= alpha <= 1.0:
        raise InstanceError(f"entropy is defined on [0, 1], got {alpha}")
    if alpha in (0.0, 1.0):
        return 0.0
    return -alpha * math.log2(alpha) - (1 - alpha) * math.log2(1 - alpha)


def _slack(alpha: float, c: float) -> float:
    return (1 - alpha) / 2 - (c * entropy2(alpha) + alpha)


@dataclass(frozen=True)
class AlphaParams:
    """
    Block fraction alpha and block count k. k * alpha >= 1, the pigeonhole condition that
    guarantees a block whose complement satisfies all but alpha*m clauses.
    """

    c: float
    alpha: float
    k: int
    entropy: float

    def table_budget(self, m: int) -> int:
        """ceil(alpha * m): the largest clause set a table entry may cover."""
        return max(0, math.ceil(self.alpha * m - _EPS))

    def claim_threshold(self, m: int) -> int:
        """Clauses the complement of the qualifying block must satisfy: m - floor(alpha*m)."""
        return m - math.floor(self.alpha * m + _EPS)

    def fit(self, n: int) -> AlphaParams:
        """
        Shrinks k to n when there are fewer variables than blocks, raising alpha to 1/k so
        that k * alpha >= 1 still holds.
        """
        if n < 1:
            raise InstanceError(f"cannot fit blocks to n={n}")
        if self.k <= n:
            return self
        k = n
        alpha = max(self.alpha, 1 / k)
        _logger.debug("n=%d < k=%d: using k=%d, alpha=%.6f", n, self.k, k, alpha)
        return replace(self, alpha=alpha, k=k, entropy=entropy2(alpha))


def choose_alpha(c: float, override: Optional[float] = None) -> AlphaParams:
    """
    Largest alpha < 1/6 with (1 - alpha)/2 >= c * H2(alpha) + alpha, found by bisection.

    :param c: Clause density bound, m <= c * n.
    :param override: Use this alpha instead. A value violating the inequality is accepted
        with a warning.

    :raises: InstanceError: If c <= 0 or the override is outside (0, 1/6).
    """
    if c <= 0:
        raise InstanceError(f"clause density must be positive, got c={c}")
    if override is not None:
        if not 0.0 < override < _ALPHA_CEILING:
            raise InstanceError(f"alpha override must lie in (0, 1/6), got {override}")
        if _slack(override, c) < 0:
            _logger.warning(
                "alpha=%s violates (1-alpha)/2 >= c*H2(alpha)+alpha for c=%s", override, c
            )
        alpha = override
    else:
        lo, hi = 0.0, _ALPHA_CEILING
        if _slack(math.nextafter(hi, 0.0), c) >= 0:
            lo = math.nextafter(hi, 0.0)
        else:
            for _ in range(_BISECTION_STEPS):
                mid = (lo + hi) / 2
                if _slack(mid, c) >= 0:
                    lo = mid
                else:
                    hi = mid
        alpha = lo
    return AlphaParams(c=c, alpha=alpha, k=math.ceil(1 / alpha), entropy=entropy2(alpha))


def partition_blocks(n: int, k: int) -> list[tuple[int, ...]]:
    """
    Contiguous blocks of 1-based variables; the first n mod k blocks are one larger.

    :raises: InstanceError: If k < 1 or k > n.
    """
    if k < 1 or k > n:
        raise InstanceError(f"cannot cut {n} variables into {k} non-empty blocks")
    size, extra = divmod(n, k)
    blocks = []
    start = 1
    for i in range(k):
        width = size + (1 if i < extra else 0)
        blocks.append(tuple(range(start, start + width)))
        start += width
    return blocks


@dataclass
class CoverTables:
    """
    levels[l] holds the sorted keys of popcount l and, aligned with them, the index (in
    binary counting order over `block`) of the first block assignment covering each key.
    """

    block: tuple[int, ...]
    budget: int
    levels: dict[int, tuple[list[int], list[int]]] = field(default_factory=dict)
    build_ops: int = 0
    strategy: str = "subsets"

    @property
    def entries(self) -> int:
        return sum(len(keys) for keys, _ in self.levels.values())

    def witness(self, u: int) -> Optional[PartialAssignment]:
        level = self.levels.get(_popcount(u))
        if level is None:
            return None
        keys, witnesses = level
        pos = bisect.bisect_left(keys, u)
        if pos < len(keys) and keys[pos] == u:
            return PartialAssignment.from_index(self.block, witnesses[pos])
        return None

    def items(self) -> list[tuple[int, PartialAssignment]]:
        return [
            (key, PartialAssignment.from_index(self.block, w))
            for _, (keys, witnesses) in sorted(self.levels.items())
            for key, w in zip(keys, witnesses)
        ]


def _bit_positions(mask: int) -> list[int]:
    return [j for j in range(mask.bit_length()) if (mask >> j) & 1]


def build_tables(
    f: CnfFormula,
    block: Sequence[int],
    budget: int,
    config: Optional[SolverConfiguration] = None,
    strategy: Optional[str] = None,
) -> CoverTables:
    """
    Tabulates, for every clause set u with 1 <= |u| <= budget, the first assignment b of the
    block (in binary counting order) that satisfies every clause in u.

    :param strategy: "subsets" enumerates the subsets of each S(b); "pairs" tests every
        (u, b) pair. By default "subsets" unless the subsets would exceed the configured cap.

    :raises: GuardError: If the block is too large to enumerate.
    """
    config = config or default_configuration()
    block = tuple(block)
    if len(block) > config.max_enumeration_bits:
        raise GuardError(
            f"block of {len(block)} variables exceeds the limit of {config.max_enumeration_bits}"
        )
    covers = [
        satisfied_clause_set(f, PartialAssignment.from_index(block, index))
        for index in range(1 << len(block))
    ]
    if strategy is None:
        subset_total = sum(1 << _popcount(s) for s in covers)
        strategy = "subsets" if subset_total <= config.subset_explosion_cap else "pairs"
        if strategy == "pairs":
            _logger.debug(
                "subset enumeration would touch %d keys; falling back to pair filtering",
                subset_total,
            )

    first: dict[int, int] = {}
    ops = len(covers)
    if strategy == "subsets":
        for index, s in enumerate(covers):
            bits = _bit_positions(s)
            for size in range(1, min(budget, len(bits)) + 1):
                for combo in itertools.combinations(bits, size):
                    ops += 1
                    key = sum(1 << j for j in combo)
                    first.setdefault(key, index)
    elif strategy == "pairs":
        for size in range(1, min(budget, f.m) + 1):
            for combo in itertools.combinations(range(f.m), size):
                key = sum(1 << j for j in combo)
                for index, s in enumerate(covers):
                    ops += 1
                    if key & s == key:
                        first[key] = index
                        break
    else:
        raise InstanceError(f"unknown table strategy {strategy!r}")

    tables = CoverTables(block=block, budget=budget, build_ops=ops, strategy=strategy)
    for key in sorted(first):
        keys, witnesses = tables.levels.setdefault(_popcount(key), ([], []))
        keys.append(key)
        witnesses.append(first[key])
    return tables


def cnf_oracle(
    v: PartialAssignment, tables: CoverTables, f: CnfFormula
) -> Optional[PartialAssignment]:
    """
    :param v: Assignment to exactly the variables outside the tables' block.

    :returns: A block assignment b such that (v, b) satisfies F, the empty assignment when v
        alone satisfies F, or None.
    """
    block_set = set(tables.block)
    expected = tuple(x for x in range(1, f.n + 1) if x not in block_set)
    if v.support != expected:
        raise InstanceError("v must assign exactly the variables outside the block")
    unsatisfied = ~satisfied_clause_set(f, v) & f.all_clauses_mask
    count = _popcount(unsatisfied)
    if count == 0:
        return PartialAssignment((), ())
    if count > tables.budget:
        return None
    return tables.witness(unsatisfied)


def predicted_table_cost(m: int, alpha: float, block_size: int) -> int:
    """C(m, ceil(alpha*m)) * 2^block_size, the tabulation cost bound."""
    return math.comb(m, max(0, math.ceil(alpha * m - _EPS))) * (1 << block_size)


@dataclass(frozen=True)
class CnfSolveResult:
    assignment: Optional[Assignment]
    stats: SolveStats
    block: Optional[int] = None

    @property
    def satisfiable(self) -> bool:
        return self.assignment is not None


def solve_cnf(
    f: CnfFormula,
    c: Optional[float] = None,
    seed: int = 0,
    retries: Optional[int] = None,
    alpha_override: Optional[float] = None,
    config: Optional[SolverConfiguration] = None,
) -> CnfSolveResult:
    """
    Loops over the blocks; for each, builds its cover tables and searches the complement
    assignments. Block i (0-based) searches with seeds derived from (seed, i).

    :param c: Clause density bound. Defaults to m/n; a value below m/n is widened to m/n.

    :returns: A verified satisfying assignment, or None if no block's search found one.

    :raises: GuardError: If a complement block is too large to enumerate.
    """
    config = config or default_configuration()
    retries = config.retries if retries is None else retries
    started = time.perf_counter()

    density = f.m / f.n
    if c is None:
        c = density if density > 0 else 1.0
    elif f.m > c * f.n:
        _logger.warning("m=%d exceeds c*n=%s; widening c to %s", f.m, c * f.n, density)
        c = density
    params = choose_alpha(c, alpha_override).fit(f.n)
    blocks = partition_blocks(f.n, params.k)
    budget = params.table_budget(f.m)
    _logger.debug("alpha=%.6f k=%d budget=%d", params.alpha, params.k, budget)

    stats = SolveStats(
        details={"alpha": params.alpha, "k": params.k, "table_budget": budget, "blocks": []}
    )
    for i, block in enumerate(blocks):
        block_set = set(block)
        complement = tuple(x for x in range(1, f.n + 1) if x not in block_set)
        if len(complement) > config.max_enumeration_bits:
            raise GuardError(
                f"complement of {len(complement)} variables exceeds the limit of "
                f"{config.max_enumeration_bits}"
            )
        tables = build_tables(f, block, budget, config)
        summary = enumerate_marked(
            lambda v: cnf_oracle(PartialAssignment.from_index(complement, v), tables, f)
            is not None,
            1 << len(complement),
        )
        search = bbht_with_retries(
            summary,
            derive_seed(seed, i),
            retries,
            config.bbht_growth,
            config.bbht_cutoff_factor,
        )
        stats.quantum_queries += search.quantum_queries
        stats.classical_setup_evals += summary.classical_setup_evals
        stats.preprocess_ops += tables.build_ops
        stats.attempts += search.attempts
        stats.details["blocks"].append(
            {
                "block": i + 1,
                "table_entries": tables.entries,
                "table_build_ops": tables.build_ops,
                "predicted_table_cost": predicted_table_cost(f.m, params.alpha, len(block)),
                "marked": summary.M,
                "quantum_queries": search.quantum_queries,
            }
        )
        if search.found is None:
            continue

        v = PartialAssignment.from_index(complement, search.found)
        b = cnf_oracle(v, tables, f)
        if b is None:
            raise CertificateError(f"search returned unmarked complement assignment {v}")
        x = v.merge(b, f.n)
        if not f.is_satisfied_by(x):
            raise CertificateError(f"combined assignment {x} does not satisfy the formula")
        if config.record_wall_time:
            stats.wall_ms = (time.perf_counter() - started) * 1000.0
        return CnfSolveResult(assignment=x, stats=stats, block=i + 1)

    _logger.info("No satisfying assignment found in any of %d blocks", len(blocks))
    if config.record_wall_time:
        stats.wall_ms = (time.perf_counter() - started) * 1000.0
    return CnfSolveResult(assignment=None, stats=stats)


def verify_claim(f: CnfFormula, a_star: Assignment, params: AlphaParams) -> int:
    """
    Finds a block whose complement, under a_star, satisfies at least m - floor(alpha*m)
    clauses.

    :returns: The 1-based index of the first such block.

    :raises: InstanceError: If a_star does not satisfy f.
    :raises: CertificateError: If no block qualifies.
    """
    if a_star.n != f.n or not f.is_satisfied_by(a_star):
        raise InstanceError("verify_claim needs a satisfying assignment of the formula")
    params = params.fit(f.n)
    threshold = params.claim_threshold(f.m)
    for i, block in enumerate(partition_blocks(f.n, params.k)):
        block_set = set(block)
        complement = [x for x in range(1, f.n + 1) if x not in block_set]
        if _popcount(satisfied_clause_set(f, a_star.restrict(complement))) >= threshold:
            return i + 1
    raise CertificateError(
        f"no block complement satisfies {threshold} of {f.m} clauses (k={params.k})"
    )
