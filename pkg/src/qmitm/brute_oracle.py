"""
Exhaustive reference answers. These share nothing with the solvers beyond the instance
types, so agreement between the two is evidence rather than tautology.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from .config import default_configuration
from .errors import GuardError
from .instances import CnfFormula, IlpInstance

__all__ = [
    "BruteResult",
    "brute_ilp",
    "brute_cnf",
    "brute_exactly_one",
    "brute_subset_sum",
    "brute_pair_claw",
    "brute_collision",
]

MAX_BITS = 24
MAX_PAIR_SIDE = 1 << 12


@dataclass(frozen=True)
class BruteResult:
    """witnesses holds at most `cap` entries in enumeration order; count is always exact."""

    feasible: bool
    count: int
    enumeration_cost: int
    witnesses: tuple[Any, ...] = field(default=())
    capped: bool = False


def _guard_bits(n: int) -> None:
    if n > MAX_BITS:
        raise GuardError(f"brute force is limited to {MAX_BITS} variables, got {n}")


def _collect(candidates: Iterable[Any], cost: int, cap: Optional[int]) -> BruteResult:
    if cap is None:
        cap = default_configuration().witness_cap
    kept = []
    count = 0
    for item in candidates:
        count += 1
        if len(kept) < cap:
            kept.append(item)
    return BruteResult(
        feasible=count > 0,
        count=count,
        enumeration_cost=cost,
        witnesses=tuple(kept),
        capped=count > len(kept),
    )


def _cube(n: int) -> Iterable[tuple[int, ...]]:
    # product() varies the last position fastest; reversing gives x_1 as the low bit
    return (tuple(reversed(bits)) for bits in itertools.product((0, 1), repeat=n))


def brute_ilp(inst: IlpInstance, cap: Optional[int] = None) -> BruteResult:
    """All feasible assignments as bit tuples (x_1, ..., x_n), in binary counting order."""
    _guard_bits(inst.n)

    def holds(x: tuple[int, ...]) -> bool:
        for i, (row, bound) in enumerate(zip(inst.a, inst.b)):
            total = sum(itertools.compress(row, x))
            if (total != bound) if i in inst.equality_rows else (total > bound):
                return False
        return True

    return _collect(filter(holds, _cube(inst.n)), 1 << inst.n, cap)


def _literal_true(lit: int, x: tuple[int, ...]) -> bool:
    value = x[abs(lit) - 1]
    return value == 1 if lit > 0 else value == 0


def brute_cnf(f: CnfFormula, cap: Optional[int] = None) -> BruteResult:
    _guard_bits(f.n)

    def satisfies(x: tuple[int, ...]) -> bool:
        return all(any(_literal_true(lit, x) for lit in clause) for clause in f.clauses)

    return _collect(filter(satisfies, _cube(f.n)), 1 << f.n, cap)


def brute_exactly_one(f: CnfFormula, cap: Optional[int] = None) -> BruteResult:
    """Assignments making exactly one literal true in every clause."""
    _guard_bits(f.n)

    def exactly_one(x: tuple[int, ...]) -> bool:
        return all(sum(_literal_true(lit, x) for lit in clause) == 1 for clause in f.clauses)

    return _collect(filter(exactly_one, _cube(f.n)), 1 << f.n, cap)


def brute_subset_sum(a: Sequence[int], t: int, cap: Optional[int] = None) -> BruteResult:
    n = len(a)
    _guard_bits(n)
    hits = (x for x in _cube(n) if sum(itertools.compress(a, x)) == t)
    return _collect(hits, 1 << n, cap)


def brute_pair_claw(
    f: Sequence[Any], g: Sequence[Any], cap: Optional[int] = None
) -> BruteResult:
    """All (x, y) with f(x) = g(y), 0-based. Values may be tuples for simultaneous claws."""
    if max(len(f), len(g)) > MAX_PAIR_SIDE:
        raise GuardError(f"pair brute force is limited to {MAX_PAIR_SIDE} points per side")
    pairs = (
        (x, y) for x, y in itertools.product(range(len(f)), range(len(g))) if f[x] == g[y]
    )
    return _collect(pairs, len(f) * len(g), cap)


def brute_collision(
    family: Sequence[Sequence[int]], cap: Optional[int] = None
) -> BruteResult:
    """All x < y with f_i(x) = f_i(y) for every function of the family."""
    size = len(family[0]) if family else 0
    if size > MAX_PAIR_SIDE:
        raise GuardError(f"collision brute force is limited to N <= {MAX_PAIR_SIDE}")
    pairs = (
        (x, y)
        for x, y in itertools.combinations(range(size), 2)
        if all(table[x] == table[y] for table in family)
    )
    return _collect(pairs, size * size, cap)
