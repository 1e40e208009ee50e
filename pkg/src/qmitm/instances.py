"""
Canonical problem representations, validation, evaluation, and the reductions between
problems: Knapsack to 0-1 ILP, exactly-one SAT to the 0-1 Group Problem, and optimisation
to repeated feasibility by bisection.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InstanceError

__all__ = [
    "COEFFICIENT_LIMIT",
    "KnapsackInstance",
    "IlpInstance",
    "Assignment",
    "PartialAssignment",
    "CnfFormula",
    "Sense",
    "OptimizationResult",
    "knapsack_to_ilp",
    "exactly_one_sat_to_group_ilp",
    "eval_ilp",
    "optimize_by_bisection",
    "satisfied_clause_set",
    "with_objective_row",
]

_logger = logging.getLogger(__name__)

# |a_ij| <= COEFFICIENT_LIMIT // n and |b_i| <= COEFFICIENT_LIMIT keep every partial sum
# exact in signed 64-bit arithmetic.
COEFFICIENT_LIMIT = 1 << 40
MAX_KNAPSACK_VARIABLES = 63


class Sense(str, Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class KnapsackInstance:
    """Positive coefficients c_1..c_n and a positive target K."""

    coefficients: tuple[int, ...]
    target: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))
        n = len(self.coefficients)
        if not 1 <= n <= MAX_KNAPSACK_VARIABLES:
            raise InstanceError(f"knapsack needs 1..{MAX_KNAPSACK_VARIABLES} coefficients, got {n}")
        if any(c < 1 for c in self.coefficients):
            raise InstanceError("knapsack coefficients must be positive")
        if self.target < 1:
            raise InstanceError(f"knapsack target must be positive, got {self.target}")
        bound = COEFFICIENT_LIMIT // n
        if any(c > bound for c in self.coefficients) or self.target > COEFFICIENT_LIMIT:
            raise InstanceError(f"knapsack coefficients must not exceed {bound} for n={n}")

    @property
    def n(self) -> int:
        return len(self.coefficients)


@dataclass(frozen=True)
class IlpInstance:
    """
    0-1 system with rows sum_j a[i][j] x_j <= b[i], or = b[i] for rows listed in
    equality_rows. The variable count is stored explicitly so a system with no rows
    (d = 0) still has a domain.
    """

    a: tuple[tuple[int, ...], ...]
    b: tuple[int, ...]
    n: int
    equality_rows: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(tuple(int(v) for v in row) for row in self.a))
        object.__setattr__(self, "b", tuple(int(v) for v in self.b))
        object.__setattr__(self, "equality_rows", frozenset(self.equality_rows))
        if self.n < 1:
            raise InstanceError(f"an ILP needs at least one variable, got n={self.n}")
        if len(self.a) != len(self.b):
            raise InstanceError(f"{len(self.a)} coefficient rows but {len(self.b)} bounds")
        for i, row in enumerate(self.a):
            if len(row) != self.n:
                raise InstanceError(f"row {i + 1} has {len(row)} coefficients, expected {self.n}")
        if any(not 0 <= i < len(self.a) for i in self.equality_rows):
            raise InstanceError("equality_rows refers to a row that does not exist")
        bound = COEFFICIENT_LIMIT // self.n
        for i, row in enumerate(self.a):
            if any(abs(v) > bound for v in row):
                raise InstanceError(
                    f"row {i + 1} has a coefficient above {bound} in magnitude (n={self.n})"
                )
        if any(abs(v) > COEFFICIENT_LIMIT for v in self.b):
            raise InstanceError(f"a bound exceeds {COEFFICIENT_LIMIT} in magnitude")

    @property
    def d(self) -> int:
        return len(self.a)

    @property
    def inequality_rows(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.d) if i not in self.equality_rows)

    @property
    def is_pure_equality(self) -> bool:
        return self.d > 0 and len(self.equality_rows) == self.d

    @cached_property
    def matrix(self) -> np.ndarray:
        """Read-only d x n int64 view of the coefficients."""
        m = np.array(self.a, dtype=np.int64).reshape(self.d, self.n)
        m.setflags(write=False)
        return m

    def relation(self, row: int) -> str:
        return "=" if row in self.equality_rows else "<="


@dataclass(frozen=True)
class Assignment:
    """Full 0-1 assignment; bits[j] is the value of x_{j+1}."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "bits", tuple(int(v) for v in self.bits))
        if any(v not in (0, 1) for v in self.bits):
            raise InstanceError("assignment entries must be 0 or 1")

    @property
    def n(self) -> int:
        return len(self.bits)

    @classmethod
    def from_index(cls, index: int, n: int) -> Assignment:
        """Bit j of index (LSB first) becomes x_{j+1}."""
        return cls(tuple((index >> j) & 1 for j in range(n)))

    def to_index(self) -> int:
        return sum(v << j for j, v in enumerate(self.bits))

    def restrict(self, support: Sequence[int]) -> PartialAssignment:
        return PartialAssignment(tuple(support), tuple(self.bits[v - 1] for v in support))

    def __str__(self) -> str:
        return "".join(str(v) for v in self.bits)


@dataclass(frozen=True)
class PartialAssignment:
    """Values on an ordered set of 1-based variable indices."""

    support: tuple[int, ...]
    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", tuple(int(v) for v in self.support))
        object.__setattr__(self, "bits", tuple(int(v) for v in self.bits))
        if len(self.support) != len(self.bits):
            raise InstanceError("partial assignment support and bits differ in length")
        if any(v < 1 for v in self.support):
            raise InstanceError("variable indices are 1-based")
        if any(a >= b for a, b in zip(self.support, self.support[1:])):
            raise InstanceError("partial assignment support must be strictly increasing")
        if any(v not in (0, 1) for v in self.bits):
            raise InstanceError("partial assignment entries must be 0 or 1")

    @classmethod
    def from_index(cls, support: Sequence[int], index: int) -> PartialAssignment:
        return cls(tuple(support), tuple((index >> j) & 1 for j in range(len(support))))

    def merge(self, other: PartialAssignment, n: int) -> Assignment:
        """
        Combines two partial assignments over disjoint supports into a full assignment of
        length n. Variables neither side assigns are set to 0.
        """
        bits = [0] * n
        seen = set()
        for part in (self, other):
            for var, value in zip(part.support, part.bits):
                if var in seen:
                    raise InstanceError(f"variable x{var} is assigned by both parts")
                if var > n:
                    raise InstanceError(f"variable x{var} is outside 1..{n}")
                seen.add(var)
                bits[var - 1] = value
        return Assignment(tuple(bits))

    def __len__(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class CnfFormula:
    """
    F = C_1 and ... and C_m over x_1..x_n, each clause a tuple of nonzero signed literals.
    Repeated literals inside a clause are collapsed, first occurrence kept.
    """

    n: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InstanceError(f"a formula needs at least one variable, got n={self.n}")
        normalized = []
        for j, clause in enumerate(self.clauses, start=1):
            lits = tuple(dict.fromkeys(int(lit) for lit in clause))
            if not lits:
                raise InstanceError(f"clause {j} is empty")
            for lit in lits:
                if lit == 0 or abs(lit) > self.n:
                    raise InstanceError(f"clause {j} has literal {lit} outside +-1..{self.n}")
                if -lit in lits:
                    raise InstanceError(f"clause {j} contains both x{abs(lit)} and its negation")
            normalized.append(lits)
        object.__setattr__(self, "clauses", tuple(normalized))

    @property
    def m(self) -> int:
        return len(self.clauses)

    @cached_property
    def literal_masks(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """
        (positive, negative): positive[v] is the bitmask of clauses containing x_v, negative[v]
        of clauses containing not x_v. Index 0 is unused.
        """
        pos = [0] * (self.n + 1)
        neg = [0] * (self.n + 1)
        for j, clause in enumerate(self.clauses):
            for lit in clause:
                if lit > 0:
                    pos[lit] |= 1 << j
                else:
                    neg[-lit] |= 1 << j
        return tuple(pos), tuple(neg)

    @property
    def all_clauses_mask(self) -> int:
        return (1 << self.m) - 1

    def is_satisfied_by(self, x: Assignment) -> bool:
        return satisfied_clause_set(self, x.restrict(range(1, self.n + 1))) == self.all_clauses_mask


def knapsack_to_ilp(k: KnapsackInstance) -> IlpInstance:
    """
    Two opposed inequalities, (c <= K) and (-c <= -K): feasible exactly when the
    knapsack sum equals K.
    """
    row = k.coefficients
    inst = IlpInstance(a=(row, tuple(-c for c in row)), b=(k.target, -k.target), n=k.n)
    assert inst.d == 2
    return inst


def exactly_one_sat_to_group_ilp(f: CnfFormula) -> IlpInstance:
    """
    For every clause: sum of positive-literal variables plus sum of (1 - x_v) over negative
    literals equals 1. The constants from negative literals move to the right-hand side, so
    b_j = 1 - (number of negative literals in C_j).
    """
    rows = []
    bounds = []
    for clause in f.clauses:
        row = [0] * f.n
        for lit in clause:
            row[abs(lit) - 1] = 1 if lit > 0 else -1
        rows.append(tuple(row))
        bounds.append(1 - sum(1 for lit in clause if lit < 0))
    return IlpInstance(a=tuple(rows), b=tuple(bounds), n=f.n, equality_rows=frozenset(range(f.m)))


def eval_ilp(inst: IlpInstance, x: Assignment) -> bool:
    """
    :returns: True iff every inequality row holds and every equality row is met exactly.

    :raises: InstanceError: If x has the wrong length.
    """
    if x.n != inst.n:
        raise InstanceError(f"assignment has {x.n} entries but the instance has {inst.n} variables")
    for i, (row, bound) in enumerate(zip(inst.a, inst.b)):
        lhs = sum(coef for coef, bit in zip(row, x.bits) if bit)
        if i in inst.equality_rows:
            if lhs != bound:
                return False
        elif lhs > bound:
            return False
    return True


def with_objective_row(inst: IlpInstance, row: Sequence[int], bound: int) -> IlpInstance:
    """Appends the inequality row . x <= bound."""
    return IlpInstance(
        a=inst.a + (tuple(row),),
        b=inst.b + (bound,),
        n=inst.n,
        equality_rows=inst.equality_rows,
    )


@dataclass(frozen=True)
class OptimizationResult:
    value: int
    witness: Assignment
    solve_calls: int


def optimize_by_bisection(
    inst: IlpInstance,
    objective: Sequence[int],
    sense: Sense | str,
    solve: Callable[[IlpInstance], Optional[Assignment]],
) -> Optional[OptimizationResult]:
    """
    Reduces optimisation to feasibility: appends "objective <= t" (negated for
    maximisation) and bisects t over [-sum|obj|, sum|obj|].

    :param solve: Feasibility procedure returning a witness or None. Its own retry policy
        governs the chance that a feasible threshold is reported infeasible.

    :returns: The optimal value with a witness, or None if the base system is infeasible.
    """
    sense = Sense(sense)
    if len(objective) != inst.n:
        raise InstanceError(f"objective has {len(objective)} entries, expected {inst.n}")
    bound = COEFFICIENT_LIMIT // inst.n
    if any(abs(v) > bound for v in objective):
        raise InstanceError(f"objective coefficient exceeds {bound} in magnitude")

    # Maximisation becomes minimisation of the negated objective.
    row = tuple(objective) if sense is Sense.MIN else tuple(-v for v in objective)

    def value_of(x: Assignment) -> int:
        return sum(c for c, bit in zip(row, x.bits) if bit)

    lo = -sum(abs(v) for v in row)
    hi = -lo
    calls = 1
    witness = solve(with_objective_row(inst, row, hi))
    if witness is None:
        _logger.info("Base system reported infeasible; nothing to optimise")
        return None
    hi = value_of(witness)

    while lo < hi:
        mid = (lo + hi) // 2
        calls += 1
        candidate = solve(with_objective_row(inst, row, mid))
        if candidate is None:
            lo = mid + 1
        else:
            witness = candidate
            hi = value_of(candidate)
        _logger.debug("bisection window [%d, %d] after %d solve calls", lo, hi, calls)

    value = hi if sense is Sense.MIN else -hi
    return OptimizationResult(value=value, witness=witness, solve_calls=calls)


def satisfied_clause_set(f: CnfFormula, p: PartialAssignment) -> int:
    """
    Bit j-1 of the result is set iff p makes some literal of C_j true. Variables outside
    p's support never satisfy a clause.
    """
    pos, neg = f.literal_masks
    mask = 0
    for var, value in zip(p.support, p.bits):
        if var > f.n:
            raise InstanceError(f"variable x{var} is outside 1..{f.n}")
        mask |= pos[var] if value else neg[var]
    return mask
