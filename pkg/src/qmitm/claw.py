"""
Black-box claw and collision finders with counted oracles.

Two oracle shapes are supported. A SymmetricClawOracle is a pair of functions P1, P2 on
(x, y) in {0,1}^n x {0,1}^n obeying the projection promise: P1 looks only at the bits of x
where y is 1 and P2 only at the bits where y is 0. A FunctionFamilyOracle holds d functions
f_1..f_d on [0, N), optionally paired with g_1..g_d.

Bit strings are ints with bit i-1 holding position i. Family domains are 0-based.
"""

from __future__ import annotations

import bisect
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

from .config import SolverConfiguration, default_configuration
from .errors import CertificateError, GuardError, InstanceError
from .instances import COEFFICIENT_LIMIT
from .qsearch import amplitude_amplify, bbht_with_retries, enumerate_marked, grover_success_prob
from .rng import SplitMix64, derive_seed
from .stats import SolveStats

__all__ = [
    "Promise",
    "SymmetricClawOracle",
    "FunctionFamilyOracle",
    "PromiseViolation",
    "PromiseReport",
    "ClawResult",
    "PairResult",
    "knapsack_claw",
    "solve_symmetric_claw",
    "solve_pair_claw",
    "solve_simultaneous_claw",
    "solve_samepoint_claw",
    "solve_simultaneous_collision",
    "validate_promise",
    "validate_family_promise",
]

_logger = logging.getLogger(__name__)

_MAX_REPORTED_VIOLATIONS = 100

ClawFunction = Callable[[int, int], tuple[int, int]]
ValueGroups = dict[tuple[int, ...], list[int]]


class SymmetricClawOracle:
    """
    Counted black box for (x, y) -> (P1(x, y), P2(x, y)). evaluate() is a query; peek() is
    the simulator looking at the truth table and never counts.
    """

    def __init__(self, n: int, fn: ClawFunction, name: str = "") -> None:
        if n < 1:
            raise InstanceError(f"claw oracle needs n >= 1, got {n}")
        self.n = n
        self.name = name
        self._fn = fn
        self._queries = 0
        self._simulated = 0

    @property
    def query_count(self) -> int:
        return self._queries + self._simulated

    def _check(self, x: int, y: int) -> None:
        limit = 1 << self.n
        if not (0 <= x < limit and 0 <= y < limit):
            raise InstanceError(f"claw oracle arguments must be {self.n}-bit strings")

    def evaluate(self, x: int, y: int) -> tuple[int, int]:
        self._check(x, y)
        self._queries += 1
        return self._fn(x, y)

    def peek(self, x: int, y: int) -> tuple[int, int]:
        self._check(x, y)
        return self._fn(x, y)

    def charge(self, queries: int) -> None:
        """Books queries spent inside a simulated search."""
        self._simulated += queries


def knapsack_claw(a: Sequence[int], t: int = 0) -> SymmetricClawOracle:
    """
    P1(x, y) = sum of a_i x_i over positions where y_i = 1, P2(x, y) = t minus the same sum
    over positions where y_i = 0. P1 = P2 exactly when sum a_i x_i = t, whatever y is.
    """
    coefficients = tuple(int(v) for v in a)
    n = len(coefficients)
    if n < 1:
        raise InstanceError("knapsack claw needs at least one coefficient")
    bound = COEFFICIENT_LIMIT // n
    if any(abs(v) > bound for v in coefficients) or abs(t) > COEFFICIENT_LIMIT:
        raise InstanceError(f"knapsack claw coefficients must not exceed {bound} for n={n}")

    def fn(x: int, y: int) -> tuple[int, int]:
        p1 = 0
        p2 = t
        for i, coef in enumerate(coefficients):
            if (x >> i) & 1:
                if (y >> i) & 1:
                    p1 += coef
                else:
                    p2 -= coef
        return p1, p2

    return SymmetricClawOracle(n, fn, name=f"knapsack(t={t})")


class Promise(str, Enum):
    NONE = "none"
    ONE_TO_ONE = "all-1-to-1"
    TWO_TO_ONE = "all-2-to-1"


class FunctionFamilyOracle:
    """
    d functions f_i: [0, N) -> ints, optionally with partners g_i, as truth tables. Every
    evaluate() call is one query against one function and is counted per function.
    """

    def __init__(
        self,
        f_tables: Sequence[Sequence[int]],
        g_tables: Optional[Sequence[Sequence[int]]] = None,
        promise: Promise | str = Promise.NONE,
    ) -> None:
        self._f = tuple(tuple(int(v) for v in table) for table in f_tables)
        self._g = None if g_tables is None else tuple(tuple(int(v) for v in t) for t in g_tables)
        if not self._f:
            raise InstanceError("a function family needs at least one function")
        self.N = len(self._f[0])
        if self.N < 1:
            raise InstanceError("function domains must be non-empty")
        tables = self._f + (self._g or ())
        if any(len(table) != self.N for table in tables):
            raise InstanceError("every function in a family must share the domain size")
        if self._g is not None and len(self._g) != len(self._f):
            raise InstanceError(f"{len(self._f)} functions f_i but {len(self._g)} functions g_i")
        self.promise = Promise(promise)
        self.f_queries = [0] * self.d
        self.g_queries = [0] * self.d
        self.simulated_queries = 0

    @property
    def d(self) -> int:
        return len(self._f)

    @property
    def has_partners(self) -> bool:
        return self._g is not None

    @property
    def total_queries(self) -> int:
        return sum(self.f_queries) + sum(self.g_queries) + self.simulated_queries

    def _table(self, i: int, side: str) -> tuple[int, ...]:
        if not 0 <= i < self.d:
            raise InstanceError(f"function index {i} outside [0, {self.d})")
        if side == "f":
            return self._f[i]
        if side == "g" and self._g is not None:
            return self._g[i]
        raise InstanceError(f"family has no {side!r} functions")

    def evaluate(self, i: int, x: int, side: str = "f") -> int:
        table = self._table(i, side)
        if not 0 <= x < self.N:
            raise InstanceError(f"point {x} outside [0, {self.N})")
        counters = self.f_queries if side == "f" else self.g_queries
        counters[i] += 1
        return table[x]

    def evaluate_tuple(self, x: int, side: str = "f") -> tuple[int, ...]:
        """All d functions of one side at x: d queries."""
        return tuple(self.evaluate(i, x, side) for i in range(self.d))

    def peek_tuple(self, x: int, side: str = "f") -> tuple[int, ...]:
        return tuple(self._table(i, side)[x] for i in range(self.d))

    def tables(self, side: str = "f") -> tuple[tuple[int, ...], ...]:
        return tuple(self._table(i, side) for i in range(self.d))

    def charge(self, queries: int) -> None:
        self.simulated_queries += queries


@dataclass(frozen=True)
class ClawResult:
    x: Optional[int]
    stats: SolveStats

    @property
    def found(self) -> bool:
        return self.x is not None


@dataclass(frozen=True)
class PairResult:
    pair: Optional[tuple[int, int]]
    stats: SolveStats

    @property
    def found(self) -> bool:
        return self.pair is not None


def _finish(stats: SolveStats, started: float, config: SolverConfiguration) -> SolveStats:
    if config.record_wall_time:
        stats.wall_ms = (time.perf_counter() - started) * 1000.0
    return stats


def solve_symmetric_claw(
    o: SymmetricClawOracle,
    seed: int = 0,
    retries: Optional[int] = None,
    config: Optional[SolverConfiguration] = None,
) -> ClawResult:
    """
    Fixes y = 1^k 0^(n-k) with k = floor(n/3), queries and sorts P1(x, y) over the 2^k
    strings x supported on the first k positions, then searches the strings supported on the
    remaining positions for one whose P2 value is in the sorted list. The two halves
    concatenate into a claw.

    :returns: x with P1(x, y) = P2(x, y), verified by one more query, or None.

    :raises: GuardError: If n - k exceeds the enumeration limit.
    """
    config = config or default_configuration()
    retries = config.retries if retries is None else retries
    started = time.perf_counter()
    n = o.n
    if n < 3:
        raise InstanceError(f"the symmetric claw split needs n >= 3, got {n}")
    k = n // 3
    if n - k > config.max_enumeration_bits:
        raise GuardError(f"n - floor(n/3) = {n - k} exceeds {config.max_enumeration_bits}")
    start_count = o.query_count
    y = (1 << k) - 1

    values = sorted((o.evaluate(x_a, y)[0], x_a) for x_a in range(1 << k))
    keys = [v for v, _ in values]

    def matching_a(p2: int) -> Optional[int]:
        pos = bisect.bisect_left(keys, p2)
        return values[pos][1] if pos < len(keys) and keys[pos] == p2 else None

    summary = enumerate_marked(
        lambda u: matching_a(o.peek(u << k, y)[1]) is not None, 1 << (n - k)
    )
    search = bbht_with_retries(
        summary, seed, retries, config.bbht_growth, config.bbht_cutoff_factor
    )
    o.charge(search.quantum_queries)

    stats = SolveStats(
        classical_setup_evals=summary.classical_setup_evals,
        preprocess_ops=len(values),
        attempts=search.attempts,
        details={"sort_queries": 1 << k, "search_domain": 1 << (n - k), "marked": summary.M},
    )
    if search.found is None:
        stats.quantum_queries = o.query_count - start_count
        return ClawResult(x=None, stats=_finish(stats, started, config))

    x_b = search.found << k
    x_a = matching_a(o.peek(x_b, y)[1])
    assert x_a is not None
    x = x_a | x_b
    p1, p2 = o.evaluate(x, y)
    if p1 != p2:
        raise CertificateError(f"recombined string {x:#x} is not a claw ({p1} != {p2})")
    stats.quantum_queries = o.query_count - start_count
    return ClawResult(x=x, stats=_finish(stats, started, config))


def _claw_groups(
    fam: FunctionFamilyOracle,
) -> tuple[list[tuple[int, int]], ValueGroups, ValueGroups]:
    """
    Groups the domain by the value tuple on each side. Returns the (|X_v|, |Y_v|) sizes of
    every tuple v occurring on both sides, with the x and y lists per tuple.
    """
    xs: ValueGroups = {}
    ys: ValueGroups = {}
    for point in range(fam.N):
        xs.setdefault(fam.peek_tuple(point, "f"), []).append(point)
        ys.setdefault(fam.peek_tuple(point, "g"), []).append(point)
    shared = sorted(set(xs) & set(ys))
    x_groups = {v: xs[v] for v in shared}
    y_groups = {v: ys[v] for v in shared}
    return [(len(xs[v]), len(ys[v])) for v in shared], x_groups, y_groups


def _grover_iterations(N: int, marked: int) -> int:
    """Optimal iteration count for `marked` of N; an empty marked set runs the M=1 bound."""
    return math.floor(math.pi / 4 * math.sqrt(N / max(marked, 1)))


def _inner_run(groups: Sequence[tuple[int, int]], N: int, s: int) -> tuple[float, float]:
    """
    Exact success probability and expected Grover iteration count of one inner run: a
    uniform s-subset A of the x side, then Grover for a y whose tuple some x in A shares,
    with the iteration count tuned to the number of such y. Sums over how many points of
    each claw group A hits; points outside every group only consume subset slots.
    """
    claw_points = sum(k for k, _ in groups)
    others = N - claw_points
    # (points of A inside claw groups, marked y count) -> number of ways
    states: dict[tuple[int, int], int] = {(0, 0): 1}
    for k_v, w_v in groups:
        nxt: dict[tuple[int, int], int] = {}
        for (used, marked), ways in states.items():
            nxt[(used, marked)] = nxt.get((used, marked), 0) + ways
            for j in range(1, min(k_v, s - used) + 1):
                key = (used + j, marked + w_v)
                nxt[key] = nxt.get(key, 0) + ways * math.comb(k_v, j)
        states = nxt
    total = math.comb(N, s)
    p = 0.0
    iterations = 0.0
    for (used, marked), ways in states.items():
        if s - used > others:
            continue
        weight = ways * math.comb(others, s - used) / total
        t = _grover_iterations(N, marked)
        iterations += weight * t
        if marked:
            p += weight * grover_success_prob(N, marked, t)
    return min(1.0, p), iterations


def solve_simultaneous_claw(
    fam: FunctionFamilyOracle,
    subset_size: Optional[int] = None,
    seed: int = 0,
    retries: Optional[int] = None,
    config: Optional[SolverConfiguration] = None,
) -> PairResult:
    """
    Finds (x, y) with f_i(x) = g_i(y) for every i.

    One inner run queries all f_i on a random subset A of size s and sorts the d-tuples, then
    Grover-searches [0, N) for a y whose g-tuple is in the table. Amplitude amplification over
    the subset choice is simulated from the exact inner success probability.

    :param subset_size: s, default ceil(sqrt(N)).

    :returns: A pair verified with 2d queries, or None.
    """
    config = config or default_configuration()
    retries = config.retries if retries is None else retries
    started = time.perf_counter()
    if not fam.has_partners:
        raise InstanceError("claw finding needs partner functions g_i")
    N, d = fam.N, fam.d
    s = math.isqrt(N - 1) + 1 if subset_size is None else subset_size
    if not 1 <= s <= N:
        raise InstanceError(f"subset size must lie in [1, {N}], got {s}")
    start_count = fam.total_queries

    groups, x_groups, y_groups = _claw_groups(fam)
    values = sorted(x_groups)
    p, iterations = _inner_run(groups, N, s)
    inner_cost = d * s + d * (math.ceil(iterations - 1e-9) + 1)
    weights = [k * w for k, w in groups]
    total_weight = sum(weights)

    def sample_witness(rng: SplitMix64) -> tuple[int, int]:
        pick = rng.randbelow(total_weight)
        index = 0
        while pick >= weights[index]:
            pick -= weights[index]
            index += 1
        v = values[index]
        xs, ys = x_groups[v], y_groups[v]
        return xs[rng.randbelow(len(xs))], ys[rng.randbelow(len(ys))]

    stats = SolveStats(
        classical_setup_evals=2 * d * N,
        details={
            "subset_size": s,
            "inner_success_prob": p,
            "inner_iterations": iterations,
            "claw_values": len(groups),
        },
    )
    pair: Optional[tuple[int, int]] = None
    for attempt in range(retries + 1):
        outcome = amplitude_amplify(p, inner_cost, sample_witness, seed + attempt, p_min=s / N)
        fam.charge(outcome.total_queries)
        stats.attempts += 1
        stats.details["outer_rounds"] = outcome.outer_rounds
        if outcome.success:
            pair = outcome.witness
            break
        _logger.debug("claw amplification attempt %d failed", attempt + 1)

    if pair is not None:
        x, y = pair
        if fam.evaluate_tuple(x, "f") != fam.evaluate_tuple(y, "g"):
            raise CertificateError(f"pair ({x}, {y}) is not a simultaneous claw")
    else:
        _logger.info("No claw found after %d attempts", stats.attempts)
    stats.quantum_queries = fam.total_queries - start_count
    return PairResult(pair=pair, stats=_finish(stats, started, config))


def solve_pair_claw(
    fam: FunctionFamilyOracle,
    subset_size: Optional[int] = None,
    seed: int = 0,
    retries: Optional[int] = None,
    config: Optional[SolverConfiguration] = None,
) -> PairResult:
    """Claw finding for a single pair (f, g): x, y with f(x) = g(y)."""
    if fam.d != 1:
        raise InstanceError(f"pair claw finding takes one (f, g) pair, got d={fam.d}")
    return solve_simultaneous_claw(fam, subset_size, seed, retries, config)


def solve_samepoint_claw(
    fam: FunctionFamilyOracle,
    seed: int = 0,
    retries: Optional[int] = None,
    config: Optional[SolverConfiguration] = None,
) -> ClawResult:
    """
    Finds one x with f_i(x) = g_i(x) for every i: plain Grover over [0, N), each search
    query evaluating all 2d functions at one point.
    """
    config = config or default_configuration()
    retries = config.retries if retries is None else retries
    started = time.perf_counter()
    if not fam.has_partners:
        raise InstanceError("claw finding needs partner functions g_i")
    start_count = fam.total_queries
    summary = enumerate_marked(
        lambda x: fam.peek_tuple(x, "f") == fam.peek_tuple(x, "g"), fam.N
    )
    search = bbht_with_retries(
        summary, seed, retries, config.bbht_growth, config.bbht_cutoff_factor
    )
    fam.charge(2 * fam.d * search.quantum_queries)
    stats = SolveStats(
        classical_setup_evals=2 * fam.d * summary.classical_setup_evals,
        attempts=search.attempts,
        details={"marked": summary.M},
    )
    x = search.found
    if x is not None and fam.evaluate_tuple(x, "f") != fam.evaluate_tuple(x, "g"):
        raise CertificateError(f"point {x} is not a same-point claw")
    stats.quantum_queries = fam.total_queries - start_count
    return ClawResult(x=x, stats=_finish(stats, started, config))


def solve_simultaneous_collision(
    fam: FunctionFamilyOracle,
    subset_size: Optional[int] = None,
    seed: int = 0,
    retries: Optional[int] = None,
    config: Optional[SolverConfiguration] = None,
) -> PairResult:
    """
    Finds x != y with f_i(x) = f_i(y) for every i.

    Queries all f_i on a random subset A of size s. A collision inside A is returned
    directly; otherwise Grover searches the rest of the domain for a point whose tuple is
    already in A's table.

    :returns: The pair (x, y) with x < y, verified with 2d queries, or None.
    """
    config = config or default_configuration()
    retries = config.retries if retries is None else retries
    started = time.perf_counter()
    N, d = fam.N, fam.d
    s = math.isqrt(N - 1) + 1 if subset_size is None else subset_size
    if not 1 <= s <= N:
        raise InstanceError(f"subset size must lie in [1, {N}], got {s}")
    start_count = fam.total_queries
    rng = SplitMix64(seed)

    subset = sorted(rng.sample_without_replacement(N, s))
    table: dict[tuple[int, ...], int] = {}
    pair: Optional[tuple[int, int]] = None
    for x in subset:
        value = fam.evaluate_tuple(x, "f")
        if value in table and pair is None:
            pair = (table[value], x)
        table.setdefault(value, x)

    stats = SolveStats(details={"subset_size": s, "internal_collision": pair is not None})
    if pair is None:
        in_subset = set(subset)
        rest = [y for y in range(N) if y not in in_subset]
        if rest:
            summary = enumerate_marked(lambda j: fam.peek_tuple(rest[j], "f") in table, len(rest))
            search = bbht_with_retries(
                summary,
                derive_seed(seed, 1),
                retries,
                config.bbht_growth,
                config.bbht_cutoff_factor,
            )
            fam.charge(d * search.quantum_queries)
            stats.classical_setup_evals = d * summary.classical_setup_evals
            stats.attempts = search.attempts
            stats.details["marked"] = summary.M
            if search.found is not None:
                y = rest[search.found]
                x = table[fam.peek_tuple(y, "f")]
                pair = (min(x, y), max(x, y))

    if pair is not None:
        x, y = pair
        if x == y or fam.evaluate_tuple(x, "f") != fam.evaluate_tuple(y, "f"):
            raise CertificateError(f"pair ({x}, {y}) is not a simultaneous collision")
    else:
        _logger.info("No collision found")
    stats.quantum_queries = fam.total_queries - start_count
    return PairResult(pair=pair, stats=_finish(stats, started, config))


@dataclass(frozen=True)
class PromiseViolation:
    condition: str
    x: int
    y: int
    detail: str = ""


@dataclass
class PromiseReport:
    checked: int = 0
    violation_count: int = 0
    violations: list[PromiseViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def add(self, violation: PromiseViolation) -> None:
        self.violation_count += 1
        if len(self.violations) < _MAX_REPORTED_VIOLATIONS:
            self.violations.append(violation)


def validate_promise(o: SymmetricClawOracle, max_n: int = 8) -> PromiseReport:
    """
    Exhaustive check of both promise conditions over all 2^(2n) pairs (x, y):
    a claw at (x, y) for one y must be a claw for every y, and P1 (P2) must not change when
    the bits of x where y is 0 (1) are cleared.

    :raises: GuardError: If n > max_n.
    """
    n = o.n
    if n > max_n:
        raise GuardError(f"exhaustive promise check is limited to n <= {max_n}, got n={n}")
    full = (1 << n) - 1
    report = PromiseReport()
    for x in range(1 << n):
        claw_ys = []
        other_ys = []
        for y in range(1 << n):
            report.checked += 1
            p1, p2 = o.peek(x, y)
            (claw_ys if p1 == p2 else other_ys).append(y)
            if o.peek(x & y, y)[0] != p1:
                report.add(PromiseViolation("2", x, y, "P1 reads x outside the ones of y"))
            if o.peek(x & ~y & full, y)[1] != p2:
                report.add(PromiseViolation("2", x, y, "P2 reads x outside the zeros of y"))
        if claw_ys and other_ys:
            report.add(
                PromiseViolation(
                    "1", x, other_ys[0], f"claw at y={claw_ys[0]} but not at y={other_ys[0]}"
                )
            )
    return report


def validate_family_promise(fam: FunctionFamilyOracle, max_n: int = 256) -> PromiseReport:
    """
    Checks the family's r-to-1 tag exhaustively: every value of every function must have
    exactly r preimages. Violations report x = function index and y = the offending value.

    :raises: GuardError: If N > max_n.
    """
    if fam.N > max_n:
        raise GuardError(f"exhaustive family check is limited to N <= {max_n}, got N={fam.N}")
    report = PromiseReport()
    if fam.promise is Promise.NONE:
        return report
    r = 1 if fam.promise is Promise.ONE_TO_ONE else 2
    sides = ("f", "g") if fam.has_partners else ("f",)
    for side in sides:
        for i, table in enumerate(fam.tables(side)):
            counts: dict[int, int] = {}
            for value in table:
                counts[value] = counts.get(value, 0) + 1
            report.checked += len(table)
            for value, count in sorted(counts.items()):
                if count != r:
                    report.add(
                        PromiseViolation(
                            "r-to-1", i, value, f"{side}_{i + 1} has {count} preimages, want {r}"
                        )
                    )
    return report
