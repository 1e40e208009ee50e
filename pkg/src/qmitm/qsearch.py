"""
Grover search and amplitude amplification simulated in the query model.

Nothing here builds a state vector. A search over N items with M marked stays in the
two-dimensional span of the marked and unmarked uniform states, so after t iterations the
probability of measuring a marked item is sin^2((2t+1) * theta) with sin(theta) = sqrt(M/N).
The simulator samples that probability from a seeded splitmix64 stream and charges one query
per iteration plus one for checking the measured candidate.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Generic, Optional, TypeVar

from .errors import InstanceError
from .rng import SplitMix64

__all__ = [
    "DEFAULT_GROWTH",
    "DEFAULT_CUTOFF_FACTOR",
    "MarkedSetSummary",
    "RoundTrace",
    "SearchOutcome",
    "RetriedSearch",
    "AmplificationOutcome",
    "enumerate_marked",
    "grover_success_prob",
    "grover_known_m",
    "bbht_search",
    "bbht_with_retries",
    "amplitude_amplify",
]

_logger = logging.getLogger(__name__)

DEFAULT_GROWTH = 6 / 5
DEFAULT_CUTOFF_FACTOR = 9.0

W = TypeVar("W")


@dataclass(frozen=True)
class MarkedSetSummary:
    """
    What the simulator needs to know about a search domain [0, N): which items the oracle
    marks. Discovering them costs classical_setup_evals predicate calls, which are
    bookkeeping for the simulation and never count as quantum queries.
    """

    N: int
    marked: tuple[int, ...]
    classical_setup_evals: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "marked", tuple(self.marked))
        if self.N < 1:
            raise InstanceError(f"search domain must be non-empty, got N={self.N}")
        if len(set(self.marked)) != len(self.marked):
            raise InstanceError("marked indices must be distinct")
        if any(x < 0 or x >= self.N for x in self.marked):
            raise InstanceError(f"marked indices must lie in [0, {self.N})")

    @property
    def M(self) -> int:
        return len(self.marked)


@dataclass(frozen=True)
class RoundTrace:
    iterations: int
    success_prob: float
    success: bool


@dataclass(frozen=True)
class SearchOutcome:
    found: Optional[int]
    quantum_queries: int
    classical_setup_evals: int
    seed: int
    rounds: tuple[RoundTrace, ...] = field(default=())

    @property
    def succeeded(self) -> bool:
        return self.found is not None


@dataclass(frozen=True)
class RetriedSearch:
    """A BBHT search repeated with derived seeds until it finds something or runs out."""

    outcome: SearchOutcome
    attempts: int
    quantum_queries: int

    @property
    def found(self) -> Optional[int]:
        return self.outcome.found


@dataclass(frozen=True)
class AmplificationOutcome(Generic[W]):
    success: bool
    outer_rounds: int
    total_queries: int
    witness: Optional[W] = None
    success_prob: float = 0.0


def enumerate_marked(predicate: Callable[[int], object], N: int) -> MarkedSetSummary:
    """
    Evaluates predicate on every point of [0, N) and records the truthy ones.

    :param predicate: Membership test; its exceptions propagate.
    :param N: Domain size.
    """
    if N < 1:
        raise InstanceError(f"search domain must be non-empty, got N={N}")
    marked = tuple(x for x in range(N) if predicate(x))
    _logger.debug("setup pass over N=%d found M=%d marked", N, len(marked))
    return MarkedSetSummary(N=N, marked=marked, classical_setup_evals=N)


def grover_success_prob(N: int, M: int, t: int) -> float:
    """
    Probability of measuring a marked item after t Grover iterations.

    :raises: InstanceError: Unless N >= 1, 0 <= M <= N and t >= 0.
    """
    if N < 1 or M < 0 or M > N or t < 0:
        raise InstanceError(f"invalid Grover parameters N={N} M={M} t={t}")
    if M == 0:
        return 0.0
    if t == 0:
        return M / N
    theta = math.asin(math.sqrt(M / N))
    return math.sin((2 * t + 1) * theta) ** 2


def grover_known_m(summary: MarkedSetSummary, seed: int) -> SearchOutcome:
    """
    Single Grover run with the optimal iteration count for a known M.

    :raises: InstanceError: If nothing is marked.
    """
    if summary.M == 0:
        raise InstanceError("grover_known_m needs at least one marked item")
    rng = SplitMix64(seed)
    t = math.floor(math.pi / 4 * math.sqrt(summary.N / summary.M))
    p = grover_success_prob(summary.N, summary.M, t)
    success = rng.random() < p
    found = summary.marked[rng.randbelow(summary.M)] if success else None
    return SearchOutcome(
        found=found,
        quantum_queries=t + 1,
        classical_setup_evals=summary.classical_setup_evals,
        seed=seed,
        rounds=(RoundTrace(t, p, success),),
    )


def bbht_search(
    summary: MarkedSetSummary,
    seed: int,
    growth: float = DEFAULT_GROWTH,
    cutoff_factor: float = DEFAULT_CUTOFF_FACTOR,
) -> SearchOutcome:
    """
    Grover search for an unknown number of marked items.

    The iteration bound m starts at 1. Each round draws t uniformly from the integers in
    [0, m), runs t iterations and checks the measured candidate, costing t + 1 queries.
    After a failed round m grows by `growth`, capped at sqrt(N). The search gives up before
    a round that would push the total past cutoff_factor * sqrt(N).

    :param summary: The domain and its marked set. M may be 0.
    :param seed: Seed of the run's splitmix64 stream.
    """
    rng = SplitMix64(seed)
    n_root = math.sqrt(summary.N)
    cutoff = cutoff_factor * n_root
    bound = 1.0
    queries = 0
    found: Optional[int] = None
    rounds: list[RoundTrace] = []

    while True:
        t = rng.randbelow(math.ceil(bound))
        if queries + t + 1 > cutoff:
            break
        queries += t + 1
        p = grover_success_prob(summary.N, summary.M, t)
        success = rng.random() < p
        rounds.append(RoundTrace(t, p, success))
        if success:
            found = summary.marked[rng.randbelow(summary.M)]
            break
        bound = min(growth * bound, n_root)

    return SearchOutcome(
        found=found,
        quantum_queries=queries,
        classical_setup_evals=summary.classical_setup_evals,
        seed=seed,
        rounds=tuple(rounds),
    )


def bbht_with_retries(
    summary: MarkedSetSummary,
    seed: int,
    retries: int,
    growth: float = DEFAULT_GROWTH,
    cutoff_factor: float = DEFAULT_CUTOFF_FACTOR,
) -> RetriedSearch:
    """
    Runs bbht_search with `seed`, then with seed+1 .. seed+retries while nothing is found.
    Queries of every attempt are summed.
    """
    if retries < 0:
        raise InstanceError(f"retries must be non-negative, got {retries}")
    total = 0
    attempts = 0
    outcome: SearchOutcome | None = None
    for attempt in range(retries + 1):
        outcome = bbht_search(summary, seed + attempt, growth, cutoff_factor)
        attempts += 1
        total += outcome.quantum_queries
        if outcome.succeeded:
            break
        if attempt < retries:
            _logger.info(
                "Search attempt %d found nothing, retrying with seed %d",
                attempt + 1,
                seed + attempt + 1,
            )
    assert outcome is not None
    return RetriedSearch(outcome=outcome, attempts=attempts, quantum_queries=total)


def amplitude_amplify(
    p: float,
    inner_query_cost: int,
    witness_sampler: Callable[[SplitMix64], W],
    seed: int,
    p_min: Optional[float] = None,
) -> AmplificationOutcome[W]:
    """
    Amplifies an inner procedure whose exact success probability is p, simulated at the
    level of its output distribution.

    :param p: Exact success probability of one inner run.
    :param inner_query_cost: Queries one inner run spends.
    :param witness_sampler: Draws a witness conditioned on inner success.
    :param seed: Seed of the splitmix64 stream.
    :param p_min: Smallest success probability the caller wants to detect; sets the number
        of rounds spent before giving up when p is 0.

    :returns: Outcome with total_queries = outer_rounds * inner_query_cost.

    :raises: InstanceError: If p is outside [0, 1], or p is 0 and p_min is not a
        probability in (0, 1].
    """
    if not 0.0 <= p <= 1.0:
        raise InstanceError(f"success probability must lie in [0, 1], got {p}")
    if inner_query_cost < 0:
        raise InstanceError(f"inner query cost must be non-negative, got {inner_query_cost}")
    rng = SplitMix64(seed)

    if p == 0.0:
        if p_min is None or not 0.0 < p_min <= 1.0:
            raise InstanceError("amplifying a zero-probability procedure needs p_min in (0, 1]")
        rounds = math.ceil(DEFAULT_CUTOFF_FACTOR / math.sqrt(p_min))
        return AmplificationOutcome(
            success=False, outer_rounds=rounds, total_queries=rounds * inner_query_cost
        )

    rounds = math.ceil((math.pi / 4) / math.sqrt(p))
    amplified = math.sin((2 * rounds + 1) * math.asin(math.sqrt(p))) ** 2
    amplified = min(1.0, max(p, amplified))
    success = rng.random() < amplified
    witness = witness_sampler(rng) if success else None
    return AmplificationOutcome(
        success=success,
        outer_rounds=rounds,
        total_queries=rounds * inner_query_cost,
        witness=witness,
        success_prob=amplified,
    )

