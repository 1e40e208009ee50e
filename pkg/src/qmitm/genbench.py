"""
Seeded generators for planted instances, and the scaling harness that measures how query
counts grow with instance size.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Generic, Optional, Sequence, TextIO, TypeVar, Union

import numpy as np

from .brute_oracle import brute_cnf
from .claw import (
    FunctionFamilyOracle,
    Promise,
    knapsack_claw,
    solve_pair_claw,
    solve_simultaneous_collision,
    solve_symmetric_claw,
)
from .cnfsat import solve_cnf
from .config import SolverConfiguration, default_configuration
from .errors import InstanceError
from .instances import (
    COEFFICIENT_LIMIT,
    Assignment,
    CnfFormula,
    IlpInstance,
    KnapsackInstance,
    knapsack_to_ilp,
)
from .mitm_ilp import feasible_indices, naive_grover_baseline, solve_ilp
from .qsearch import MarkedSetSummary, bbht_search
from .rng import SplitMix64, derive_seed

__all__ = [
    "PROBLEMS",
    "GeneratorSpec",
    "Generated",
    "TrialRecord",
    "SizeSummary",
    "ScalingReport",
    "knapsack_with_subset",
    "gen_knapsack",
    "gen_ilp",
    "gen_cnf",
    "gen_claw_family",
    "generate",
    "count_feasible",
    "run_scaling",
    "write_csv",
    "write_summary",
]

_logger = logging.getLogger(__name__)

PROBLEMS = ("ilp", "symclaw", "cnf", "claw", "collision")
CSV_COLUMNS = (
    "problem",
    "size",
    "seed",
    "queries",
    "baseline_queries",
    "setup_evals",
    "success",
    "ms",
)

_MAX_KNAPSACK_N = 30
_UNIQUE_ATTEMPTS = 64

# stream tags, so generators of different kinds never share a seed
_KNAPSACK, _ILP, _CNF, _FAMILY, _TRIAL = range(1, 6)

T = TypeVar("T")


@dataclass(frozen=True)
class GeneratorSpec:
    """Everything a generator needs; identical specs give bit-identical instances."""

    problem: str
    n: Optional[int] = None
    d: int = 1
    c: float = 1.0
    N: Optional[int] = None
    kind: str = "claw"
    plant: bool = True
    unique: bool = False
    seed: int = 0


@dataclass(frozen=True)
class Generated(Generic[T]):
    instance: T
    witness: Optional[Assignment] = None


def knapsack_with_subset(coefficients: Sequence[int], subset: Sequence[int]) -> KnapsackInstance:
    """Knapsack whose target is the sum of the 1-based positions in subset."""
    target = sum(coefficients[i - 1] for i in subset)
    return KnapsackInstance(coefficients=tuple(coefficients), target=target)


def gen_knapsack(
    n: int, plant: bool = True, seed: int = 0, coefficient_bits: int = 16
) -> Generated[KnapsackInstance]:
    """
    Coefficients uniform in [1, 2^coefficient_bits]. Planted: the target is the sum of a random
    non-empty subset. Unplanted: the target is one more than the sum of all coefficients.
    """
    if not 1 <= n <= _MAX_KNAPSACK_N:
        raise InstanceError(f"knapsack generator supports 1..{_MAX_KNAPSACK_N} items, got {n}")
    rng = SplitMix64(derive_seed(seed, _KNAPSACK, n))
    coefficients = [1 + rng.randbelow(1 << coefficient_bits) for _ in range(n)]
    if not plant:
        return Generated(KnapsackInstance(tuple(coefficients), sum(coefficients) + 1))
    bits = [rng.randbelow(2) for _ in range(n)]
    if not any(bits):
        bits[rng.randbelow(n)] = 1
    subset = [i + 1 for i, bit in enumerate(bits) if bit]
    return Generated(knapsack_with_subset(coefficients, subset), Assignment(tuple(bits)))


def count_feasible(inst: IlpInstance, max_bits: int = 24) -> int:
    """Exact number of feasible assignments, by vectorised enumeration."""
    return int(feasible_indices(inst, max_bits).size)


def _signed(rng: SplitMix64, bound: int) -> int:
    return rng.randbelow(2 * bound + 1) - bound


def gen_ilp(
    n: int,
    d: int,
    plant: bool = True,
    seed: int = 0,
    unique: bool = False,
) -> Generated[IlpInstance]:
    """
    Random inequality system. Planted systems set every bound at or above the row value of a
    random x*, so x* is feasible.

    With unique=True the first two rows are r.x <= r.x* and -r.x <= -r.x*, an equality in
    disguise with large coefficients, and every other row is tight at x*. The system is
    resampled until x* is its only solution.

    :raises: InstanceError: For d < 1, unique without plant, or unique with d < 2.
    """
    if n < 1 or d < 1:
        raise InstanceError(f"ILP generator needs n >= 1 and d >= 1, got n={n} d={d}")
    if unique and (not plant or d < 2):
        raise InstanceError("unique-solution systems must be planted and have d >= 2")
    rng = SplitMix64(derive_seed(seed, _ILP, n, d, int(unique)))
    if unique:
        bound = min(COEFFICIENT_LIMIT // n, 1 << min(32, n + 10))
    else:
        bound = 1 << 8

    for attempt in range(_UNIQUE_ATTEMPTS if unique else 1):
        x_star = tuple(rng.randbelow(2) for _ in range(n))
        rows = [tuple(_signed(rng, bound) for _ in range(n)) for _ in range(d)]
        values = [sum(c for c, bit in zip(row, x_star) if bit) for row in rows]
        if unique:
            rows[1] = tuple(-v for v in rows[0])
            values[1] = -values[0]
            b = values
        elif plant:
            b = [v + rng.randbelow(bound) for v in values]
        else:
            b = [_signed(rng, bound * n // 4) for _ in range(d)]
        inst = IlpInstance(a=tuple(rows), b=tuple(b), n=n)
        if not unique or count_feasible(inst) == 1:
            return Generated(inst, Assignment(x_star) if plant else None)
        _logger.debug("unique-solution attempt %d had extra solutions, resampling", attempt + 1)
    raise InstanceError(f"no unique-solution system found in {_UNIQUE_ATTEMPTS} attempts")


def gen_cnf(
    n: int, c: float = 1.0, plant: bool = True, seed: int = 0, max_width: int = 3
) -> Generated[CnfFormula]:
    """
    floor(c*n) clauses of width 1..max_width over distinct variables with random signs.
    Planted: a clause that x* leaves false gets one literal flipped.
    """
    if n < 1 or c <= 0 or max_width < 1:
        raise InstanceError(f"CNF generator needs n >= 1, c > 0, width >= 1; got {n}, {c}")
    rng = SplitMix64(derive_seed(seed, _CNF, n, int(c * 1000), max_width))
    m = math.floor(c * n)
    x_star = tuple(rng.randbelow(2) for _ in range(n))
    clauses = []
    for _ in range(m):
        width = 1 + rng.randbelow(min(max_width, n))
        variables = sorted(v + 1 for v in rng.sample_without_replacement(n, width))
        clause = [v if rng.randbelow(2) else -v for v in variables]
        if plant and not any((lit > 0) == bool(x_star[abs(lit) - 1]) for lit in clause):
            j = rng.randbelow(width)
            clause[j] = -clause[j]
        clauses.append(tuple(clause))
    formula = CnfFormula(n=n, clauses=tuple(clauses))
    return Generated(formula, Assignment(x_star) if plant else None)


def gen_claw_family(
    N: int, d: int = 1, kind: str = "claw", plant: bool = True, seed: int = 0
) -> FunctionFamilyOracle:
    """
    kind="claw": injective f_i into [0, N), injective g_i into [N, 2N); planted puts one claw
        (x*, y*) in place by copying f_i(x*) into g_i(y*).
    kind="samepoint": as "claw" with x* = y*.
    kind="collision": planted gives 2-to-1 functions over one random perfect matching shared
        by all f_i; unplanted gives permutations.
    """
    if N < 2 or d < 1:
        raise InstanceError(f"family generator needs N >= 2 and d >= 1, got N={N} d={d}")
    rng = SplitMix64(derive_seed(seed, _FAMILY, N, d, int(plant)))

    def permutation() -> list[int]:
        values = list(range(N))
        rng.shuffle(values)
        return values

    if kind in ("claw", "samepoint"):
        f = [permutation() for _ in range(d)]
        g = [[N + v for v in permutation()] for _ in range(d)]
        if plant:
            x_star = rng.randbelow(N)
            y_star = x_star if kind == "samepoint" else rng.randbelow(N)
            for i in range(d):
                g[i][y_star] = f[i][x_star]
        return FunctionFamilyOracle(f, g, Promise.ONE_TO_ONE)

    if kind == "collision":
        if not plant:
            return FunctionFamilyOracle([permutation() for _ in range(d)], None, Promise.ONE_TO_ONE)
        if N % 2:
            raise InstanceError(f"a 2-to-1 family needs even N, got {N}")
        order = permutation()
        pair_of = [0] * N
        for j in range(N // 2):
            pair_of[order[2 * j]] = j
            pair_of[order[2 * j + 1]] = j
        tables = []
        for _ in range(d):
            labels = list(range(N // 2))
            rng.shuffle(labels)
            tables.append([labels[pair_of[x]] for x in range(N)])
        return FunctionFamilyOracle(tables, None, Promise.TWO_TO_ONE)

    raise InstanceError(f"unknown family kind {kind!r}")


def generate(spec: GeneratorSpec) -> Union[Generated, FunctionFamilyOracle]:
    if spec.problem in ("knapsack", "symclaw"):
        return gen_knapsack(_need(spec.n, "n"), spec.plant, spec.seed)
    if spec.problem == "ilp":
        return gen_ilp(_need(spec.n, "n"), spec.d, spec.plant, spec.seed, spec.unique)
    if spec.problem in ("cnf", "exact1"):
        return gen_cnf(_need(spec.n, "n"), spec.c, spec.plant, spec.seed)
    if spec.problem in ("claw", "collision", "samepoint"):
        kind = spec.problem if spec.problem != "claw" else spec.kind
        return gen_claw_family(_need(spec.N, "N"), spec.d, kind, spec.plant, spec.seed)
    raise InstanceError(f"no generator for problem {spec.problem!r}")


def _need(value: Optional[int], name: str) -> int:
    if value is None:
        raise InstanceError(f"generator spec is missing {name}")
    return value


@dataclass(frozen=True)
class TrialRecord:
    problem: str
    size: int
    seed: int
    queries: int
    baseline_queries: Optional[int]
    setup_evals: int
    success: bool
    ms: Optional[float] = None


@dataclass(frozen=True)
class SizeSummary:
    size: int
    median_queries: float
    mean_queries: float
    median_baseline_queries: Optional[float]
    mean_setup_evals: float
    success_rate: float
    mean_ms: Optional[float] = None


@dataclass
class ScalingReport:
    """
    beta is the least-squares slope of log2(median queries) against size; residual is the
    sum of squared residuals of that fit. Both are None when fewer than two sizes ran.
    """

    problem: str
    records: list[TrialRecord] = field(default_factory=list)
    summaries: list[SizeSummary] = field(default_factory=list)
    beta: Optional[float] = None
    residual: Optional[float] = None
    beta_baseline: Optional[float] = None
    residual_baseline: Optional[float] = None
    insufficient_points: bool = False

    def summary_dict(self) -> dict:
        return {
            "problem": self.problem,
            "beta": self.beta,
            "residual": self.residual,
            "beta_baseline": self.beta_baseline,
            "residual_baseline": self.residual_baseline,
            "insufficient_points": self.insufficient_points,
            "sizes": [asdict(s) for s in self.summaries],
        }


def _fit_exponent(sizes: Sequence[int], medians: Sequence[float]) -> tuple[float, float]:
    x = np.asarray(sizes, dtype=float)
    y = np.log2(np.maximum(np.asarray(medians, dtype=float), 1.0))
    A = np.vstack([x, np.ones_like(x)]).T
    params, *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.sum((A @ params - y) ** 2))
    return float(params[0]), residual


def _baseline_over(marked: Sequence[int], N: int, seed: int, config: SolverConfiguration) -> int:
    summary = MarkedSetSummary(N=N, marked=tuple(marked), classical_setup_evals=N)
    return bbht_search(summary, seed, config.bbht_growth, config.bbht_cutoff_factor).quantum_queries


def _ilp_trial(size: int, seed: int, config: SolverConfiguration) -> tuple:
    inst = gen_ilp(size, 2, plant=True, seed=seed, unique=True).instance
    result = solve_ilp(inst, seed=seed, config=config)
    baseline = naive_grover_baseline(inst, seed=seed, config=config).quantum_queries
    return (
        result.stats.quantum_queries,
        baseline,
        result.stats.classical_setup_evals,
        result.feasible,
    )


def _symclaw_trial(size: int, seed: int, config: SolverConfiguration) -> tuple:
    k = gen_knapsack(size, plant=True, seed=seed).instance
    result = solve_symmetric_claw(knapsack_claw(k.coefficients, k.target), seed=seed, config=config)
    baseline = naive_grover_baseline(knapsack_to_ilp(k), seed=seed, config=config).quantum_queries
    return result.stats.quantum_queries, baseline, result.stats.classical_setup_evals, result.found


def _cnf_trial(size: int, seed: int, config: SolverConfiguration) -> tuple:
    f = gen_cnf(size, 1.0, plant=True, seed=seed).instance
    result = solve_cnf(f, c=1.0, seed=seed, config=config)
    marked = [Assignment(w).to_index() for w in brute_cnf(f, cap=1 << size).witnesses]
    baseline = _baseline_over(marked, 1 << size, seed, config)
    return (
        result.stats.quantum_queries,
        baseline,
        result.stats.classical_setup_evals,
        result.satisfiable,
    )


def _claw_trial(size: int, seed: int, config: SolverConfiguration) -> tuple:
    N = 1 << size
    fam = gen_claw_family(N, 1, "claw", plant=True, seed=seed)
    f, g = fam.tables("f")[0], fam.tables("g")[0]
    positions = {value: x for x, value in enumerate(f)}
    marked = sorted(positions[v] * N + y for y, v in enumerate(g) if v in positions)
    result = solve_pair_claw(fam, seed=seed, config=config)
    baseline = _baseline_over(marked, N * N, seed, config)
    return result.stats.quantum_queries, baseline, result.stats.classical_setup_evals, result.found


def _collision_trial(size: int, seed: int, config: SolverConfiguration) -> tuple:
    fam = gen_claw_family(1 << size, 1, "collision", plant=True, seed=seed)
    result = solve_simultaneous_collision(fam, seed=seed, config=config)
    return result.stats.quantum_queries, None, result.stats.classical_setup_evals, result.found


_TRIALS: dict[str, Callable[[int, int, SolverConfiguration], tuple]] = {
    "ilp": _ilp_trial,
    "symclaw": _symclaw_trial,
    "cnf": _cnf_trial,
    "claw": _claw_trial,
    "collision": _collision_trial,
}


def run_scaling(
    problem: str,
    sizes: Sequence[int],
    trials: int,
    seed: int = 0,
    config: Optional[SolverConfiguration] = None,
    timing: bool = False,
) -> ScalingReport:
    """
    Runs `trials` planted instances per size through the problem's solver and its
    naive-Grover baseline, then fits query exponents on the per-size medians.

    Sizes are variable counts for ilp, symclaw and cnf, and log2 N for claw and collision.
    Trial t at size s uses a seed derived from (seed, s, t).
    """
    if problem not in _TRIALS:
        raise InstanceError(f"unknown benchmark problem {problem!r}; choose from {PROBLEMS}")
    if trials < 1 or not sizes:
        raise InstanceError("a benchmark needs at least one size and one trial")
    config = config or default_configuration()
    trial_fn = _TRIALS[problem]
    report = ScalingReport(problem=problem)

    for size in sizes:
        size_records = []
        for trial in range(trials):
            trial_seed = derive_seed(seed, _TRIAL, size, trial)
            started = time.perf_counter()
            queries, baseline, setup, success = trial_fn(size, trial_seed, config)
            ms = (time.perf_counter() - started) * 1000.0 if timing else None
            size_records.append(
                TrialRecord(problem, size, trial_seed, queries, baseline, setup, bool(success), ms)
            )
        report.records.extend(size_records)
        baselines = [r.baseline_queries for r in size_records if r.baseline_queries is not None]
        times = [r.ms for r in size_records if r.ms is not None]
        summary = SizeSummary(
            size=size,
            median_queries=float(np.median([r.queries for r in size_records])),
            mean_queries=float(np.mean([r.queries for r in size_records])),
            median_baseline_queries=float(np.median(baselines)) if baselines else None,
            mean_setup_evals=float(np.mean([r.setup_evals for r in size_records])),
            success_rate=sum(r.success for r in size_records) / len(size_records),
            mean_ms=float(np.mean(times)) if times else None,
        )
        report.summaries.append(summary)
        _logger.info(
            "%s size=%d median queries=%.1f success=%.2f",
            problem,
            size,
            summary.median_queries,
            summary.success_rate,
        )

    if len({s.size for s in report.summaries}) < 2:
        report.insufficient_points = True
        _logger.warning("Exponent fit needs at least two distinct sizes")
        return report
    xs = [s.size for s in report.summaries]
    report.beta, report.residual = _fit_exponent(xs, [s.median_queries for s in report.summaries])
    medians_baseline = [s.median_baseline_queries for s in report.summaries]
    if all(m is not None for m in medians_baseline):
        report.beta_baseline, report.residual_baseline = _fit_exponent(
            xs, [float(m) for m in medians_baseline if m is not None]
        )
    return report


def _format_cell(value: object) -> object:
    if value is None:
        return ""
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        return f"{value:.3f}"
    return value


def write_csv(report: ScalingReport, out: Union[str, Path, TextIO]) -> None:
    """One row per trial. The ms column stays blank unless the run was timed."""

    def emit(stream: TextIO) -> None:
        writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for record in report.records:
            writer.writerow({k: _format_cell(v) for k, v in asdict(record).items()})

    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf8", newline="") as fh:
            emit(fh)
    else:
        emit(out)


def write_summary(report: ScalingReport, out: Union[str, Path, TextIO]) -> None:
    text = json.dumps(report.summary_dict(), indent=2, sort_keys=True) + "\n"
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf8") as fh:
            fh.write(text)
    else:
        out.write(text)
