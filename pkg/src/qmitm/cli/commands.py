"""
Implementations of the solve, bench and validate subcommands. Each takes the parsed
arguments and the effective configuration, writes its JSON document to `out` and a
human-readable table to `err`, and returns the process exit code.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional, TextIO

from ..brute_oracle import (
    BruteResult,
    brute_collision,
    brute_cnf,
    brute_exactly_one,
    brute_ilp,
    brute_pair_claw,
    brute_subset_sum,
)
from ..claw import (
    FunctionFamilyOracle,
    knapsack_claw,
    solve_samepoint_claw,
    solve_simultaneous_claw,
    solve_simultaneous_collision,
    solve_symmetric_claw,
    validate_family_promise,
    validate_promise,
)
from ..cnfsat import choose_alpha, solve_cnf, verify_claim
from ..config import SolverConfiguration, load_bench_plan
from ..errors import CertificateError, GuardError, InstanceError
from ..formats import dump_instance, load_instance
from ..genbench import (
    GeneratorSpec,
    gen_claw_family,
    gen_cnf,
    gen_knapsack,
    generate,
    run_scaling,
    write_csv,
    write_summary,
)
from ..instances import (
    Assignment,
    CnfFormula,
    IlpInstance,
    KnapsackInstance,
    eval_ilp,
    exactly_one_sat_to_group_ilp,
    knapsack_to_ilp,
)
from ..mitm_ilp import solve_ilp, solve_knapsack
from ..rng import derive_seed
from ..stats import SolveStats
from .report import RunReport, digest, write_table

__all__ = [
    "EXIT_SOLVED",
    "EXIT_NO_SOLUTION",
    "EXIT_INPUT_ERROR",
    "FILE_KINDS",
    "FAMILY_KINDS",
    "SOLVE_KINDS",
    "VALIDATE_KINDS",
    "parse_generator_spec",
    "cmd_solve",
    "cmd_bench",
    "cmd_validate",
]

_logger = logging.getLogger(__name__)

EXIT_SOLVED = 0
EXIT_NO_SOLUTION = 1
EXIT_INPUT_ERROR = 2

FILE_KINDS = ("knapsack", "ilp", "cnf", "exact1")
FAMILY_KINDS = ("claw", "samepoint", "collision")
SOLVE_KINDS = FILE_KINDS + ("symclaw",) + FAMILY_KINDS
VALIDATE_KINDS = ("claw", "family", "cnf-claim")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}
_VALIDATE_DEFAULTS: dict[str, dict[str, Any]] = {
    "claw": {"n": 6},
    "family": {"N": 64},
    "cnf-claim": {"n": 12},
}


def parse_generator_spec(problem: str, text: Optional[str], seed: int) -> GeneratorSpec:
    """
    Parses "key=value,key=value" into a GeneratorSpec for `problem`. The generator seed
    defaults to the command's --seed.

    :raises: InstanceError: On an unknown key or a value of the wrong type.
    """
    spec = GeneratorSpec(problem=problem, seed=seed)
    if not text:
        return spec
    types = {f.name: f.type for f in dataclasses.fields(GeneratorSpec)}
    changes: dict[str, Any] = {}
    for item in text.split(","):
        key, sep, raw = item.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or key not in types or key == "problem":
            raise InstanceError(f"bad generator setting {item!r}")
        kind = str(types[key])
        try:
            if "bool" in kind:
                if raw.lower() not in _TRUE | _FALSE:
                    raise ValueError(raw)
                changes[key] = raw.lower() in _TRUE
            elif "float" in kind:
                changes[key] = float(raw)
            elif "int" in kind:
                changes[key] = int(raw, 0)
            else:
                changes[key] = raw
        except ValueError as e:
            raise InstanceError(f"generator setting {key} has a bad value {raw!r}") from e
    return dataclasses.replace(spec, **changes)


def _with_defaults(spec: GeneratorSpec, defaults: dict[str, Any]) -> GeneratorSpec:
    fill = {k: v for k, v in defaults.items() if getattr(spec, k) is None}
    return dataclasses.replace(spec, **fill) if fill else spec


@dataclasses.dataclass
class _Outcome:
    """What one solver run produced, before it becomes a RunReport."""

    stats: SolveStats
    witness: Optional[list] = None
    digest: Optional[str] = None
    size: int = 0
    brute: Optional[Callable[[], BruteResult]] = None
    details: dict[str, Any] = dataclasses.field(default_factory=dict)


def _load_or_generate(args: argparse.Namespace) -> tuple[Any, str]:
    if args.input is not None:
        instance = load_instance(args.kind, args.input)
        return instance, digest(Path(args.input).read_bytes())
    if args.gen is None:
        raise InstanceError(f"solve {args.kind} needs an input file or --gen settings")
    generated = generate(parse_generator_spec(args.kind, args.gen, args.seed))
    return generated.instance, digest(dump_instance(generated.instance))


def _assignment_outcome(
    assignment: Optional[Assignment],
    stats: SolveStats,
    check: Callable[[Assignment], bool],
    instance_digest: str,
    size: int,
    brute: Callable[[], BruteResult],
) -> _Outcome:
    if assignment is not None and not check(assignment):
        raise CertificateError(f"solver returned {assignment}, which does not verify")
    witness = None if assignment is None else list(assignment.bits)
    return _Outcome(stats, witness, instance_digest, size, brute)


def _solve_file_kind(args: argparse.Namespace, config: SolverConfiguration) -> _Outcome:
    instance, instance_digest = _load_or_generate(args)
    cap = config.witness_cap
    if args.kind == "knapsack":
        k: KnapsackInstance = instance
        ilp = knapsack_to_ilp(k)
        result = solve_knapsack(k, args.seed, args.retries, config)
        return _assignment_outcome(
            result.assignment,
            result.stats,
            lambda x: eval_ilp(ilp, x),
            instance_digest,
            k.n,
            lambda: brute_subset_sum(k.coefficients, k.target, cap),
        )
    if args.kind == "ilp":
        inst: IlpInstance = instance
        result = solve_ilp(inst, args.seed, args.retries, config)
        return _assignment_outcome(
            result.assignment,
            result.stats,
            lambda x: eval_ilp(inst, x),
            instance_digest,
            inst.n,
            lambda: brute_ilp(inst, cap),
        )
    f: CnfFormula = instance
    if args.kind == "cnf":
        cnf_result = solve_cnf(
            f,
            seed=args.seed,
            retries=args.retries,
            alpha_override=args.alpha_override,
            config=config,
        )
        return _assignment_outcome(
            cnf_result.assignment,
            cnf_result.stats,
            f.is_satisfied_by,
            instance_digest,
            f.n,
            lambda: brute_cnf(f, cap),
        )
    group = exactly_one_sat_to_group_ilp(f)
    result = solve_ilp(group, args.seed, args.retries, config)
    return _assignment_outcome(
        result.assignment,
        result.stats,
        lambda x: eval_ilp(group, x),
        instance_digest,
        f.n,
        lambda: brute_exactly_one(f, cap),
    )


def _solve_symclaw(args: argparse.Namespace, config: SolverConfiguration) -> _Outcome:
    spec = _with_defaults(parse_generator_spec("symclaw", args.gen, args.seed), {"n": 12})
    k = gen_knapsack(spec.n or 0, spec.plant, spec.seed).instance
    oracle = knapsack_claw(k.coefficients, k.target)
    result = solve_symmetric_claw(oracle, args.seed, args.retries, config)
    witness = None
    if result.x is not None:
        bits = Assignment.from_index(result.x, k.n)
        if sum(c for c, b in zip(k.coefficients, bits.bits) if b) != k.target:
            raise CertificateError(f"claw {result.x:#x} does not hit the knapsack target")
        witness = list(bits.bits)
    return _Outcome(
        result.stats,
        witness,
        digest(dump_instance(k)),
        k.n,
        lambda: brute_subset_sum(k.coefficients, k.target, config.witness_cap),
    )


def _family_digest(fam: FunctionFamilyOracle) -> str:
    tables = {"f": fam.tables("f"), "g": fam.tables("g") if fam.has_partners else None}
    return digest(json.dumps(tables, separators=(",", ":")))


def _solve_family(args: argparse.Namespace, config: SolverConfiguration) -> _Outcome:
    spec = _with_defaults(parse_generator_spec(args.kind, args.gen, args.seed), {"N": 256})
    fam = gen_claw_family(spec.N or 0, spec.d, args.kind, spec.plant, spec.seed)
    instance_digest = _family_digest(fam)
    f_values = list(zip(*fam.tables("f")))

    if args.kind == "collision":
        pair_result = solve_simultaneous_collision(
            fam, args.subset_size, args.seed, args.retries, config
        )
        pair = pair_result.pair
        if pair is not None and f_values[pair[0]] != f_values[pair[1]]:
            raise CertificateError(f"pair {pair} is not a collision")
        return _Outcome(
            pair_result.stats,
            None if pair is None else list(pair),
            instance_digest,
            fam.N,
            lambda: brute_collision(fam.tables("f"), config.witness_cap),
        )

    g_values = list(zip(*fam.tables("g")))
    if args.kind == "samepoint":
        point_result = solve_samepoint_claw(fam, args.seed, args.retries, config)
        x = point_result.x
        if x is not None and f_values[x] != g_values[x]:
            raise CertificateError(f"point {x} is not a same-point claw")
        hits = tuple(p for p in range(fam.N) if f_values[p] == g_values[p])
        return _Outcome(
            point_result.stats,
            None if x is None else [x],
            instance_digest,
            fam.N,
            lambda: BruteResult(bool(hits), len(hits), fam.N, hits),
        )

    claw_result = solve_simultaneous_claw(fam, args.subset_size, args.seed, args.retries, config)
    pair = claw_result.pair
    if pair is not None and f_values[pair[0]] != g_values[pair[1]]:
        raise CertificateError(f"pair {pair} is not a claw")
    return _Outcome(
        claw_result.stats,
        None if pair is None else list(pair),
        instance_digest,
        fam.N,
        lambda: brute_pair_claw(f_values, g_values, config.witness_cap),
    )


def _cross_check(outcome: _Outcome, kind: str, config: SolverConfiguration) -> Optional[bool]:
    """
    Compares the solver's decision with the brute-force oracle. Skipped, with a warning,
    above verify_max_n variables. Family kinds are bounded by the brute oracle's own guard
    instead.
    """
    if kind not in FAMILY_KINDS and outcome.size > config.verify_max_n:
        _logger.warning(
            "Skipping brute-force verification: n=%d exceeds %d", outcome.size, config.verify_max_n
        )
        return None
    assert outcome.brute is not None
    try:
        brute = outcome.brute()
    except GuardError as e:
        _logger.warning("Skipping brute-force verification: %s", e)
        return None
    found = outcome.witness is not None
    if found and not brute.feasible:
        raise CertificateError("solver found a witness the brute-force oracle says cannot exist")
    if not found and brute.feasible:
        _logger.warning(
            "Brute force finds %d solution(s) the solver missed within its retries", brute.count
        )
    outcome.details["brute_force_count"] = brute.count
    return found == brute.feasible


def cmd_solve(
    args: argparse.Namespace,
    config: SolverConfiguration,
    out: Optional[TextIO] = None,
    err: Optional[TextIO] = None,
) -> int:
    """
    Runs one solver and prints its RunReport.

    :returns: EXIT_SOLVED when a verified witness was found, EXIT_NO_SOLUTION otherwise.
    """
    out = out or sys.stdout
    err = err or sys.stderr
    if args.kind in FILE_KINDS:
        outcome = _solve_file_kind(args, config)
    elif args.kind == "symclaw":
        outcome = _solve_symclaw(args, config)
    elif args.kind in FAMILY_KINDS:
        outcome = _solve_family(args, config)
    else:
        raise InstanceError(f"unknown solve kind {args.kind!r}")

    verified = _cross_check(outcome, args.kind, config) if args.verify else None
    if outcome.witness is not None:
        result = "feasible"
    elif outcome.details.get("brute_force_count") == 0:
        result = "infeasible"
    else:
        result = "unknown"

    report = RunReport.from_stats(
        args.command,
        args.kind,
        result,
        outcome.stats,
        args.seed,
        instance_digest=outcome.digest,
        witness=outcome.witness,
        verified_against_brute_force=verified,
    )
    report.details.update(outcome.details)
    out.write(report.to_json() + "\n")

    write_table(
        [
            ("kind", args.kind),
            ("result", result),
            ("witness", outcome.witness),
            ("quantum queries", report.quantum_queries),
            ("classical setup evals", report.classical_setup_evals),
            ("tree visits", report.tree_visits),
            ("retries used", report.retries_used),
        ],
        err,
    )
    if outcome.witness is None:
        attempts = outcome.stats.attempts
        print(
            f"No solution found in {attempts} search attempt(s). Simulated Grover search is "
            "probabilistic, so this is evidence of infeasibility, not a proof.",
            file=err,
        )
        return EXIT_NO_SOLUTION
    return EXIT_SOLVED


def cmd_bench(
    args: argparse.Namespace,
    config: SolverConfiguration,
    out: Optional[TextIO] = None,
    err: Optional[TextIO] = None,
) -> int:
    """
    Runs the scaling harness. With --out the per-trial CSV goes to that path and the JSON
    summary beside it; the summary is always printed to `out`.
    """
    out = out or sys.stdout
    err = err or sys.stderr
    sizes = args.sizes
    trials = args.trials
    if sizes is None or trials is None:
        plan = load_bench_plan(args.problem, args.plan)
        sizes = plan.sizes if sizes is None else sizes
        trials = plan.trials if trials is None else trials

    report = run_scaling(args.problem, sizes, trials, args.seed, config, timing=args.timing)
    if args.out is not None:
        csv_path = Path(args.out)
        write_csv(report, csv_path)
        write_summary(report, csv_path.with_suffix(".summary.json"))
        _logger.info("Wrote %d rows to %s", len(report.records), csv_path)
    write_summary(report, out)

    write_table(
        [
            (f"size {s.size}", f"median {s.median_queries:g}  success {s.success_rate:.2f}")
            for s in report.summaries
        ]
        + [("beta", report.beta), ("beta baseline", report.beta_baseline)],
        err,
    )
    return EXIT_SOLVED


def _violation_dicts(violations: list) -> list[dict[str, Any]]:
    return [dataclasses.asdict(v) for v in violations]


def cmd_validate(
    args: argparse.Namespace,
    config: SolverConfiguration,
    out: Optional[TextIO] = None,
    err: Optional[TextIO] = None,
) -> int:
    """
    Exhaustive promise checks (claw, family) and the block Claim over planted formulas
    (cnf-claim).

    :returns: EXIT_SOLVED on zero violations, EXIT_NO_SOLUTION when counterexamples exist.

    :raises: GuardError: If the instance is beyond the exhaustive-check limits.
    """
    out = out or sys.stdout
    err = err or sys.stderr
    spec = _with_defaults(
        parse_generator_spec(args.kind, args.gen, args.seed), _VALIDATE_DEFAULTS[args.kind]
    )
    document: dict[str, Any] = {"kind": args.kind, "seed": args.seed}

    if args.kind == "claw":
        n = spec.n or 0
        if n > config.exhaustive_promise_max_n:
            raise GuardError(
                f"exhaustive claw validation is limited to n <= "
                f"{config.exhaustive_promise_max_n}, got n={n}"
            )
        k = gen_knapsack(n, spec.plant, spec.seed).instance
        promise = validate_promise(knapsack_claw(k.coefficients, k.target), n)
        document.update(n=n, checked=promise.checked, violation_count=promise.violation_count)
        document["violations"] = _violation_dicts(promise.violations)
    elif args.kind == "family":
        fam = gen_claw_family(spec.N or 0, spec.d, spec.kind, spec.plant, spec.seed)
        promise = validate_family_promise(fam, config.exhaustive_family_max_n)
        document.update(
            N=fam.N,
            promise=fam.promise.value,
            checked=promise.checked,
            violation_count=promise.violation_count,
        )
        document["violations"] = _violation_dicts(promise.violations)
    else:
        n = spec.n or 0
        params = choose_alpha(spec.c, args.alpha_override)
        trials = args.trials if args.trials is not None else 500
        failures = []
        blocks: dict[int, int] = {}
        for t in range(trials):
            generated = gen_cnf(n, spec.c, plant=True, seed=derive_seed(spec.seed, t))
            assert generated.witness is not None
            try:
                block = verify_claim(generated.instance, generated.witness, params)
            except CertificateError as e:
                failures.append({"trial": t, "detail": str(e)})
                continue
            blocks[block] = blocks.get(block, 0) + 1
        document.update(
            n=n,
            c=spec.c,
            alpha=params.alpha,
            k=params.k,
            checked=trials,
            violation_count=len(failures),
            violations=failures[:100],
            qualifying_block_histogram={str(b): blocks[b] for b in sorted(blocks)},
        )

    document["ok"] = document["violation_count"] == 0
    out.write(json.dumps(document, indent=2, sort_keys=True) + "\n")
    write_table(
        [
            ("kind", args.kind),
            ("checked", document["checked"]),
            ("violations", document["violation_count"]),
        ],
        err,
    )
    return EXIT_SOLVED if document["ok"] else EXIT_NO_SOLUTION
