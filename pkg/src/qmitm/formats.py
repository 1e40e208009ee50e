"""
Text formats for instances.

Knapsack: first line "n K", second line the n coefficients.
ILP: first line "d n", then d lines of n coefficients, a relation token ("<=" or "=") and b_i.
CNF: DIMACS ("p cnf n m" header, zero-terminated clauses, "c" comment lines).
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterator, Union

from .errors import FormatError, InstanceError
from .instances import CnfFormula, IlpInstance, KnapsackInstance

__all__ = [
    "parse_knapsack",
    "parse_ilp",
    "parse_dimacs",
    "dump_knapsack",
    "dump_ilp",
    "dump_dimacs",
    "load_instance",
    "dump_instance",
]

_logger = logging.getLogger(__name__)

Instance = Union[KnapsackInstance, IlpInstance, CnfFormula]


def _content_lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for number, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if tokens:
            yield number, tokens


def _ints(tokens: list[str], line_number: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as e:
        raise FormatError(f"expected integers, got {' '.join(tokens)!r}", line_number) from e


def parse_knapsack(text: str) -> KnapsackInstance:
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("empty knapsack input", 1)
    header_line, header = lines[0]
    values = _ints(header, header_line)
    if len(values) != 2:
        raise FormatError("knapsack header must be 'n K'", header_line)
    n, target = values
    if len(lines) < 2:
        raise FormatError("missing coefficient line", header_line + 1)
    coef_line, tokens = lines[1]
    coefficients = _ints(tokens, coef_line)
    if len(coefficients) != n:
        raise FormatError(f"header declares {n} coefficients, found {len(coefficients)}", coef_line)
    if len(lines) > 2:
        raise FormatError("unexpected trailing content", lines[2][0])
    try:
        return KnapsackInstance(coefficients=tuple(coefficients), target=target)
    except InstanceError as e:
        raise FormatError(str(e), coef_line) from e


def parse_ilp(text: str) -> IlpInstance:
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("empty ILP input", 1)
    header_line, header = lines[0]
    values = _ints(header, header_line)
    if len(values) != 2:
        raise FormatError("ILP header must be 'd n'", header_line)
    d, n = values
    if d < 0 or n < 1:
        raise FormatError(f"invalid ILP dimensions d={d} n={n}", header_line)
    if len(lines) - 1 != d:
        last = lines[-1][0]
        raise FormatError(f"header declares {d} rows, found {len(lines) - 1}", last)

    rows = []
    bounds = []
    equality_rows = set()
    for i, (line_number, tokens) in enumerate(lines[1:]):
        if len(tokens) != n + 2:
            raise FormatError(
                f"row must hold {n} coefficients, a relation and a bound", line_number
            )
        relation = tokens[n]
        if relation not in ("<=", "="):
            raise FormatError(f"unknown relation {relation!r}", line_number)
        rows.append(tuple(_ints(tokens[:n], line_number)))
        bounds.append(_ints([tokens[n + 1]], line_number)[0])
        if relation == "=":
            equality_rows.add(i)
    try:
        return IlpInstance(
            a=tuple(rows), b=tuple(bounds), n=n, equality_rows=frozenset(equality_rows)
        )
    except InstanceError as e:
        raise FormatError(str(e), header_line) from e


def parse_dimacs(text: str) -> CnfFormula:
    n: int | None = None
    m = 0
    header_line = 1
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for line_number, tokens in _content_lines(text):
        if tokens[0] == "c":
            continue
        if tokens[0] == "%":
            # SATLIB files end with a "%" line followed by a stray "0".
            break
        if tokens[0] == "p":
            if n is not None:
                raise FormatError("duplicate problem line", line_number)
            if len(tokens) != 4 or tokens[1] != "cnf":
                raise FormatError("problem line must be 'p cnf <vars> <clauses>'", line_number)
            n, m = _ints(tokens[2:], line_number)
            header_line = line_number
            continue
        if n is None:
            raise FormatError("clause before the 'p cnf' problem line", line_number)
        for lit in _ints(tokens, line_number):
            if lit == 0:
                if not current:
                    raise FormatError("empty clause", line_number)
                clauses.append(tuple(current))
                current = []
            else:
                if abs(lit) > n:
                    raise FormatError(f"literal {lit} outside +-1..{n}", line_number)
                current.append(lit)
    if n is None:
        raise FormatError("missing 'p cnf' problem line", 1)
    if current:
        raise FormatError("last clause is not zero-terminated", header_line)
    if len(clauses) != m:
        raise FormatError(f"header declares {m} clauses, found {len(clauses)}", header_line)
    try:
        return CnfFormula(n=n, clauses=tuple(clauses))
    except InstanceError as e:
        raise FormatError(str(e), header_line) from e


def dump_knapsack(k: KnapsackInstance) -> str:
    return f"{k.n} {k.target}\n{' '.join(str(c) for c in k.coefficients)}\n"


def dump_ilp(inst: IlpInstance) -> str:
    out = [f"{inst.d} {inst.n}"]
    for i, (row, bound) in enumerate(zip(inst.a, inst.b)):
        out.append(f"{' '.join(str(v) for v in row)} {inst.relation(i)} {bound}")
    return "\n".join(out) + "\n"


def dump_dimacs(f: CnfFormula) -> str:
    out = [f"p cnf {f.n} {f.m}"]
    out.extend(" ".join(str(lit) for lit in clause) + " 0" for clause in f.clauses)
    return "\n".join(out) + "\n"


_PARSERS = {
    "knapsack": parse_knapsack,
    "ilp": parse_ilp,
    "cnf": parse_dimacs,
    "exact1": parse_dimacs,
}


def load_instance(kind: str, path: str | Path) -> Instance:
    """
    Reads and parses an instance file.

    :raises: FileNotFoundError: If the path does not exist.
    :raises: FormatError: If the content is malformed.
    """
    try:
        parser = _PARSERS[kind]
    except KeyError:
        raise InstanceError(f"no file format for instance kind {kind!r}") from None
    path = Path(path)
    _logger.debug("Loading %s instance from %s", kind, path)
    with open(path, encoding="utf8") as fh:
        return parser(fh.read())


def dump_instance(instance: Instance) -> str:
    if isinstance(instance, KnapsackInstance):
        return dump_knapsack(instance)
    if isinstance(instance, IlpInstance):
        return dump_ilp(instance)
    return dump_dimacs(instance)
