from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional, Sequence, TextIO, Union

import jsonschema

from ..stats import SolveStats

__all__ = ["RunReport", "digest", "write_table"]

_RUN_REPORT_SCHEMA_PATH = Path(__file__).parent / "schemas" / "run_report.schema.json"


@lru_cache(maxsize=1)
def _schema() -> dict:
    with open(_RUN_REPORT_SCHEMA_PATH, encoding="utf8") as fh:
        return json.load(fh)


def digest(content: Union[str, bytes]) -> str:
    if isinstance(content, str):
        content = content.encode("utf8")
    return "sha256:" + hashlib.sha256(content).hexdigest()


@dataclass
class RunReport:
    """
    Machine-readable outcome of one solve command. A witness is only ever set after it has
    been re-checked against the instance outside the solver.
    """

    command: list[str]
    kind: str
    result: str
    quantum_queries: int
    classical_setup_evals: int
    seed: int
    instance_digest: Optional[str] = None
    witness: Optional[Union[str, list]] = None
    tree_visits: int = 0
    retries_used: int = 0
    wall_ms: Optional[float] = None
    verified_against_brute_force: Optional[bool] = None
    details: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_stats(
        cls,
        command: Sequence[str],
        kind: str,
        result: str,
        stats: SolveStats,
        seed: int,
        **kwargs: Any,
    ) -> RunReport:
        return cls(
            command=list(command),
            kind=kind,
            result=result,
            quantum_queries=stats.quantum_queries,
            classical_setup_evals=stats.classical_setup_evals,
            seed=seed,
            tree_visits=stats.tree_visits,
            retries_used=max(stats.attempts - 1, 0),
            wall_ms=stats.wall_ms,
            details=dict(stats.details, preprocess_ops=stats.preprocess_ops),
            **kwargs,
        )

    def to_dict(self) -> dict[str, Any]:
        # round-trip through JSON so tuples inside details validate as arrays
        return json.loads(json.dumps(dataclasses.asdict(self)))

    def validate(self) -> None:
        """
        :raises: jsonschema.ValidationError: If the report does not match run_report.schema.json.
        """
        jsonschema.validate(self.to_dict(), _schema())

    def to_json(self) -> str:
        self.validate()
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def write_table(rows: Sequence[tuple[str, Any]], stream: TextIO) -> None:
    """Two-column plain text table for humans."""
    if not rows:
        return
    width = max(len(key) for key, _ in rows)
    for key, value in rows:
        print(f"{key.ljust(width)}  {value}", file=stream)
