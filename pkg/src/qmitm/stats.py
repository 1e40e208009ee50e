from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Optional

__all__ = ["SolveStats"]


@dataclass
class SolveStats:
    """
    Cost accounting for one solve call. quantum_queries counts simulated oracle invocations
    only; classical_setup_evals is the cost of the simulation's own setup pass and
    preprocess_ops the cost of building the searchable structure.
    """

    quantum_queries: int = 0
    classical_setup_evals: int = 0
    preprocess_ops: int = 0
    tree_visits: int = 0
    attempts: int = 0
    wall_ms: Optional[float] = None
    details: dict[str, Any] = field(default_factory=dict)

    def absorb(self, other: SolveStats) -> None:
        """Adds another call's counters into this one. Details are merged, other wins."""
        self.quantum_queries += other.quantum_queries
        self.classical_setup_evals += other.classical_setup_evals
        self.preprocess_ops += other.preprocess_ops
        self.tree_visits += other.tree_visits
        self.attempts += other.attempts
        if other.wall_ms is not None:
            self.wall_ms = (self.wall_ms or 0.0) + other.wall_ms
        self.details.update(other.details)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

