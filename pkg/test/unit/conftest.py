from __future__ import annotations

import itertools
from pathlib import Path
from typing import Callable, Optional

import pytest

from qmitm.config import SolverConfiguration, default_configuration
from qmitm.instances import Assignment, IlpInstance, eval_ilp


@pytest.fixture
def config() -> SolverConfiguration:
    return default_configuration()


@pytest.fixture
def write_text(tmp_path: Path) -> Callable[[str, str], Path]:
    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf8")
        return path

    return _write


def _first_feasible(inst: IlpInstance) -> Optional[Assignment]:
    for bits in itertools.product((0, 1), repeat=inst.n):
        x = Assignment(tuple(reversed(bits)))
        if eval_ilp(inst, x):
            return x
    return None


@pytest.fixture
def first_feasible() -> Callable[[IlpInstance], Optional[Assignment]]:
    """Reference feasibility procedure: scans the cube in counting order."""
    return _first_feasible
