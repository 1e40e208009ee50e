from __future__ import annotations

import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional

import jsonschema
import yaml

from .errors import ConfigurationError

__all__ = [
    "CONFIG_ENV_VAR",
    "SolverConfiguration",
    "BenchPlan",
    "load_configuration",
    "load_bench_plan",
    "default_configuration",
]

_logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "QMITM_CONFIG"

_PACKAGE_DIR = Path(__file__).parent
_DEFAULT_CONFIG_PATH = _PACKAGE_DIR / "cli" / "QSolve.json"
_CONFIG_SCHEMA_PATH = _PACKAGE_DIR / "cli" / "schemas" / "config.schema.json"
_DEFAULT_BENCH_PLAN_PATH = _PACKAGE_DIR / "default_bench_plan.yaml"


@dataclass(frozen=True)
class SolverConfiguration:
    """
    Knobs shared by the solvers, the search simulator and the CLI. Values come from the
    packaged QSolve.json, optionally overlaid by a user file.
    """

    log_level: str = field(default="INFO")
    retries: int = field(default=5)
    bbht_growth: float = field(default=1.2, metadata={"help": "lambda of the BBHT schedule"})
    bbht_cutoff_factor: float = field(
        default=9.0, metadata={"help": "give up once queries exceed this times sqrt(N)"}
    )
    max_enumeration_bits: int = field(default=24)
    subset_explosion_cap: int = field(default=1 << 22)
    witness_cap: int = field(default=1 << 16)
    verify_max_n: int = field(default=20)
    exhaustive_promise_max_n: int = field(default=8)
    exhaustive_family_max_n: int = field(default=256)
    record_wall_time: bool = field(default=False)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def replace(self, **changes: Any) -> SolverConfiguration:
        return dataclasses.replace(self, **changes)


@lru_cache(maxsize=1)
def _schema() -> dict:
    with open(_CONFIG_SCHEMA_PATH, encoding="utf8") as fh:
        return json.load(fh)


def _read_json(path: Path) -> dict:
    try:
        with open(path, encoding="utf8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise ConfigurationError(f"Could not read configuration file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Configuration file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"Configuration file {path} must hold a JSON object")
    return data


def _validate(document: dict, source: str) -> None:
    try:
        jsonschema.validate(document, _schema())
    except jsonschema.ValidationError as e:
        location = ".".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigurationError(f"Invalid configuration in {source} at {location}: {e.message}")


def load_configuration(path: Optional[str | Path] = None) -> SolverConfiguration:
    """
    Builds the effective configuration: packaged defaults, then the user file given by
    `path` or, failing that, by the QMITM_CONFIG environment variable.

    :raises: ConfigurationError: If a document is unreadable or fails schema validation.
    """
    document = _read_json(_DEFAULT_CONFIG_PATH)
    _validate(document, str(_DEFAULT_CONFIG_PATH))

    if path is None:
        env_path = os.environ.get(CONFIG_ENV_VAR)
        path = Path(env_path) if env_path else None
    if path is not None:
        path = Path(path)
        overrides = _read_json(path)
        _validate(overrides, str(path))
        _logger.debug("Applying configuration overrides from %s: %s", path, sorted(overrides))
        document.update(overrides)

    return SolverConfiguration(**document)


@lru_cache(maxsize=1)
def default_configuration() -> SolverConfiguration:
    """The packaged defaults only; environment and user files are ignored."""
    document = _read_json(_DEFAULT_CONFIG_PATH)
    _validate(document, str(_DEFAULT_CONFIG_PATH))
    return SolverConfiguration(**document)


@dataclass(frozen=True)
class BenchPlan:
    sizes: tuple[int, ...]
    trials: int


def load_bench_plan(problem: str, path: Optional[str | Path] = None) -> BenchPlan:
    """
    Reads the sizes and trial count for one benchmark problem from a YAML plan, the
    packaged default_bench_plan.yaml unless `path` is given.

    :raises: ConfigurationError: If the plan has no usable entry for the problem.
    """
    plan_path = Path(path) if path is not None else _DEFAULT_BENCH_PLAN_PATH
    try:
        with open(plan_path, encoding="utf8") as fh:
            plan = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigurationError(f"Could not load benchmark plan {plan_path}: {e}") from e

    entry = plan.get(problem) if isinstance(plan, dict) else None
    if not isinstance(entry, dict):
        raise ConfigurationError(f"Benchmark plan {plan_path} has no entry for {problem!r}")
    try:
        sizes = tuple(int(s) for s in entry["sizes"])
        trials = int(entry["trials"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigurationError(
            f"Benchmark plan entry {problem!r} needs integer 'sizes' and 'trials': {e}"
        ) from e
    if not sizes or trials < 1:
        raise ConfigurationError(f"Benchmark plan entry {problem!r} is empty")
    return BenchPlan(sizes=sizes, trials=trials)
