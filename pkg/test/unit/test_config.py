from __future__ import annotations

import json

import pytest

from qmitm.config import (
    CONFIG_ENV_VAR,
    SolverConfiguration,
    default_configuration,
    load_bench_plan,
    load_configuration,
)
from qmitm.errors import ConfigurationError


@pytest.fixture(autouse=True)
def no_env_config(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)


def test_packaged_defaults_match_dataclass():
    assert load_configuration() == SolverConfiguration()
    assert default_configuration() == SolverConfiguration()


def test_user_file_overrides(write_text):
    path = write_text("cfg.json", json.dumps({"retries": 2, "bbht_growth": 1.5}))
    config = load_configuration(path)
    assert config.retries == 2
    assert config.bbht_growth == 1.5
    assert config.bbht_cutoff_factor == 9.0


def test_environment_variable(write_text, monkeypatch):
    path = write_text("env.json", json.dumps({"verify_max_n": 12}))
    monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
    assert load_configuration().verify_max_n == 12


def test_explicit_path_wins_over_environment(write_text, monkeypatch):
    monkeypatch.setenv(CONFIG_ENV_VAR, str(write_text("env.json", '{"retries": 1}')))
    assert load_configuration(write_text("cli.json", '{"retries": 3}')).retries == 3


@pytest.mark.parametrize(
    "document",
    [
        {"retries": -1},
        {"bbht_growth": 1.0},
        {"log_level": "LOUD"},
        {"max_enumeration_bits": 40},
        {"unknown_key": 1},
    ],
)
def test_schema_violations(write_text, document):
    with pytest.raises(ConfigurationError) as raised:
        load_configuration(write_text("bad.json", json.dumps(document)))
    assert "Invalid configuration" in str(raised.value)


def test_not_json(write_text):
    with pytest.raises(ConfigurationError):
        load_configuration(write_text("bad.json", "{retries: 1"))


def test_not_an_object(write_text):
    with pytest.raises(ConfigurationError):
        load_configuration(write_text("list.json", "[1, 2]"))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_configuration(tmp_path / "absent.json")


def test_replace_keeps_original():
    config = SolverConfiguration()
    changed = config.replace(retries=0)
    assert changed.retries == 0
    assert config.retries == 5
    assert changed.to_dict()["retries"] == 0


class TestBenchPlan:
    def test_packaged_plan(self):
        plan = load_bench_plan("ilp")
        assert plan.sizes == (12, 15, 18, 21, 24)
        assert plan.trials == 50

    def test_every_problem_has_an_entry(self):
        for problem in ("ilp", "symclaw", "cnf", "claw", "collision"):
            assert load_bench_plan(problem).trials >= 1

    def test_custom_plan(self, write_text):
        path = write_text("plan.yaml", "cnf:\n  sizes: [6, 8]\n  trials: 2\n")
        assert load_bench_plan("cnf", path).sizes == (6, 8)

    @pytest.mark.parametrize(
        "text",
        ["ilp:\n  sizes: [6]\n  trials: 1\n", "cnf: [1, 2]\n", "cnf:\n  sizes: [a]\n  trials: 1\n"],
    )
    def test_unusable_entry(self, write_text, text):
        with pytest.raises(ConfigurationError):
            load_bench_plan("cnf", write_text("plan.yaml", text))

    def test_empty_sizes(self, write_text):
        with pytest.raises(ConfigurationError):
            load_bench_plan("cnf", write_text("plan.yaml", "cnf:\n  sizes: []\n  trials: 3\n"))

    def test_invalid_yaml(self, write_text):
        with pytest.raises(ConfigurationError):
            load_bench_plan("cnf", write_text("plan.yaml", "cnf: [unclosed\n"))
