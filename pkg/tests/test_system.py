"""
System-level checks: configuration, logging, errors and run configs
"""

import json
import logging

import pytest

from qubits.cli.run_config import RunConfig
from qubits.utils.config import Config
from qubits.utils.errors import (
    ComputationError,
    ConfigError,
    DataParseError,
    InputError,
    MetricError,
    QubitsError,
    SolverError,
)
from qubits.utils.helpers import resolve_threads
from qubits.utils.logger import get_logger, parse_size, setup_logging


class TestConfig:
    def test_defaults_without_files(self, tmp_path):
        config = Config(str(tmp_path / "missing" / "config.json"))
        assert config.default_svd_rank == 5
        assert config.default_restarts == 4
        assert config.work_budget == 400_000_000
        assert config.max_sweeps == 1_000_000
        assert config.sweeps_per_variable == 100
        assert config.kmeans_max_iter == 300
        assert config.validate()

    def test_example_file_used_as_fallback(self, tmp_path):
        (tmp_path / "config.example.json").write_text(json.dumps({"annealer": {"restarts": 6}}))
        config = Config(str(tmp_path / "config.json"))
        assert config.default_restarts == 6
        assert config.max_sweeps == 1_000_000

    def test_dot_notation(self, tmp_path):
        config = Config(str(tmp_path / "config.json"))
        config.set("lowrank.default_rank", 3)
        assert config.get("lowrank.default_rank") == 3
        assert config.get("no.such.key", "fallback") == "fallback"

    def test_save_round_trip(self, tmp_path):
        path = tmp_path / "config.json"
        config = Config(str(path))
        config.set("baseline.n_init", 7)
        config.save()
        assert Config(str(path)).kmeans_n_init == 7

    def test_invalid_values_rejected(self, tmp_path):
        config = Config(str(tmp_path / "config.json"))
        config.set("annealer.restarts", 0)
        assert not config.validate()

    def test_threads_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QUBITS_THREADS", "3")
        assert Config(str(tmp_path / "config.json")).threads == 3
        assert resolve_threads(8) == 3
        assert resolve_threads(2) == 2

    def test_bad_threads_environment_ignored(self, monkeypatch):
        monkeypatch.setenv("QUBITS_THREADS", "many")
        assert resolve_threads(2) == 2


class TestLogging:
    def test_console_goes_to_stderr(self, capsys):
        setup_logging(log_level="INFO")
        get_logger("qubits.test").info("hello from the test")
        captured = capsys.readouterr()
        assert "hello from the test" not in captured.out

    def test_log_file(self, tmp_path):
        log_file = tmp_path / "logs" / "run.log"
        setup_logging(log_level="DEBUG", log_file=str(log_file))
        get_logger("qubits.test").debug("written to file")
        for handler in logging.getLogger().handlers:
            handler.flush()
        assert "written to file" in log_file.read_text(encoding="utf-8")

    def test_quiet_console_keeps_warnings(self):
        setup_logging(log_level="DEBUG", quiet=True)
        console = logging.getLogger().handlers[0]
        assert console.level == logging.WARNING

    @pytest.mark.parametrize("text, expected", [
        ("10MB", 10 * 1024 ** 2),
        ("512KB", 512 * 1024),
        ("1.5 GB", int(1.5 * 1024 ** 3)),
        ("3", 3 * 1024 ** 2),
        ("lots", 10 * 1024 ** 2),
    ])
    def test_parse_size(self, text, expected):
        assert parse_size(text) == expected


class TestErrors:
    def test_exit_codes(self):
        assert InputError("x").exit_code == 2
        assert ConfigError("x").exit_code == 2
        assert ComputationError("x").exit_code == 1
        assert SolverError("x").exit_code == 1

    def test_hierarchy(self):
        assert issubclass(MetricError, ComputationError)
        assert issubclass(DataParseError, InputError)
        assert issubclass(InputError, QubitsError)

    def test_error_json(self):
        error = DataParseError("bad cell", row=3, col=1)
        assert error.to_dict() == {
            "type": "DataParseError",
            "message": "bad cell",
            "details": {"row": 3, "col": 1},
        }


class TestRunConfig:
    def test_json_round_trip(self):
        cfg = RunConfig.create(subcommand="cluster", inputs=["data.csv"], k=3, seed=5,
                               roi=(0, 0, 4, 4), lambda_regime="outlier-permitting")
        assert RunConfig.from_json(cfg.to_json()) == cfg

    @pytest.mark.parametrize("values", [
        {"k": 0},
        {"restarts": 0},
        {"lambda1": -1.0},
        {"seed": -3},
        {"metric": "manhattan"},
    ])
    def test_invalid_values(self, values):
        with pytest.raises(ConfigError) as info:
            RunConfig.create(subcommand="cluster", **values)
        assert info.value.details["errors"]

    def test_unknown_subcommand(self):
        with pytest.raises(ConfigError):
            RunConfig.create(subcommand="serve")

    def test_malformed_json(self):
        with pytest.raises(ConfigError):
            RunConfig.from_json('{"subcommand": "cluster", "k": "three"}')
