"""
Configuration Manager for qubits

Run-independent settings (solver budgets, default ranks, logging) live in a
JSON file. Lookup order: the given path, then ``config.example.json`` next to
it, then the built-in defaults. File values are merged over the defaults key
by key, so a partial file only overrides what it names.
"""

import copy
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

from .logger import get_logger

DEFAULT_CONFIG_PATH = "config/config.json"
THREADS_ENV = "QUBITS_THREADS"

DEFAULTS: Dict[str, Any] = {
    "lowrank": {"default_rank": 5, "gram_ratio": 8},
    "similarity": {"epsilon": 1e-9},
    "annealer": {
        "restarts": 4,
        "max_sweeps": 1_000_000,
        "sweeps_per_variable": 100,
        "work_budget": 400_000_000,
        "threads": 0,
    },
    "baseline": {"max_iter": 300, "n_init": 1},
    "logging": {"level": "INFO", "file": None, "max_size": "10MB", "backup_count": 5},
}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class Config:
    """Configuration management for qubits"""

    def __init__(self, config_path: Optional[str] = None):
        self.logger = get_logger(__name__)
        self.config_path = Path(config_path or DEFAULT_CONFIG_PATH)
        self.source: Optional[Path] = None
        self._config_data = self._load()

    def _load(self) -> Dict[str, Any]:
        for candidate in (self.config_path, self.config_path.parent / "config.example.json"):
            if not candidate.exists():
                continue
            try:
                with open(candidate, "r", encoding="utf-8") as f:
                    loaded = json.load(f)
            except (json.JSONDecodeError, OSError) as e:
                self.logger.error(f"Error loading configuration from {candidate}: {e}")
                break
            if not isinstance(loaded, dict):
                self.logger.error(f"Configuration in {candidate} is not a JSON object; ignored")
                break
            self.source = candidate
            self.logger.debug(f"Configuration loaded from {candidate}")
            return _merge(DEFAULTS, loaded)

        self.logger.debug("Using built-in configuration defaults")
        return copy.deepcopy(DEFAULTS)

    def get(self, key: str, default: Any = None) -> Any:
        """Value at a dotted key such as ``annealer.restarts``"""
        value: Any = self._config_data
        for part in key.split("."):
            if not isinstance(value, dict) or part not in value:
                return default
            value = value[part]
        return value

    def set(self, key: str, value: Any):
        *parents, last = key.split(".")
        node = self._config_data
        for part in parents:
            node = node.setdefault(part, {})
        node[last] = value

    def save(self):
        """Write the current settings to ``config_path``"""
        try:
            self.config_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_path, "w", encoding="utf-8") as f:
                json.dump(self._config_data, f, indent=2)
            self.logger.info(f"Configuration saved to {self.config_path}")
        except OSError as e:
            self.logger.error(f"Error saving configuration: {e}")

    @property
    def default_svd_rank(self) -> int:
        return int(self.get("lowrank.default_rank"))

    @property
    def gram_ratio(self) -> int:
        return int(self.get("lowrank.gram_ratio"))

    @property
    def similarity_epsilon(self) -> float:
        return float(self.get("similarity.epsilon"))

    @property
    def default_restarts(self) -> int:
        return int(self.get("annealer.restarts"))

    @property
    def max_sweeps(self) -> int:
        return int(self.get("annealer.max_sweeps"))

    @property
    def sweeps_per_variable(self) -> int:
        return int(self.get("annealer.sweeps_per_variable"))

    @property
    def work_budget(self) -> int:
        return int(self.get("annealer.work_budget"))

    @property
    def threads(self) -> int:
        """Thread cap; QUBITS_THREADS wins over the file value. 0 means one per CPU."""
        env_value = os.getenv(THREADS_ENV)
        if env_value:
            try:
                return max(1, int(env_value))
            except ValueError:
                self.logger.warning(f"Ignoring non-integer {THREADS_ENV}={env_value!r}")
        return int(self.get("annealer.threads") or 0)

    @property
    def kmeans_max_iter(self) -> int:
        return int(self.get("baseline.max_iter"))

    @property
    def kmeans_n_init(self) -> int:
        return int(self.get("baseline.n_init"))

    @property
    def log_level(self) -> str:
        return self.get("logging.level", "INFO")

    @property
    def log_file(self) -> Optional[str]:
        return self.get("logging.file")

    def validate(self) -> bool:
        """False (with the offending key logged) if any setting is out of range"""
        checks = {
            "lowrank.default_rank": self.default_svd_rank >= 0,
            "lowrank.gram_ratio": self.gram_ratio >= 1,
            "similarity.epsilon": self.similarity_epsilon > 0,
            "annealer.restarts": self.default_restarts >= 1,
            "annealer.max_sweeps": self.max_sweeps >= 1,
            "annealer.sweeps_per_variable": self.sweeps_per_variable >= 1,
            "annealer.work_budget": self.work_budget >= 1,
            "baseline.max_iter": self.kmeans_max_iter >= 1,
            "baseline.n_init": self.kmeans_n_init >= 1,
        }
        bad = [key for key, ok in checks.items() if not ok]
        for key in bad:
            self.logger.error(f"Invalid configuration value: {key} = {self.get(key)!r}")
        return not bad
