"""
Small shared utilities for qubits
"""

import hashlib
import json
import os
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np


def array_digest(*arrays: Optional[np.ndarray]) -> str:
    """SHA-256 over shapes, dtypes and raw bytes of the given arrays"""
    hash_obj = hashlib.sha256()
    for array in arrays:
        if array is None:
            hash_obj.update(b"none")
            continue
        contiguous = np.ascontiguousarray(array)
        hash_obj.update(str(contiguous.shape).encode())
        hash_obj.update(contiguous.dtype.str.encode())
        hash_obj.update(contiguous.tobytes())
    return hash_obj.hexdigest()


def canonical_json(data: Any) -> str:
    """Stable JSON text (sorted keys, no whitespace) for hashing"""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=_json_default)


def dumps_report(data: Any) -> str:
    """Pretty JSON for reports written to disk or stdout"""
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default)


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def format_timestamp(dt: Optional[datetime] = None) -> str:
    """Format timestamp for reports"""
    if dt is None:
        dt = datetime.now(timezone.utc)

    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def ensure_directory(path: Union[str, Path]) -> Path:
    """Ensure the parent directory of a file path exists"""
    path_obj = Path(path)
    path_obj.parent.mkdir(parents=True, exist_ok=True)
    return path_obj


def resolve_threads(requested: Optional[int] = None) -> int:
    """
    Number of worker threads to use

    QUBITS_THREADS caps whatever was requested; 0/None means one per CPU.
    """
    available = os.cpu_count() or 1
    threads = requested if requested and requested > 0 else available

    env_value = os.getenv("QUBITS_THREADS")
    if env_value:
        try:
            threads = min(threads, max(1, int(env_value)))
        except ValueError:
            pass

    return max(1, threads)


class Timer:
    """Simple timer context manager"""

    def __init__(self, name: str = "Timer"):
        self.name = name
        self.start_time = None
        self.end_time = None

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.end_time = time.perf_counter()

    @property
    def elapsed(self) -> float:
        """Get elapsed time in seconds"""
        if self.start_time is None:
            return 0.0

        end = self.end_time or time.perf_counter()
        return end - self.start_time

    def __str__(self) -> str:
        return f"{self.name}: {self.elapsed:.3f}s"
