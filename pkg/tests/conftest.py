"""
Shared fixtures for the qubits test suite
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to path
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from qubits.data.dataset_io import Dataset  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def blobs(rng):
    """Three tight, well separated Gaussian blobs of 10 points in 2-D, with labels"""
    centers = np.array([[0.0, 0.0], [6.0, 0.0], [0.0, 6.0]])
    labels = np.repeat(np.arange(3), 10)
    data = centers[labels] + rng.normal(0.0, 0.1, size=(30, 2))
    return Dataset(data=data, labels=labels)


@pytest.fixture
def write_text(tmp_path):
    """Write a text file under tmp_path and return its path"""
    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write


def random_similarity(rng, n: int) -> np.ndarray:
    """Symmetric similarity matrix with entries in [0, 1] and zero diagonal"""
    upper = np.triu(rng.random((n, n)), k=1)
    return upper + upper.T
