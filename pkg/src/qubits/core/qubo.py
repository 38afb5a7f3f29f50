"""
QUBO model of balanced clustering

Objective over binary q[c, i] (cluster c < k, point i < n)::

    - sum_c sum_{i<j} d_ij q_ci q_cj            (similarity)
    + lambda1 * sum_i (sum_c q_ci - 1)^2          (one-hot)
    + lambda2 * sum_c (sum_j q_cj)^2              (cluster-size balance)

Expanded with q^2 = q:

    same-cluster pair (c,i)-(c,j):   2*lambda2 - d_ij
    same-point pair (c,i)-(c',i):    2*lambda1
    every linear term:               lambda2 - lambda1
    offset:                          n * lambda1

Variable index of q[c, i] is ``v = c * n + i``. Only strictly upper
triangular quadratic terms (u < v) are stored.
"""

import errno
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np
import scipy.sparse

from ..utils.errors import InputError, ModelError
from ..utils.helpers import ensure_directory
from ..utils.logger import get_logger
from .similarity import SimilarityMatrix

logger = get_logger(__name__)

STRICT_RATIO = 100.0
OUTLIER_PERMITTING_RATIO = 30.0


class LambdaRegime(Enum):
    """How strongly the one-hot constraint dominates the balance term"""
    STRICT = "strict"
    OUTLIER_PERMITTING = "outlier_permitting"

    @classmethod
    def parse(cls, text: str) -> "LambdaRegime":
        """Accept both "outlier-permitting" and "outlier_permitting" """
        try:
            return cls(text.replace("-", "_"))
        except ValueError as e:
            raise InputError(f"unknown lambda regime {text!r}", regime=text) from e


@dataclass(frozen=True)
class QuboModel:
    """Linear + strictly upper-triangular quadratic coefficients + offset"""
    linear: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    coefs: np.ndarray
    offset: float = 0.0
    n: int = 0
    k: int = 1
    lambda1: float = 0.0
    lambda2: float = 0.0
    _adjacency: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        linear = np.asarray(self.linear, dtype=np.float64).ravel()
        rows = np.asarray(self.rows, dtype=np.int64).ravel()
        cols = np.asarray(self.cols, dtype=np.int64).ravel()
        coefs = np.asarray(self.coefs, dtype=np.float64).ravel()
        n_vars = linear.shape[0]

        if not (rows.shape == cols.shape == coefs.shape):
            raise ModelError("quadratic rows/cols/coefs lengths differ")
        if rows.size:
            if np.any(rows >= cols):
                bad = int(np.flatnonzero(rows >= cols)[0])
                raise ModelError(
                    f"quadratic key ({rows[bad]}, {cols[bad]}) is not strictly upper triangular",
                    u=int(rows[bad]), v=int(cols[bad]),
                )
            if rows.min() < 0 or cols.max() >= n_vars:
                raise ModelError("quadratic key outside variable range", n_vars=n_vars)
            keys = rows * n_vars + cols
            if np.unique(keys).size != keys.size:
                raise ModelError("duplicate quadratic key")
        if not (np.all(np.isfinite(linear)) and np.all(np.isfinite(coefs)) and np.isfinite(self.offset)):
            raise ModelError("non-finite coefficient")

        n = self.n if self.n else n_vars
        if n * self.k != n_vars:
            raise ModelError(f"n*k = {n}*{self.k} does not match {n_vars} variables",
                             n=n, k=self.k, n_vars=n_vars)

        for name, array in (("linear", linear), ("rows", rows), ("cols", cols), ("coefs", coefs)):
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "n", int(n))

    @property
    def n_vars(self) -> int:
        return self.linear.shape[0]

    @staticmethod
    def variable_index(c: int, i: int, n: int) -> int:
        """Index of q[c, i]"""
        return c * n + i

    @property
    def quadratic(self) -> Dict[Tuple[int, int], float]:
        """Quadratic terms as a {(u, v): coef} map"""
        return {
            (int(u), int(v)): float(w)
            for u, v, w in zip(self.rows, self.cols, self.coefs)
        }

    @classmethod
    def from_terms(
        cls,
        linear,
        quadratic: Optional[Mapping[Tuple[int, int], float]] = None,
        offset: float = 0.0,
        n: Optional[int] = None,
        k: int = 1,
        lambda1: float = 0.0,
        lambda2: float = 0.0,
    ) -> "QuboModel":
        """Generic model from a {(u, v): coef} map with u < v"""
        quadratic = dict(quadratic or {})
        seen = set()
        for (u, v) in quadratic:
            if (v, u) in seen:
                raise ModelError(f"symmetric duplicate ({u}, {v}) / ({v}, {u})", u=u, v=v)
            seen.add((u, v))
        keys = list(quadratic.keys())
        rows = np.array([u for u, _ in keys], dtype=np.int64)
        cols = np.array([v for _, v in keys], dtype=np.int64)
        coefs = np.array([quadratic[key] for key in keys], dtype=np.float64)
        linear = np.asarray(linear, dtype=np.float64)
        return cls(
            linear=linear, rows=rows, cols=cols, coefs=coefs, offset=offset,
            n=n if n is not None else linear.size // k, k=k,
            lambda1=lambda1, lambda2=lambda2,
        )

    def coefficient_magnitudes(self) -> np.ndarray:
        """|coef| of every linear and quadratic term"""
        return np.abs(np.concatenate([self.linear, self.coefs]))

    def adjacency(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric CSR arrays (indptr, indices, weights), cached"""
        if "csr" not in self._adjacency:
            size = self.n_vars
            rows = np.concatenate([self.rows, self.cols])
            cols = np.concatenate([self.cols, self.rows])
            data = np.concatenate([self.coefs, self.coefs])
            matrix = scipy.sparse.csr_matrix((data, (rows, cols)), shape=(size, size))
            matrix.sort_indices()
            self._adjacency["csr"] = (
                matrix.indptr.astype(np.int64),
                matrix.indices.astype(np.int64),
                matrix.data.astype(np.float64),
            )
        return self._adjacency["csr"]

    def to_dict(self) -> Dict[str, Any]:
        """Interchange format written by qubo-export"""
        return {
            "n": self.n,
            "k": self.k,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "offset": self.offset,
            "linear": self.linear.tolist(),
            "quadratic": [
                [int(u), int(v), float(w)] for u, v, w in zip(self.rows, self.cols, self.coefs)
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "QuboModel":
        try:
            quadratic = np.asarray(data.get("quadratic", []), dtype=np.float64).reshape(-1, 3)
            return cls(
                linear=np.asarray(data["linear"], dtype=np.float64),
                rows=quadratic[:, 0].astype(np.int64),
                cols=quadratic[:, 1].astype(np.int64),
                coefs=quadratic[:, 2],
                offset=float(data.get("offset", 0.0)),
                n=int(data["n"]),
                k=int(data["k"]),
                lambda1=float(data.get("lambda1", 0.0)),
                lambda2=float(data.get("lambda2", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ModelError):
                raise
            raise ModelError(f"malformed QUBO document: {e}") from e


def build(s: SimilarityMatrix, k: int, lambda1: float, lambda2: float) -> QuboModel:
    """
    Expand the balanced clustering objective into QUBO coefficients

    Args:
        s: similarity matrix (n >= 2)
        k: number of clusters
        lambda1: one-hot penalty weight
        lambda2: cluster-size balance weight

    Returns:
        QuboModel over n*k variables
    """
    if s.n < 2:
        raise ModelError(f"need at least 2 points, got {s.n}", n=s.n)
    return build_from_matrix(s.values, k, lambda1, lambda2)


def build_from_matrix(values: np.ndarray, k: int, lambda1: float, lambda2: float) -> QuboModel:
    """``build`` on a raw symmetric matrix; also accepts n = 1"""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ModelError(f"similarity matrix must be square, got shape {values.shape}")
    if k < 1:
        raise ModelError(f"k must be at least 1, got {k}", k=k)
    if lambda1 < 0 or lambda2 < 0:
        raise ModelError("lambda values must be non-negative", lambda1=lambda1, lambda2=lambda2)

    n = values.shape[0]
    n_vars = n * k
    iu, ju = np.triu_indices(n, k=1)
    pair_coef = 2.0 * lambda2 - values[iu, ju]

    row_blocks, col_blocks, coef_blocks = [], [], []
    for c in range(k):
        row_blocks.append(c * n + iu)
        col_blocks.append(c * n + ju)
        coef_blocks.append(pair_coef)

    if k > 1 and lambda1 != 0.0:
        points = np.arange(n)
        for c in range(k):
            for c2 in range(c + 1, k):
                row_blocks.append(c * n + points)
                col_blocks.append(c2 * n + points)
                coef_blocks.append(np.full(n, 2.0 * lambda1))

    rows = np.concatenate(row_blocks) if row_blocks else np.empty(0, dtype=np.int64)
    cols = np.concatenate(col_blocks) if col_blocks else np.empty(0, dtype=np.int64)
    coefs = np.concatenate(coef_blocks) if coef_blocks else np.empty(0)
    keep = coefs != 0.0

    model = QuboModel(
        linear=np.full(n_vars, lambda2 - lambda1),
        rows=rows[keep],
        cols=cols[keep],
        coefs=coefs[keep],
        offset=n * lambda1,
        n=n,
        k=k,
        lambda1=float(lambda1),
        lambda2=float(lambda2),
    )
    logger.info(
        f"Built QUBO: n={n}, k={k}, {n_vars} variables, {model.rows.size} quadratic terms, "
        f"lambda1={lambda1:.6g}, lambda2={lambda2:.6g}"
    )
    return model


def _check_bits(bits, n_vars: int) -> np.ndarray:
    array = np.asarray(bits)
    if array.ndim != 1 or array.shape[0] != n_vars:
        raise ModelError(f"bitstring length {array.size} does not match {n_vars} variables",
                         length=int(array.size), n_vars=n_vars)
    if not np.all((array == 0) | (array == 1)):
        raise ModelError("bitstring entries must be 0 or 1")
    return array.astype(np.float64)


def energy(m: QuboModel, bits) -> float:
    """offset + linear . bits + sum of quadratic terms whose both bits are set"""
    x = _check_bits(bits, m.n_vars)
    value = m.offset + float(m.linear @ x)
    if m.rows.size:
        value += float(np.sum(m.coefs * x[m.rows] * x[m.cols]))
    return value


@dataclass(frozen=True)
class EnergyBreakdown:
    """The three objective terms evaluated directly"""
    similarity_term: float
    onehot_penalty: float
    balance_penalty: float
    total: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "similarity_term": self.similarity_term,
            "onehot_penalty": self.onehot_penalty,
            "balance_penalty": self.balance_penalty,
            "total": self.total,
        }


def energy_breakdown(s: Union[SimilarityMatrix, np.ndarray], k: int, lambda1: float,
                     lambda2: float, bits) -> EnergyBreakdown:
    """
    Evaluate each term from (d, lambda1, lambda2) without the QUBO expansion
    """
    values = s.values if isinstance(s, SimilarityMatrix) else np.asarray(s, dtype=np.float64)
    n = values.shape[0]
    q = _check_bits(bits, n * k).reshape(k, n)

    upper = np.triu(values, k=1)
    similarity_term = -float(sum(q[c] @ upper @ q[c] for c in range(k)))
    memberships = q.sum(axis=0)
    onehot_penalty = float(lambda1 * np.sum((memberships - 1.0) ** 2))
    sizes = q.sum(axis=1)
    balance_penalty = float(lambda2 * np.sum(sizes ** 2))

    return EnergyBreakdown(
        similarity_term=similarity_term,
        onehot_penalty=onehot_penalty,
        balance_penalty=balance_penalty,
        total=similarity_term + onehot_penalty + balance_penalty,
    )


def balance_identity(sizes, k: int) -> float:
    """
    k * (sigma^2 + mu^2) with mu = n/k the mean cluster size and sigma^2 the
    population variance of the sizes; equals sum(S_c^2) for any one-hot
    assignment
    """
    sizes = np.asarray(sizes, dtype=np.float64)
    mu = sizes.sum() / k
    sigma2 = np.mean((sizes - mu) ** 2)
    return float(k * (sigma2 + mu ** 2))


def auto_lambda(s: SimilarityMatrix, k: int, regime: Union[LambdaRegime, str]) -> Tuple[float, float]:
    """
    Reproducible default penalty weights

    lambda2 = mean(positive off-diagonal d) / 2, which puts the balance term
    at the magnitude of the similarity term for balanced clusters: both grow
    as n * (n/k), and moving one point changes them by about
    2 * lambda2 * S and d_mean * S. lambda1 = 100 * lambda2 (strict) or
    30 * lambda2 (outlier permitting). A full membership in a cluster of S
    points costs about -lambda2 for any S.
    """
    if isinstance(regime, str):
        regime = LambdaRegime.parse(regime)
    if k < 1:
        raise ModelError(f"k must be at least 1, got {k}", k=k)

    off = s.off_diagonal()
    positive = off[off > 0]
    if positive.size == 0:
        raise ModelError("similarity matrix has no positive off-diagonal values")

    lambda2 = float(positive.mean() / 2.0)
    ratio = STRICT_RATIO if regime is LambdaRegime.STRICT else OUTLIER_PERMITTING_RATIO
    lambda1 = ratio * lambda2
    logger.info(f"auto lambda ({regime.value}): lambda1={lambda1:.6g}, lambda2={lambda2:.6g}")
    return lambda1, lambda2


def export_json(m: QuboModel, path: Union[str, Path]) -> Path:
    """Write the model in the interchange JSON format"""
    path = ensure_directory(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(m.to_dict(), f)
    logger.info(f"QUBO exported to {path}")
    return path


def load_json(path: Union[str, Path]) -> QuboModel:
    """Read a model written by export_json"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(errno.ENOENT, "QUBO file not found", str(path))
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise InputError(f"QUBO file is not valid JSON: {e}", path=str(path)) from e
    return QuboModel.from_dict(data)
