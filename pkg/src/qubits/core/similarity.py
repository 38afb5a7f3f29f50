"""
Pairwise similarity matrices feeding the QUBO similarity term
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..data.dataset_io import Dataset
from ..utils.errors import MetricError
from ..utils.logger import get_logger

logger = get_logger(__name__)

DISTANCE_EPSILON = 1e-9
CLAMP_TOLERANCE = 1e-12


class SimilarityKind(Enum):
    """Which quantity d_ij holds"""
    INVERSE_EUCLIDEAN = "inverse_euclidean"
    COSINE = "cosine"


# CLI spelling -> kind
METRICS = {
    "inv-euclid": SimilarityKind.INVERSE_EUCLIDEAN,
    "cosine": SimilarityKind.COSINE,
}


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric n x n d_ij with a zero diagonal"""
    values: np.ndarray
    kind: SimilarityKind

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def off_diagonal(self) -> np.ndarray:
        """Upper-triangle values (i < j)"""
        iu, ju = np.triu_indices(self.n, k=1)
        return self.values[iu, ju]


@dataclass(frozen=True)
class AngularDistanceMatrix:
    """|sin(theta_ij / 2)| derived from a cosine similarity matrix"""
    values: np.ndarray
    derivation: SimilarityKind = SimilarityKind.COSINE

    @property
    def n(self) -> int:
        return self.values.shape[0]


def cosine_similarity(d: Dataset) -> SimilarityMatrix:
    """
    cos(theta_ij) = <x_i, x_j> / (|x_i| |x_j|)

    Raises:
        MetricError: a row has zero norm (direction undefined)
    """
    data = d.data
    norms = np.linalg.norm(data, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise MetricError(
            f"row {int(zero[0])} has zero norm; cosine similarity is undefined",
            row=int(zero[0]),
        )

    unit = data / norms[:, None]
    values = unit @ unit.T
    values = 0.5 * (values + values.T)

    excess = np.max(np.abs(values)) - 1.0
    if excess > CLAMP_TOLERANCE:
        logger.debug(f"Cosine values exceeded [-1, 1] by {excess:.3e}; clamped")
    np.clip(values, -1.0, 1.0, out=values)
    np.fill_diagonal(values, 0.0)

    return SimilarityMatrix(values=values, kind=SimilarityKind.COSINE)


def inverse_euclidean(d: Dataset, epsilon: float = DISTANCE_EPSILON) -> SimilarityMatrix:
    """d_ij = 1 / max(|x_i - x_j|, epsilon), so duplicates stay finite"""
    distances = squareform(pdist(d.data, metric="euclidean"))
    values = 1.0 / np.maximum(distances, epsilon)
    np.fill_diagonal(values, 0.0)

    duplicates = int(np.count_nonzero(np.triu(distances < epsilon, k=1)))
    if duplicates:
        logger.warning(f"{duplicates} near-duplicate pair(s) capped at 1/epsilon")

    return SimilarityMatrix(values=values, kind=SimilarityKind.INVERSE_EUCLIDEAN)


def angular_distance(s: SimilarityMatrix) -> AngularDistanceMatrix:
    """
    sqrt((1 - cos) / 2), which equals |sin(theta / 2)|; maximum distance is 1
    """
    if s.kind is not SimilarityKind.COSINE:
        raise MetricError(
            f"angular distance needs a cosine similarity matrix, got {s.kind.value}",
            kind=s.kind.value,
        )
    values = np.sqrt(np.clip((1.0 - s.values) / 2.0, 0.0, 1.0))
    np.fill_diagonal(values, 0.0)
    return AngularDistanceMatrix(values=values)


def compute_similarity(d: Dataset, metric: str, epsilon: float = DISTANCE_EPSILON) -> SimilarityMatrix:
    """Dispatch on the CLI metric name ("cosine" or "inv-euclid")"""
    kind = METRICS.get(metric)
    if kind is None:
        raise MetricError(f"unknown metric {metric!r}", metric=metric)
    if kind is SimilarityKind.COSINE:
        return cosine_similarity(d)
    return inverse_euclidean(d, epsilon=epsilon)
