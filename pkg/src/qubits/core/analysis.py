"""
Turning solver output into clusters and judging them

Decoding with outlier semantics, ensemble averaging over the original data,
RMSE against labelled classes and classical MDS of angular distances.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..data.dataset_io import Dataset
from ..utils.errors import EmbeddingError, MatchingError, ModelError
from ..utils.logger import get_logger
from .qubo import EnergyBreakdown
from .similarity import AngularDistanceMatrix, SimilarityMatrix

logger = get_logger(__name__)

OUTLIER = -1


class AssignmentSource(Enum):
    QUBO = "qubo"
    KMEANS = "kmeans"


@dataclass
class Assignment:
    """Final cluster of every point; OUTLIER for points the solver left out"""
    cluster_of: np.ndarray
    k: int
    source: AssignmentSource = AssignmentSource.QUBO
    # (point, discarded cluster ids) for points that had several bits set
    repaired: List[Tuple[int, Tuple[int, ...]]] = field(default_factory=list)

    def __post_init__(self):
        self.cluster_of = np.asarray(self.cluster_of, dtype=np.int64)
        if np.any((self.cluster_of < OUTLIER) | (self.cluster_of >= self.k)):
            raise ModelError("cluster id out of range", k=self.k)
        if self.source is not AssignmentSource.QUBO and np.any(self.cluster_of == OUTLIER):
            raise ModelError(f"{self.source.value} assignments cannot contain outliers")

    @property
    def n(self) -> int:
        return self.cluster_of.shape[0]

    @property
    def outlier_count(self) -> int:
        return int(np.count_nonzero(self.cluster_of == OUTLIER))

    def sizes(self) -> np.ndarray:
        inliers = self.cluster_of[self.cluster_of != OUTLIER]
        return np.bincount(inliers, minlength=self.k)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "source": self.source.value,
            "k": self.k,
            "cluster_of": self.cluster_of.tolist(),
            "repaired": [
                {"point": point, "discarded": list(discarded)}
                for point, discarded in self.repaired
            ],
        }


@dataclass
class ClusterReport:
    """Per-cluster summary; absent means are NaN rows with mean_present False"""
    assignment: Assignment
    sizes: np.ndarray
    means: np.ndarray
    mean_present: np.ndarray
    outlier_count: int
    energy: Optional[EnergyBreakdown] = None
    rmse: Optional[Dict[int, Optional[float]]] = None
    matching: Optional[Dict[int, int]] = None
    mds: Optional[np.ndarray] = None
    minima: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "sizes": self.sizes.tolist(),
            "outlier_count": self.outlier_count,
            "mean_present": self.mean_present.tolist(),
            "energy": self.energy.to_dict() if self.energy else None,
            "rmse": {str(c): v for c, v in self.rmse.items()} if self.rmse is not None else None,
            "matching": {str(c): v for c, v in self.matching.items()} if self.matching is not None else None,
            "minima": self.minima,
        }
        if self.mds is not None:
            data["mds"] = self.mds.tolist()
        return data


def decode(bits, n: int, k: int,
           similarity: Union[SimilarityMatrix, np.ndarray, None] = None) -> Assignment:
    """
    Read cluster membership off a bitstring (v = c*n + i)

    One set bit assigns the point, none makes it an OUTLIER, several are
    repaired to the cluster c maximizing the similarity sum to the points
    assigned cleanly to c (ties to the lowest id).
    """
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.shape[0] != n * k:
        raise ModelError(f"bitstring length {bits.size} does not match n*k = {n * k}",
                         length=int(bits.size), n=n, k=k)
    grid = bits.reshape(k, n).astype(bool)
    counts = grid.sum(axis=0)

    cluster_of = np.full(n, OUTLIER, dtype=np.int64)
    clean = counts == 1
    cluster_of[clean] = np.argmax(grid[:, clean], axis=0)

    multi = np.flatnonzero(counts > 1)
    repaired = []
    if multi.size:
        if similarity is None:
            values = np.zeros((n, n))
        else:
            values = similarity.values if isinstance(similarity, SimilarityMatrix) else np.asarray(similarity)
        clean_ids = np.where(clean, cluster_of, OUTLIER)
        for i in multi:
            candidates = np.flatnonzero(grid[:, i])
            scores = [values[i, clean_ids == c].sum() for c in candidates]
            chosen = int(candidates[int(np.argmax(scores))])
            cluster_of[i] = chosen
            repaired.append((int(i), tuple(int(c) for c in candidates if c != chosen)))
        logger.warning(f"{len(repaired)} multi-assigned point(s) repaired by similarity sum")

    return Assignment(cluster_of=cluster_of, k=k, source=AssignmentSource.QUBO, repaired=repaired)


def encode(a: Assignment) -> np.ndarray:
    """Bitstring of an assignment; outliers get no bit"""
    bits = np.zeros(a.k * a.n, dtype=np.int8)
    points = np.flatnonzero(a.cluster_of != OUTLIER)
    bits[a.cluster_of[points] * a.n + points] = 1
    return bits


def assignment_from_labels(labels, k: int,
                           source: AssignmentSource = AssignmentSource.KMEANS) -> Assignment:
    return Assignment(cluster_of=np.asarray(labels, dtype=np.int64), k=k, source=source)


def ensemble_average(d: Dataset, a: Assignment) -> ClusterReport:
    """Per-cluster means over the rows of ``d``, outliers excluded"""
    if a.n != d.n:
        raise ModelError(f"assignment covers {a.n} points, dataset has {d.n}", n=d.n)

    inliers = np.flatnonzero(a.cluster_of != OUTLIER)
    sums = np.zeros((a.k, d.m))
    np.add.at(sums, a.cluster_of[inliers], d.data[inliers])
    sizes = a.sizes()
    present = sizes > 0

    means = np.full((a.k, d.m), np.nan)
    means[present] = sums[present] / sizes[present, None]
    if not np.all(present):
        logger.warning(f"empty cluster(s) {np.flatnonzero(~present).tolist()} have no mean")

    return ClusterReport(
        assignment=a,
        sizes=sizes,
        means=means,
        mean_present=present,
        outlier_count=a.outlier_count,
    )


def contingency_table(a: Assignment, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(clusters x classes overlap counts over inliers, sorted class labels)"""
    classes = np.unique(labels)
    class_index = np.searchsorted(classes, labels)
    inliers = a.cluster_of != OUTLIER
    table = np.zeros((a.k, classes.size), dtype=np.int64)
    np.add.at(table, (a.cluster_of[inliers], class_index[inliers]), 1)
    return table, classes


def match_clusters(a: Assignment, labels: np.ndarray) -> Dict[int, int]:
    """One-to-one cluster -> class label matching with maximum total overlap"""
    table, classes = contingency_table(a, labels)
    if classes.size != a.k:
        raise MatchingError(
            f"{a.k} clusters cannot be matched to {classes.size} classes",
            clusters=a.k, classes=int(classes.size),
        )
    rows, cols = linear_sum_assignment(table, maximize=True)
    return {int(c): int(classes[j]) for c, j in zip(rows, cols)}


def rmse(report: ClusterReport, d: Dataset) -> Dict[int, Optional[float]]:
    """
    RMSE between each cluster mean and the mean of its matched class

    Returns:
        class label -> RMSE (None when the matched cluster is empty)
    """
    if not d.has_labels:
        raise MatchingError("RMSE needs labelled data")
    matching = match_clusters(report.assignment, d.labels)
    report.matching = matching

    errors: Dict[int, Optional[float]] = {}
    for cluster, label in matching.items():
        if not report.mean_present[cluster]:
            errors[label] = None
            continue
        class_mean = d.data[d.labels == label].mean(axis=0)
        errors[label] = float(np.sqrt(np.mean((report.means[cluster] - class_mean) ** 2)))

    report.rmse = dict(sorted(errors.items()))
    return report.rmse


def classical_mds(dist: Union[AngularDistanceMatrix, np.ndarray], n_components: int = 2) -> np.ndarray:
    """
    Torgerson MDS: double-centre the squared distances, keep the top eigenpairs

    A non-positive leading eigenvalue means no usable geometry; later axes
    with non-positive eigenvalues are returned as zeros. Each axis is signed
    so that its largest-magnitude coordinate is positive.
    """
    values = dist.values if isinstance(dist, AngularDistanceMatrix) else np.asarray(dist, dtype=np.float64)
    n = values.shape[0]
    centering = np.eye(n) - np.ones((n, n)) / n
    b = -centering @ (values ** 2) @ centering / 2.0
    b = 0.5 * (b + b.T)

    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1][:n_components]
    evals, evecs = evals[order], evecs[:, order]

    tolerance = 1e-12 * max(1.0, float(np.max(np.abs(evals), initial=0.0)))
    if evals.size == 0 or evals[0] <= tolerance:
        raise EmbeddingError("distance matrix has no positive MDS eigenvalue",
                             eigenvalues=evals.tolist())

    coords = np.zeros((n, n_components))
    for j, (value, vector) in enumerate(zip(evals, evecs.T)):
        if value <= tolerance:
            logger.debug(f"MDS axis {j} has eigenvalue {value:.3e}; set to zero")
            continue
        pivot = int(np.argmax(np.abs(vector)))
        sign = 1.0 if vector[pivot] >= 0 else -1.0
        coords[:, j] = sign * vector * np.sqrt(value)
    return coords


def cluster_minima(report: ClusterReport) -> Dict[str, Any]:
    """Minimum of every cluster mean, with mean and std across clusters"""
    per_cluster = [
        float(np.min(report.means[c])) if report.mean_present[c] else None
        for c in range(report.means.shape[0])
    ]
    present = np.array([v for v in per_cluster if v is not None])
    summary = {
        "per_cluster": per_cluster,
        "mean": float(present.mean()) if present.size else None,
        "std": float(present.std()) if present.size else None,
    }
    report.minima = summary
    return summary
