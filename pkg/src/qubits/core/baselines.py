"""
Euclidean k-means with k-means++ seeding, the classical comparison method
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.spatial.distance import cdist

from ..data.dataset_io import Dataset
from ..utils.errors import InputError
from ..utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_MAX_ITER = 300


@dataclass
class KMeansResult:
    """Outcome of one k-means run"""
    assignments: np.ndarray  # length n, ids in [0, k)
    centroids: np.ndarray    # k x m
    inertia: float
    iterations: int
    seed: int = 0
    converged: bool = False
    inertia_trace: List[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _plusplus_seeding(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = data.shape[0]
    chosen = [int(rng.integers(0, n))]
    nearest = cdist(data, data[chosen], "sqeuclidean").ravel()

    for _ in range(1, k):
        total = nearest.sum()
        if total > 0:
            index = int(rng.choice(n, p=nearest / total))
        else:
            # every point coincides with a centroid already
            remaining = np.setdiff1d(np.arange(n), chosen)
            index = int(rng.choice(remaining))
        chosen.append(index)
        nearest = np.minimum(nearest, cdist(data, data[[index]], "sqeuclidean").ravel())

    return data[chosen].copy()


def _repair_empty(labels: np.ndarray, distances: np.ndarray, k: int) -> np.ndarray:
    """Give every empty cluster the point farthest from its own centroid"""
    labels = labels.copy()
    n = labels.shape[0]
    for c in range(k):
        counts = np.bincount(labels, minlength=k)
        if counts[c] > 0:
            continue
        own = distances[np.arange(n), labels]
        movable = counts[labels] > 1
        own = np.where(movable, own, -np.inf)
        donor = int(np.argmax(own))
        logger.debug(f"cluster {c} empty; reassigning point {donor} from cluster {labels[donor]}")
        labels[donor] = c
    return labels


def _centroids(data: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    sums = np.zeros((k, data.shape[1]))
    np.add.at(sums, labels, data)
    counts = np.bincount(labels, minlength=k)
    return sums / counts[:, None]


def _inertia(data: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    return float(np.sum((data - centroids[labels]) ** 2))


def kmeans_pp(d: Dataset, k: int, seed: int = 0, max_iter: int = DEFAULT_MAX_ITER) -> KMeansResult:
    """
    k-means++ seeding followed by Lloyd iterations

    Stops when an assignment step reproduces the previous assignment or after
    ``max_iter`` centroid updates. Deterministic for a given seed.
    """
    if k < 1 or k > d.n:
        raise InputError(f"k must be in [1, {d.n}], got {k}", k=k, n=d.n)
    if max_iter < 1:
        raise InputError(f"max_iter must be at least 1, got {max_iter}", max_iter=max_iter)

    data = d.data
    rng = np.random.default_rng(seed)
    centroids = _plusplus_seeding(data, k, rng)

    labels = None
    trace: List[float] = []
    converged = False
    for _ in range(max_iter):
        distances = cdist(data, centroids, "sqeuclidean")
        new_labels = _repair_empty(np.argmin(distances, axis=1), distances, k)
        if labels is not None and np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
        centroids = _centroids(data, labels, k)
        trace.append(_inertia(data, centroids, labels))

    logger.debug(
        f"k-means seed={seed}: inertia {trace[-1]:.6g} after {len(trace)} update(s), "
        f"converged={converged}"
    )
    return KMeansResult(
        assignments=labels,
        centroids=centroids,
        inertia=trace[-1],
        iterations=len(trace),
        seed=seed,
        converged=converged,
        inertia_trace=trace,
    )


def kmeans_best_of(d: Dataset, k: int, seed: int = 0, max_iter: int = DEFAULT_MAX_ITER,
                   n_init: int = 1) -> KMeansResult:
    """Lowest-inertia run over seeds seed, seed+1, ..., seed+n_init-1"""
    if n_init < 1:
        raise InputError(f"n_init must be at least 1, got {n_init}", n_init=n_init)

    best = None
    for offset in range(n_init):
        result = kmeans_pp(d, k, seed=seed + offset, max_iter=max_iter)
        if best is None or result.inertia < best.inertia:
            best = result

    logger.info(f"k-means (k={k}, n_init={n_init}): best inertia {best.inertia:.6g} from seed {best.seed}")
    return best
