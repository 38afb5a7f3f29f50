"""
Report comparison and the phase-overlap diagnostic
"""

from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..core.analysis import OUTLIER, Assignment, AssignmentSource
from ..utils.errors import DiagnosticError, DigestMismatchError
from ..utils.logger import get_logger

logger = get_logger(__name__)

TWO_PI = 2.0 * np.pi
RADIUS_BAND = 0.25


def covering_arc(angles: np.ndarray) -> Tuple[float, float]:
    """
    Shortest arc (start, length) containing every angle

    It is the complement of the largest gap between circularly sorted angles.
    """
    ordered = np.sort(np.mod(angles, TWO_PI))
    if ordered.size == 1:
        return float(ordered[0]), 0.0
    gaps = np.diff(np.append(ordered, ordered[0] + TWO_PI))
    widest = int(np.argmax(gaps))
    start = ordered[(widest + 1) % ordered.size]
    return float(start), float(TWO_PI - gaps[widest])


def arc_intersection(a: Tuple[float, float], b: Tuple[float, float]) -> float:
    """Length of the intersection of two arcs given as (start, length)"""
    a_start, a_len = a
    b_start, b_len = b
    shift = np.mod(b_start - a_start, TWO_PI)
    total = 0.0
    for lo in (shift, shift - TWO_PI):
        total += max(0.0, min(a_len, lo + b_len) - max(0.0, lo))
    return float(total)


def inlier_mask(mds: np.ndarray, a: Assignment) -> np.ndarray:
    """Assigned points whose radius is within 25% of the median radius"""
    radii = np.linalg.norm(mds[:, :2], axis=1)
    assigned = a.cluster_of != OUTLIER
    if not np.any(assigned):
        return assigned
    median = float(np.median(radii[assigned]))
    return assigned & (np.abs(radii - median) <= RADIUS_BAND * median)


def overlap_diagnostic(mds: np.ndarray, a: Assignment) -> float:
    """
    Total pairwise overlap of the clusters' angular ranges, divided by 2*pi

    0 means the clusters occupy disjoint phase sectors. Capped at 1.
    """
    mds = np.asarray(mds, dtype=np.float64)
    if mds.ndim != 2 or mds.shape[0] != a.n or mds.shape[1] < 2:
        raise DiagnosticError("MDS coordinates do not match the assignment",
                              shape=list(mds.shape), n=a.n)

    inliers = inlier_mask(mds, a)
    angles = np.arctan2(mds[:, 1], mds[:, 0])
    arcs = []
    for c in range(a.k):
        members = inliers & (a.cluster_of == c)
        if np.any(members):
            arcs.append(covering_arc(angles[members]))

    if len(arcs) < 2:
        raise DiagnosticError(f"overlap needs at least 2 clusters with inliers, found {len(arcs)}",
                              clusters=len(arcs))

    total = sum(
        arc_intersection(arcs[i], arcs[j])
        for i in range(len(arcs)) for j in range(i + 1, len(arcs))
    )
    return float(min(1.0, total / TWO_PI))


def _assignment_from_report(report: Mapping[str, Any]) -> Optional[Assignment]:
    data = report.get("assignment")
    if not data:
        return None
    return Assignment(
        cluster_of=np.asarray(data["cluster_of"], dtype=np.int64),
        k=int(data["k"]),
        source=AssignmentSource(data.get("source", "qubo")),
    )


def report_overlap(report: Mapping[str, Any]) -> Optional[float]:
    """Overlap recomputed from a report's MDS coordinates, if it has them"""
    mds = (report.get("clusters") or {}).get("mds")
    assignment = _assignment_from_report(report)
    if mds is None or assignment is None:
        return report.get("overlap")
    try:
        return overlap_diagnostic(np.asarray(mds), assignment)
    except DiagnosticError as e:
        logger.warning(f"overlap not available: {e}")
        return None


def _delta(a, b):
    if a is None or b is None:
        return None
    return b - a


def run_eval(report_a: Mapping[str, Any], report_b: Mapping[str, Any]) -> Dict[str, Any]:
    """
    Side-by-side comparison of two reports on the same dataset

    Deltas are b - a.
    """
    digest_a, digest_b = report_a.get("dataset_digest"), report_b.get("dataset_digest")
    if digest_a != digest_b:
        raise DigestMismatchError("reports refer to different datasets",
                                  digest_a=digest_a, digest_b=digest_b)

    clusters_a = report_a.get("clusters") or {}
    clusters_b = report_b.get("clusters") or {}

    sizes = {
        "a": clusters_a.get("sizes"),
        "b": clusters_b.get("sizes"),
        "sorted_a": sorted(clusters_a.get("sizes") or [], reverse=True),
        "sorted_b": sorted(clusters_b.get("sizes") or [], reverse=True),
    }
    sizes["population_variance"] = {
        side: float(np.var(sizes[f"sorted_{side}"])) if sizes[f"sorted_{side}"] else None
        for side in ("a", "b")
    }

    rmse_a = clusters_a.get("rmse") or {}
    rmse_b = clusters_b.get("rmse") or {}
    rmse_rows: List[Dict[str, Any]] = []
    for label in sorted(set(rmse_a) | set(rmse_b), key=lambda text: int(text)):
        rmse_rows.append({
            "class": int(label),
            "a": rmse_a.get(label),
            "b": rmse_b.get(label),
            "delta": _delta(rmse_a.get(label), rmse_b.get(label)),
        })

    energy_a = clusters_a.get("energy") or {}
    energy_b = clusters_b.get("energy") or {}
    energy = {
        term: {"a": energy_a.get(term), "b": energy_b.get(term),
               "delta": _delta(energy_a.get(term), energy_b.get(term))}
        for term in ("similarity_term", "onehot_penalty", "balance_penalty", "total")
    }

    overlap_a, overlap_b = report_overlap(report_a), report_overlap(report_b)
    comparison = {
        "dataset_digest": digest_a,
        "kinds": {"a": report_a.get("kind"), "b": report_b.get("kind")},
        "sizes": sizes,
        "outlier_count": {
            "a": clusters_a.get("outlier_count"),
            "b": clusters_b.get("outlier_count"),
            "delta": _delta(clusters_a.get("outlier_count"), clusters_b.get("outlier_count")),
        },
        "rmse": rmse_rows,
        "energy": energy,
        "overlap": {"a": overlap_a, "b": overlap_b, "delta": _delta(overlap_a, overlap_b)},
    }
    logger.info(f"Compared reports on dataset {str(digest_a)[:12]}: overlap {overlap_a} vs {overlap_b}")
    return comparison
