"""
Tests for the overlap diagnostic and report comparison
"""

import io

import numpy as np
import pytest
from rich.console import Console

from qubits.cli.evaluation import arc_intersection, covering_arc, overlap_diagnostic, run_eval
from qubits.cli.interface import ReportRenderer
from qubits.core.analysis import OUTLIER, Assignment
from qubits.utils.errors import DiagnosticError, DigestMismatchError


def _ring(angles, radius=0.5):
    angles = np.asarray(angles, dtype=float)
    return radius * np.column_stack([np.cos(angles), np.sin(angles)])


class TestArcs:
    def test_covering_arc_wraps_zero(self):
        start, length = covering_arc(np.array([6.0, 0.2, 0.1]))
        assert start == pytest.approx(6.0)
        assert length == pytest.approx(0.2 + 2 * np.pi - 6.0)

    def test_single_angle(self):
        assert covering_arc(np.array([1.0])) == (1.0, 0.0)

    def test_intersection(self):
        assert arc_intersection((0.0, 1.0), (0.5, 1.0)) == pytest.approx(0.5)
        assert arc_intersection((0.0, 1.0), (2.0, 1.0)) == 0.0
        # second arc wraps through zero
        assert arc_intersection((0.0, 1.0), (2 * np.pi - 0.25, 0.5)) == pytest.approx(0.25)


class TestOverlapDiagnostic:
    def test_disjoint_sectors(self):
        angles = np.linspace(0.0, 2 * np.pi, 36, endpoint=False)
        a = Assignment(cluster_of=np.repeat(np.arange(4), 9), k=4)
        assert overlap_diagnostic(_ring(angles), a) == 0.0

    def test_interleaved_clusters_overlap(self):
        angles = np.linspace(0.0, 2 * np.pi, 36, endpoint=False)
        a = Assignment(cluster_of=np.arange(36) % 2, k=2)
        assert overlap_diagnostic(_ring(angles), a) > 0.5

    def test_radial_outliers_ignored(self):
        angles = np.array([0.1, 0.2, 0.3, 2.0, 2.1, 2.2, 0.15])
        mds = _ring(angles)
        mds[-1] *= 3.0  # off the circle; counted, it would stretch cluster 1 over cluster 0
        a = Assignment(cluster_of=[0, 0, 0, 1, 1, 1, 1], k=2)
        assert overlap_diagnostic(mds, a) == 0.0

    def test_outlier_points_ignored(self):
        angles = np.array([0.1, 0.2, 2.0, 2.1, 1.0])
        a = Assignment(cluster_of=[0, 0, 1, 1, OUTLIER], k=2)
        assert overlap_diagnostic(_ring(angles), a) == 0.0

    def test_needs_two_clusters(self):
        a = Assignment(cluster_of=[0, 0, 0], k=2)
        with pytest.raises(DiagnosticError):
            overlap_diagnostic(_ring([0.1, 0.2, 0.3]), a)

    def test_shape_mismatch(self):
        with pytest.raises(DiagnosticError):
            overlap_diagnostic(np.zeros((2, 2)), Assignment(cluster_of=[0, 1, 1], k=2))


def _report(kind, sizes, rmse=None, digest="abc", outliers=0):
    return {
        "kind": kind,
        "dataset_digest": digest,
        "clusters": {"sizes": sizes, "outlier_count": outliers, "rmse": rmse, "energy": None},
        "overlap": None,
    }


class TestRunEval:
    def test_identical_reports(self):
        report = _report("qubo", [3, 3, 4], rmse={"0": 0.1, "1": 0.2})
        comparison = run_eval(report, report)
        assert [row["delta"] for row in comparison["rmse"]] == [0.0, 0.0]
        assert comparison["outlier_count"]["delta"] == 0
        assert comparison["sizes"]["sorted_a"] == [4, 3, 3]

    def test_deltas_are_b_minus_a(self):
        a = _report("qubo", [5, 5], rmse={"1": 0.013}, outliers=1)
        b = _report("kmeans", [8, 2], rmse={"1": 0.015})
        comparison = run_eval(a, b)
        assert comparison["rmse"][0]["delta"] == pytest.approx(0.002)
        assert comparison["outlier_count"]["delta"] == -1
        assert comparison["sizes"]["population_variance"] == {"a": 0.0, "b": 9.0}
        assert comparison["kinds"] == {"a": "qubo", "b": "kmeans"}

    def test_overlap_recomputed_from_mds(self):
        angles = np.linspace(0.0, 2 * np.pi, 12, endpoint=False)
        report = _report("qubo", [6, 6])
        report["clusters"]["mds"] = _ring(angles).tolist()
        report["assignment"] = {"cluster_of": (np.arange(12) // 6).tolist(), "k": 2, "source": "qubo"}
        comparison = run_eval(report, report)
        assert comparison["overlap"] == {"a": 0.0, "b": 0.0, "delta": 0.0}

    def test_digest_mismatch(self):
        with pytest.raises(DigestMismatchError):
            run_eval(_report("qubo", [1], digest="a"), _report("kmeans", [1], digest="b"))


def test_renderer_writes_comparison_table():
    buffer = io.StringIO()
    renderer = ReportRenderer(console=Console(file=buffer, width=120))
    a = _report("qubo", [5, 5], rmse={"1": 0.013})
    b = _report("kmeans", [8, 2], rmse={"1": 0.015})
    renderer.show_comparison(run_eval(a, b))
    renderer.show_run({**a, "n": 10, "k": 2, "lambda1": 30.0, "lambda2": 1.0})
    text = buffer.getvalue()
    assert "rmse class 1" in text
    assert "size variance" in text
    assert "qubits run" in text
