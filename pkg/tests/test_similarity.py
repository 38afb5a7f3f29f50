"""
Tests for similarity matrices and the angular distance
"""

import numpy as np
import pytest

from qubits.core.similarity import (
    SimilarityKind,
    SimilarityMatrix,
    angular_distance,
    compute_similarity,
    cosine_similarity,
    inverse_euclidean,
)
from qubits.data.dataset_io import Dataset
from qubits.utils.errors import MetricError


def _cos(a, b):
    return cosine_similarity(Dataset(data=[a, b])).values[0, 1]


class TestCosine:
    def test_parallel(self):
        assert _cos([1.0, 0.0], [2.0, 0.0]) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert _cos([1.0, 0.0], [0.0, 3.0]) == pytest.approx(0.0, abs=1e-12)

    def test_antiparallel(self):
        assert _cos([1.0, 1.0], [-1.0, -1.0]) == pytest.approx(-1.0, abs=1e-12)

    def test_zero_norm_row(self):
        with pytest.raises(MetricError) as info:
            cosine_similarity(Dataset(data=[[1.0, 2.0], [0.0, 0.0], [3.0, 1.0]]))
        assert info.value.details["row"] == 1

    def test_symmetric_bounded_zero_diagonal(self, rng):
        s = cosine_similarity(Dataset(data=rng.normal(size=(12, 7))))
        np.testing.assert_allclose(s.values, s.values.T, atol=1e-12)
        assert np.all(np.abs(s.values) <= 1.0)
        np.testing.assert_array_equal(np.diag(s.values), 0.0)
        assert s.kind is SimilarityKind.COSINE

    @pytest.mark.parametrize("scale", [1e-3, 0.5, 7.0, 1e4])
    def test_scale_invariance(self, rng, scale):
        data = rng.normal(size=(8, 5))
        base = cosine_similarity(Dataset(data=data)).values
        scaled = cosine_similarity(Dataset(data=scale * data)).values
        np.testing.assert_allclose(scaled, base, atol=1e-12)

    def test_permutation_equivariance(self, rng):
        data = rng.normal(size=(9, 4))
        perm = rng.permutation(9)
        base = cosine_similarity(Dataset(data=data)).values
        permuted = cosine_similarity(Dataset(data=data[perm])).values
        np.testing.assert_allclose(permuted, base[np.ix_(perm, perm)], atol=1e-12)


class TestInverseEuclidean:
    def test_three_four_five(self):
        s = inverse_euclidean(Dataset(data=[[0.0, 0.0], [3.0, 4.0]]))
        assert s.values[0, 1] == pytest.approx(0.2, abs=1e-15)

    def test_duplicates_capped(self):
        s = inverse_euclidean(Dataset(data=[[1.0, 2.0], [1.0, 2.0]]))
        assert s.values[0, 1] == pytest.approx(1e9)
        assert np.all(np.isfinite(s.values))

    def test_matches_double_loop(self, rng):
        data = rng.normal(size=(10, 5))
        s = inverse_euclidean(Dataset(data=data))
        for i in range(10):
            for j in range(10):
                if i == j:
                    assert s.values[i, j] == 0.0
                else:
                    expected = 1.0 / np.sqrt(np.sum((data[i] - data[j]) ** 2))
                    assert abs(s.values[i, j] - expected) <= 1e-12 * max(1.0, expected)

    def test_positive_off_diagonal(self, rng):
        s = inverse_euclidean(Dataset(data=rng.normal(size=(6, 3))))
        assert np.all(s.off_diagonal() > 0)
        assert s.kind is SimilarityKind.INVERSE_EUCLIDEAN


class TestAngularDistance:
    @pytest.mark.parametrize("cos, expected", [(1.0, 0.0), (-1.0, 1.0), (0.0, np.sqrt(0.5))])
    def test_known_values(self, cos, expected):
        s = SimilarityMatrix(values=np.array([[0.0, cos], [cos, 0.0]]), kind=SimilarityKind.COSINE)
        assert angular_distance(s).values[0, 1] == pytest.approx(expected, abs=1e-12)

    def test_half_angle_identity(self, rng):
        cos = rng.uniform(-1.0, 1.0, size=1000)
        values = np.zeros((1001, 1001))
        values[0, 1:] = cos
        values[1:, 0] = cos
        dist = angular_distance(SimilarityMatrix(values=values, kind=SimilarityKind.COSINE)).values[0, 1:]
        np.testing.assert_allclose((cos + 1.0) / 2.0, 1.0 - dist ** 2, atol=1e-12)
        theta = np.arccos(cos)
        np.testing.assert_allclose(dist, np.abs(np.sin(theta / 2.0)), atol=1e-12)

    def test_diagonal_and_bounds(self, rng):
        dist = angular_distance(cosine_similarity(Dataset(data=rng.normal(size=(7, 4))))).values
        np.testing.assert_array_equal(np.diag(dist), 0.0)
        assert np.all(dist <= 1.0)
        np.testing.assert_allclose(dist, dist.T, atol=1e-12)

    def test_needs_cosine(self, rng):
        with pytest.raises(MetricError):
            angular_distance(inverse_euclidean(Dataset(data=rng.normal(size=(3, 2)))))


def test_compute_similarity_dispatch(rng):
    d = Dataset(data=rng.normal(size=(4, 3)))
    assert compute_similarity(d, "cosine").kind is SimilarityKind.COSINE
    assert compute_similarity(d, "inv-euclid").kind is SimilarityKind.INVERSE_EUCLIDEAN
    with pytest.raises(MetricError):
        compute_similarity(d, "manhattan")
