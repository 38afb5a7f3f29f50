"""
Core package for qubits - denoising, similarity, QUBO model, solvers and analysis
"""

from .lowrank import TruncatedBasis, truncated_svd, denoise
from .similarity import (
    SimilarityKind,
    SimilarityMatrix,
    AngularDistanceMatrix,
    cosine_similarity,
    inverse_euclidean,
    angular_distance,
)
from .qubo import QuboModel, LambdaRegime, build, energy, energy_breakdown, auto_lambda
from .annealer import AnnealParams, SolveResult, solve, brute_force, default_params
from .baselines import KMeansResult, kmeans_pp, kmeans_best_of
from .analysis import (
    OUTLIER,
    Assignment,
    ClusterReport,
    decode,
    encode,
    ensemble_average,
    rmse,
    classical_mds,
)

__all__ = [
    'TruncatedBasis', 'truncated_svd', 'denoise',
    'SimilarityKind', 'SimilarityMatrix', 'AngularDistanceMatrix',
    'cosine_similarity', 'inverse_euclidean', 'angular_distance',
    'QuboModel', 'LambdaRegime', 'build', 'energy', 'energy_breakdown', 'auto_lambda',
    'AnnealParams', 'SolveResult', 'solve', 'brute_force', 'default_params',
    'KMeansResult', 'kmeans_pp', 'kmeans_best_of',
    'OUTLIER', 'Assignment', 'ClusterReport', 'decode', 'encode',
    'ensemble_average', 'rmse', 'classical_mds'
]
