"""
Truncated SVD denoising

The data matrix is decomposed in the orientation Y = data.T (series as
columns), so u spans feature space (m x r) and v spans sample space (n x r).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..data.dataset_io import Dataset
from ..utils.errors import DecompositionError, RankError
from ..utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_RANK = 5
# use the Gram-matrix route once features outnumber samples by this factor
GRAM_RATIO = 8


@dataclass(frozen=True)
class TruncatedBasis:
    """Leading singular triplets of Y = data.T"""
    u: np.ndarray  # m x r
    s: np.ndarray  # r, descending
    v: np.ndarray  # n x r

    @property
    def rank(self) -> int:
        return self.s.shape[0]


def truncated_svd(d: Dataset, rank: int, gram_ratio: int = GRAM_RATIO) -> TruncatedBasis:
    """
    Top-``rank`` SVD factors of the data matrix

    Args:
        d: dataset (samples as rows)
        rank: truncation rank, 1 <= rank <= min(n, m)
        gram_ratio: m/n ratio above which the n x n Gram matrix is decomposed
            instead of the full matrix

    Returns:
        TruncatedBasis with the sign of each pair fixed so that the
        largest-magnitude entry of u is positive
    """
    n, m = d.n, d.m
    if not isinstance(rank, (int, np.integer)) or not 1 <= rank <= min(n, m):
        raise RankError(f"rank {rank} outside [1, {min(n, m)}]", rank=rank, n=n, m=m)

    if m >= gram_ratio * n:
        u, s, v = _gram_svd(d.data, rank)
    else:
        u, s, v = _direct_svd(d.data, rank)

    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(s)) and np.all(np.isfinite(v))):
        raise DecompositionError("SVD produced non-finite factors", rank=rank)

    u, v = _fix_signs(u, v)
    s = np.maximum(s, 0.0)
    logger.debug(f"Truncated SVD rank {rank}: leading singular values {s[:min(rank, 5)]}")
    return TruncatedBasis(u=u, s=s, v=v)


def _direct_svd(data: np.ndarray, rank: int):
    y = data.T
    try:
        u, s, vt = scipy.linalg.svd(y, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        logger.warning("gesdd did not converge, retrying with gesvd")
        try:
            u, s, vt = scipy.linalg.svd(y, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as e:
            raise DecompositionError(f"SVD did not converge: {e}") from e
    return u[:, :rank], s[:rank], vt[:rank].T


def _gram_svd(data: np.ndarray, rank: int):
    """
    Thin SVD for wide data without forming anything m x m

    Leading eigenvectors of the n x n Gram matrix give the sample-space
    subspace; a small SVD of the projected m x r block then yields orthonormal
    u and accurate singular values.
    """
    gram = data @ data.T
    try:
        evals, evecs = scipy.linalg.eigh(gram)
    except np.linalg.LinAlgError as e:
        raise DecompositionError(f"Gram eigendecomposition did not converge: {e}") from e

    order = np.argsort(evals)[::-1][:rank]
    v_sub = evecs[:, order]
    block = data.T @ v_sub  # m x r
    try:
        u, s, wt = scipy.linalg.svd(block, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise DecompositionError(f"SVD of projected block did not converge: {e}") from e
    v = v_sub @ wt.T
    return u, s, v


def _fix_signs(u: np.ndarray, v: np.ndarray):
    pivots = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[pivots, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs, v * signs


def reconstruct(basis: TruncatedBasis) -> np.ndarray:
    """Rank-r approximation in row orientation (n x m)"""
    return (basis.v * basis.s) @ basis.u.T


def denoise(d: Dataset, rank: int = DEFAULT_RANK, gram_ratio: int = GRAM_RATIO) -> Dataset:
    """
    Replace the data by its rank-``rank`` approximation

    Labels and frame shape are carried through unchanged.
    """
    basis = truncated_svd(d, rank, gram_ratio=gram_ratio)
    logger.info(f"Denoised {d.n}x{d.m} data to rank {basis.rank}")
    return d.with_data(reconstruct(basis))


def singular_values(d: Dataset, gram_ratio: int = GRAM_RATIO) -> np.ndarray:
    """Full singular spectrum, descending (for --dump-spectrum)"""
    if d.m >= gram_ratio * d.n:
        evals = scipy.linalg.eigvalsh(d.data @ d.data.T)
        return np.sqrt(np.clip(evals[::-1], 0.0, None))
    try:
        return scipy.linalg.svdvals(d.data)
    except np.linalg.LinAlgError as e:
        raise DecompositionError(f"SVD did not converge: {e}") from e
