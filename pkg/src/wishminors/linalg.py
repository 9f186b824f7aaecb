"""Dense symmetric positive definite kernels.

Everything downstream works with log-determinants of leading principal
blocks and with iterated Schur complements, so this module centralises
the factorisation logic: one Cholesky per matrix, reused for
determinants, block eliminations, and quadratic forms.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite

__all__ = [
    "BlockPartition",
    "SpdMatrix",
    "SchurChain",
    "cholesky",
    "leading_logdets",
    "schur_complement",
    "schur_chain",
]

# Relative Frobenius tolerance for the L @ L.T reconstruction check on
# SpdMatrix construction.  LAPACK's dpotrf is backward stable, so a clean
# factorisation reconstructs to a few ulps; 1e-10 leaves headroom for
# condition numbers up to ~1e8 without passing garbage.
_RECONSTRUCT_TOL = 1e-10


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def cholesky(m) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive definite matrix.

    Parameters
    ----------
    m : array_like
        Square matrix, symmetric to the bit (no tolerance): callers that
        read matrices from files must symmetrise first.

    Returns
    -------
    numpy.ndarray
        Lower triangular ``L`` with ``L @ L.T == m``.

    Raises
    ------
    DimensionMismatch
        If ``m`` is not square.
    NotPositiveDefinite
        If ``m`` contains non-finite entries or any pivot fails.
    """
    a = _as_square(m)
    if not np.isfinite(a).all():
        raise NotPositiveDefinite("matrix has non-finite entries")
    if not np.array_equal(a, a.T):
        raise NotPositiveDefinite("matrix is not exactly symmetric")
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """A validated symmetric positive definite matrix with its factor.

    The Cholesky factor is computed once on construction and the
    reconstruction ``L @ L.T`` is checked against the entries to a
    relative Frobenius error of 1e-10.  Both arrays are read-only.
    """

    entries: np.ndarray
    chol: np.ndarray = field(repr=False)

    @classmethod
    def from_array(cls, m, symmetrize: bool = False) -> "SpdMatrix":
        """Validate and wrap ``m``; ``symmetrize`` averages with the transpose first."""
        a = _as_square(m).copy()
        if symmetrize:
            a = 0.5 * (a + a.T)
        low = cholesky(a)
        err = np.linalg.norm(low @ low.T - a)
        scale = max(np.linalg.norm(a), 1.0)
        if err > _RECONSTRUCT_TOL * scale:
            raise NotPositiveDefinite(
                f"factor reconstruction error {err / scale:.3e} exceeds {_RECONSTRUCT_TOL}"
            )
        a.setflags(write=False)
        low.setflags(write=False)
        return cls(entries=a, chol=low)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def logdet(self) -> float:
        return float(2.0 * np.sum(np.log(np.diag(self.chol))))


@dataclass(frozen=True)
class BlockPartition:
    """An ordered split of ``{1, ..., n}`` into contiguous blocks.

    ``sizes`` holds the block sizes (p_1, ..., p_d), all >= 1.  ``prefix``
    holds the cumulative sums (P_0, P_1, ..., P_d) with P_0 = 0, so block
    ``k`` (1-based) covers rows ``prefix[k-1]:prefix[k]``.
    """

    sizes: tuple[int, ...]
    prefix: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise DimensionMismatch("partition needs at least one block")
        if any(s < 1 for s in sizes):
            raise DimensionMismatch(f"block sizes must be >= 1, got {sizes}")
        object.__setattr__(self, "sizes", sizes)
        acc = [0]
        for s in sizes:
            acc.append(acc[-1] + s)
        object.__setattr__(self, "prefix", tuple(acc))

    @property
    def blocks(self) -> int:
        return len(self.sizes)

    @property
    def total(self) -> int:
        return self.prefix[-1]


def leading_logdets(m: SpdMatrix, partition: BlockPartition) -> np.ndarray:
    """log-determinants of the leading P_1, P_2, ..., P_d principal blocks.

    Since the Cholesky factor of a leading block of ``m`` is the leading
    block of ``m``'s factor, each value is a prefix sum of
    ``2 * log(diag(L))``; no refactorisation happens.
    """
    if partition.total != m.dim:
        raise DimensionMismatch(
            f"partition covers {partition.total} rows, matrix has {m.dim}"
        )
    csum = np.concatenate(([0.0], np.cumsum(2.0 * np.log(np.diag(m.chol)))))
    return csum[list(partition.prefix[1:])]


def schur_complement(m, k: int) -> np.ndarray:
    """Schur complement of the leading ``k x k`` block.

    Computes ``M22 - M21 @ inv(M11) @ M12`` via triangular solves against
    the Cholesky factor of ``M11``, then symmetrises the result exactly.

    Raises
    ------
    DimensionMismatch
        If ``k`` is not in ``[1, dim - 1]``.
    NotPositiveDefinite
        If the leading block is not positive definite.
    """
    a = m.entries if isinstance(m, SpdMatrix) else _as_square(m)
    n = a.shape[0]
    if not 1 <= k < n:
        raise DimensionMismatch(f"block size k={k} must satisfy 1 <= k < {n}")
    low = cholesky(np.ascontiguousarray(a[:k, :k]))
    w = solve_triangular(low, a[:k, k:], lower=True)
    s = a[k:, k:] - w.T @ w
    return 0.5 * (s + s.T)


@dataclass(frozen=True, eq=False)
class SchurChain:
    """The iterated Schur complements of a matrix along a partition.

    ``stages[k]`` is the matrix after eliminating the first ``k`` blocks
    (stage 0 is the original), so ``stages[k]`` has side P_d - P_k.  Each
    stage is symmetric positive definite and read-only.
    """

    partition: BlockPartition
    stages: tuple[np.ndarray, ...]

    def head_block(self, k: int) -> np.ndarray:
        """Top-left ``p_{k+1} x p_{k+1}`` block of stage ``k`` (0-based)."""
        size = self.partition.sizes[k]
        return self.stages[k][:size, :size]


def schur_chain(m: SpdMatrix, partition: BlockPartition) -> SchurChain:
    """Eliminate the partition's blocks in order, collecting every stage."""
    if partition.total != m.dim:
        raise DimensionMismatch(
            f"partition covers {partition.total} rows, matrix has {m.dim}"
        )
    stages = [np.array(m.entries)]
    for size in partition.sizes[:-1]:
        stages.append(schur_complement(stages[-1], size))
    for s in stages:
        s.setflags(write=False)
    return SchurChain(partition=partition, stages=tuple(stages))
