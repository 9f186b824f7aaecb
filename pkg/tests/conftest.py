"""Shared generators for the test suite."""
import numpy as np
import pytest

from wishminors import BlockPartition, SpdMatrix


def random_spd(rng, dim, cond=100.0, scale=1.0):
    """Random SPD matrix with eigenvalues geomspaced over [scale, cond*scale]."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eigs = np.geomspace(1.0, cond, dim) * scale
    a = (q * eigs) @ q.T
    return 0.5 * (a + a.T)


def random_spd_matrix(rng, dim, cond=100.0, scale=1.0) -> SpdMatrix:
    return SpdMatrix.from_array(random_spd(rng, dim, cond, scale))


def random_partition(rng, total, max_blocks=None) -> BlockPartition:
    """Uniformly random composition of ``total`` into at most max_blocks parts."""
    cap = total if max_blocks is None else min(total, max_blocks)
    d = int(rng.integers(1, cap + 1))
    if d == 1:
        return BlockPartition((total,))
    cuts = np.sort(rng.choice(np.arange(1, total), size=d - 1, replace=False))
    bounds = np.concatenate(([0], cuts, [total]))
    return BlockPartition(tuple(int(b - a) for a, b in zip(bounds[:-1], bounds[1:])))


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
