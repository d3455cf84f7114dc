"""Shared test helpers: dense <-> sparse bridges and instance generators."""

import numpy as np

from nnasolve import from_arrays


def sparse_of(dense):
    """SparseMatrix from a dense array, dropping zeros."""
    dense = np.asarray(dense, dtype=np.float64)
    rows, cols = np.nonzero(dense)
    return from_arrays(dense.shape[0], dense.shape[1], rows, cols, dense[rows, cols])


def identity(m):
    return sparse_of(np.eye(m))


def consistent_nonneg(rng, m, lo=0.0, hi=1.0):
    """Nonnegative dense system with known positive solution: returns (A, dense, x*, b)."""
    dense = rng.uniform(lo, hi, (m, m))
    x_star = rng.uniform(0.5, 1.5, m)
    b = dense @ x_star
    return sparse_of(dense), dense, x_star, b


def dominant_mixed(rng, m):
    """Strictly row-dominant matrix with mixed-sign off-diagonal entries."""
    dense = rng.uniform(-1.0, 1.0, (m, m))
    np.fill_diagonal(dense, 0.0)
    np.fill_diagonal(dense, np.abs(dense).sum(axis=1) + rng.uniform(0.5, 1.5, m))
    return dense


def spd_dominant(rng, m):
    """Symmetric strictly dominant matrix with positive diagonal (hence SPD)."""
    off = rng.uniform(-1.0, 1.0, (m, m))
    off = (off + off.T) / 2.0
    np.fill_diagonal(off, 0.0)
    dense = off.copy()
    np.fill_diagonal(dense, np.abs(off).sum(axis=1) + rng.uniform(0.5, 1.5, m))
    return dense
