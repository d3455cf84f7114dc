"""Embedding of arbitrary-sign systems into nonnegative ones.

For each column of A holding a negative entry, one slack variable and one
tie equation x_j + x_slack = 0 are appended, giving a nonnegative block
system

    P = [[A_plus, A_minus_cols],    c = [b]
         [D,      I_J         ]]        [0]

with exactly nnz(A) + 2 J stored entries.  Any solution of P y = c restricts
to a solution of A x = b in its first m2 components.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch
from .nna import SolveReport, SolverConfig, nna_solve
from .sparse import SparseMatrix, as_vector, from_arrays, spmv

__all__ = ["EmbeddedSystem", "consistency_defect", "embed", "extract", "general_solve"]


@dataclass
class EmbeddedSystem:
    """The nonnegative system P y = c plus the bookkeeping to undo it.

    neg_cols lists (sorted) the original columns that contained a negative
    entry; J = len(neg_cols).  P is (m1 + J) x (m2 + J).
    """

    P: SparseMatrix
    c: np.ndarray
    neg_cols: np.ndarray
    J: int
    m1: int
    m2: int


def embed(A: SparseMatrix, b) -> EmbeddedSystem:
    """Build the minimal nonnegative embedding of (A, b).

    Only columns that actually contain a negative entry get a slack column;
    a nonnegative A comes back untouched (P is A, c is b, J = 0).
    """
    b = as_vector(b, "b")
    if b.shape != (A.nrows,):
        raise DimensionMismatch(f"b has length {b.size}, expected {A.nrows}")
    m1, m2 = A.nrows, A.ncols
    rows, cols, vals = A.triplets()
    neg = vals < 0.0
    neg_cols = np.unique(cols[neg])
    J = int(neg_cols.size)
    if J == 0:
        return EmbeddedSystem(P=A, c=b.copy(), neg_cols=neg_cols, J=0, m1=m1, m2=m2)

    slack = np.searchsorted(neg_cols, cols[neg])  # dense index of each negative's column
    arange_j = np.arange(J, dtype=np.int64)
    p_rows = np.concatenate([rows[~neg], rows[neg], m1 + arange_j, m1 + arange_j])
    p_cols = np.concatenate([cols[~neg], m2 + slack, neg_cols, m2 + arange_j])
    p_vals = np.concatenate([vals[~neg], -vals[neg], np.ones(J), np.ones(J)])
    P = from_arrays(m1 + J, m2 + J, p_rows, p_cols, p_vals)
    c = np.concatenate([b, np.zeros(J)])
    return EmbeddedSystem(P=P, c=c, neg_cols=neg_cols, J=J, m1=m1, m2=m2)


def extract(y, system: EmbeddedSystem) -> np.ndarray:
    """First m2 components of an embedded iterate: the original-system solution."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (system.m2 + system.J,):
        raise DimensionMismatch(f"y has length {y.size}, expected {system.m2 + system.J}")
    return y[: system.m2].copy()


def consistency_defect(y, system: EmbeddedSystem) -> float:
    """max_j |y_j + y_slack(j)| over the tied columns.

    At a true solution each slack equals the negated original component, so
    the defect vanishes; a large value after stagnation is the signal that
    the enlarged system stalled short of a solution.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (system.m2 + system.J,):
        raise DimensionMismatch(f"y has length {y.size}, expected {system.m2 + system.J}")
    if system.J == 0:
        return 0.0
    ties = y[system.neg_cols] + y[system.m2 + np.arange(system.J)]
    return float(np.abs(ties).max())


def general_solve(
    A: SparseMatrix,
    b,
    x0=None,
    cfg: SolverConfig | None = None,
) -> SolveReport:
    """Solve A x = b for arbitrary-sign A: embed, run the nonnegative solver, extract.

    With x0 given, the embedded start is (x0, -x0 restricted to the tied
    columns); the default start is all ones, which is already positive.  The
    report's residual trace and stopping test use the original system
    ||A x_n - b||_2, not the embedded one.
    """
    b = as_vector(b, "b")
    emb = embed(A, b)
    if emb.J == 0:
        return nna_solve(A, b, x0=x0, cfg=cfg)
    if x0 is None:
        y0 = np.ones(emb.m2 + emb.J)
    else:
        x0 = as_vector(x0, "x0")
        if x0.shape != (emb.m2,):
            raise DimensionMismatch(f"x0 has length {x0.size}, expected {emb.m2}")
        y0 = np.concatenate([x0, -x0[emb.neg_cols]])

    def original_residual(y):
        return float(np.linalg.norm(spmv(A, y[: emb.m2]) - b))

    report = nna_solve(emb.P, emb.c, x0=y0, cfg=cfg, residual_fn=original_residual)
    if report.x.shape == (emb.m2 + emb.J,):
        return replace(report, x=extract(report.x, emb))
    return report
