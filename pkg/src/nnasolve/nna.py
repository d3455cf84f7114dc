"""Multiplicative fixed-point solver for nonnegative linear systems.

The pipeline is: shift (x, b) -> (x + t*1, b + t*A*1) so the right-hand side
is positive, rescale columns so the system is column-stochastic with a
probability right-hand side, then iterate the EM / Richardson-Lucy style
update

    x <- x * M^T (q / M x)

in rescaled coordinates, where M is column-stochastic and q is the rescaled
right-hand side.  Each step costs at most 4 * (nnz + m) flops, preserves
positivity and the simplex, and drives D(q, M x_n) monotonically down to its
infimum; on solvable systems the residual converges to zero.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, replace

import numpy as np

from . import metrics
from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NegativeInput,
    NonPositiveRhs,
    SingularMatrix,
    TooLargeForDense,
    UnshiftableRow,
    ZeroColumn,
    ZeroDenominator,
)
from .sparse import SparseMatrix, as_vector, column_sums, spmv, spmv_transpose

__all__ = [
    "NonnegativeSystem",
    "RateCertificate",
    "ShiftedSystem",
    "SolveReport",
    "SolveStatus",
    "SolverConfig",
    "default_tolerance",
    "nna_solve",
    "nna_step",
    "nna_step_counted",
    "rate_certificate",
    "rescale",
    "shift",
]

_KL_FLOOR = 1e-300  # guards relative-drop ratios once the divergence underflows
_MAX_AUTO_RETRIES = 6


class SolveStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    STAGNATED_MIN_KL = "stagnated_min_kl"
    BREAKDOWN = "breakdown"


@dataclass
class SolverConfig:
    """Knobs shared by all solvers.

    eps_tol None means the hybrid default 1e-8 * (1 + ||b||_2).  t_shift None
    selects the automatic positivity shift; any float >= 0 is used verbatim.
    Stagnation fires when the KL trace drops by a relative factor below
    stagnation_rel_delta for stagnation_window consecutive iterations while
    the residual is still above tolerance.
    """

    eps_tol: float | None = None
    t_shift: float | None = None
    max_iter: int = 100_000
    stagnation_window: int = 50
    stagnation_rel_delta: float = 1e-12

    def __post_init__(self):
        if self.eps_tol is not None and not self.eps_tol > 0.0:
            raise ValueError("eps_tol must be positive")
        if self.t_shift is not None and self.t_shift < 0.0:
            raise ValueError("t_shift must be nonnegative")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        if self.stagnation_window < 1:
            raise ValueError("stagnation_window must be at least 1")
        if not self.stagnation_rel_delta > 0.0:
            raise ValueError("stagnation_rel_delta must be positive")


@dataclass
class SolveReport:
    """Outcome of one solve: final iterate plus per-iteration traces.

    residual_trace[n] is ||A x_n - b||_2 on the original system and has
    length iterations + 1 (iterate 0 included).  kl_trace[n] is
    D(b_tilde, b_tilde_n) on the rescaled system; it is empty for solvers
    that do not track a divergence.  matvec_count counts products with the
    iteration matrix.
    """

    status: SolveStatus
    iterations: int
    x: np.ndarray
    residual_trace: np.ndarray
    kl_trace: np.ndarray
    elapsed_ns: int
    matvec_count: int = 0
    diagnostic: str | None = None


@dataclass
class NonnegativeSystem:
    """Column-stochastic rescaling of (A, b): a_tilde x_tilde = b_tilde.

    col_scale holds the original column sums and b_total the sum of b, the
    data needed to map simplex coordinates back: x_j = x_tilde_j * b_total / col_scale_j.
    """

    a_tilde: SparseMatrix
    b_tilde: np.ndarray
    col_scale: np.ndarray
    b_total: float

    def recover(self, x_tilde: np.ndarray) -> np.ndarray:
        return x_tilde * (self.b_total / self.col_scale)


@dataclass
class ShiftedSystem:
    """Positivity shift: solve A x_t = b_t with x_t = x + t*1, b_t = b + t*A*1."""

    t: float
    b_shifted: np.ndarray
    a_row_sums: np.ndarray


@dataclass
class RateCertificate:
    """Certified asymptotic contraction factor of the divergence to the fixed point.

    delta = min_j x_tilde*_j / (3 * ||a_tilde^{-1}||_1^2); once iterates are
    near the fixed point, D(x_tilde*, x_tilde_{n+1}) <= (1 - delta) * D(x_tilde*, x_tilde_n).
    """

    delta: float
    a_inv_norm1: float
    min_xstar: float


def default_tolerance(b) -> float:
    """Hybrid absolute/relative default stopping tolerance."""
    return 1e-8 * (1.0 + float(np.linalg.norm(b)))


def _require_nonnegative(A: SparseMatrix):
    if A.values.size and float(A.values.min()) < 0.0:
        raise NegativeEntry("matrix has negative entries; embed it first (general_solve)")


def rescale(A: SparseMatrix, b) -> NonnegativeSystem:
    """Rescale a nonnegative system to column-stochastic form with b on the simplex."""
    b = as_vector(b, "b")
    if b.shape != (A.nrows,):
        raise DimensionMismatch(f"b has length {b.size}, expected {A.nrows}")
    _require_nonnegative(A)
    s = A.col_sums
    zero = np.flatnonzero(s == 0.0)
    if zero.size:
        raise ZeroColumn(int(zero[0]))
    nonpos = np.flatnonzero(b <= 0.0)
    if nonpos.size:
        raise NonPositiveRhs(int(nonpos[0]))
    a_tilde = SparseMatrix(
        A.nrows, A.ncols, A.col_ptr, A.row_idx, A.values / s[A.entry_col]
    )
    b_total = float(b.sum())
    return NonnegativeSystem(a_tilde, b / b_total, s.copy(), b_total)


def shift(A: SparseMatrix, b, t: float | None = None) -> ShiftedSystem:
    """Shift (x, b) by t >= 0 so the right-hand side becomes positive.

    t=None picks the automatic value: zero when b is already positive, else
    twice the smallest shift that clears every row by a data-driven margin,
    doubled until b_t > 0 and t is at least the crude solution-scale estimate
    ||b||_1 / min_j a_(.j) (a proxy for keeping x + t*1 positive).
    """
    b = as_vector(b, "b")
    if b.shape != (A.nrows,):
        raise DimensionMismatch(f"b has length {b.size}, expected {A.nrows}")
    _require_nonnegative(A)
    row_sums = spmv(A, np.ones(A.ncols))
    if t is None:
        if np.all(b > 0.0):
            return ShiftedSystem(0.0, b.copy(), row_sums)
        stuck = np.flatnonzero((row_sums <= 0.0) & (b <= 0.0))
        if stuck.size:
            raise UnshiftableRow(int(stuck[0]))
        col_min = float(A.col_sums.min()) if A.ncols else 0.0
        if col_min <= 0.0:
            raise ZeroColumn(int(np.flatnonzero(A.col_sums == 0.0)[0]))
        eps_b = max(1.0, float(np.abs(b).max())) * 1e-3
        pos = row_sums > 0.0
        base = max(0.0, float(((eps_b - b[pos]) / row_sums[pos]).max()))
        t_val = 2.0 * base
        scale = float(np.abs(b).sum()) / col_min
        while not (np.all(b + t_val * row_sums > 0.0) and t_val >= scale):
            t_val *= 2.0
    else:
        t_val = float(t)
        if t_val < 0.0:
            raise NegativeInput("shift t must be nonnegative")
        b_t = b + t_val * row_sums
        bad = np.flatnonzero(b_t <= 0.0)
        if bad.size:
            i = int(bad[0])
            if row_sums[i] <= 0.0:
                raise UnshiftableRow(i)
            raise NonPositiveRhs(i, f"t={t_val} is too small to make b_t positive")
    return ShiftedSystem(t_val, b + t_val * row_sums, row_sums)


def _ratio_with_convention(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """b_i / (Mx)_i with 0/0 = 0; a positive numerator over zero is a breakdown."""
    zero = den == 0.0
    if np.any(zero):
        hot = np.flatnonzero(zero & (num > 0.0))
        if hot.size:
            raise ZeroDenominator(int(hot[0]))
        out = np.zeros_like(num)
        nz = ~zero
        out[nz] = num[nz] / den[nz]
        return out
    return num / den


def nna_step(system: NonnegativeSystem, x_n: np.ndarray) -> np.ndarray:
    """One multiplicative update x_{n+1} = x_n * a_tilde^T (b_tilde / a_tilde x_n).

    Expects x_n > 0 on the simplex (rescaled coordinates); the output stays
    there.  Costs at most 4 * (nnz + m) flops.
    """
    b_n = spmv(system.a_tilde, x_n)
    c_n = _ratio_with_convention(system.b_tilde, b_n)
    return x_n * spmv_transpose(system.a_tilde, c_n)


def nna_step_counted(system: NonnegativeSystem, x_n: np.ndarray) -> tuple[np.ndarray, int]:
    """Pure-Python twin of :func:`nna_step` that tallies every flop it performs.

    Returns (x_next, flops) where flops counts each multiply, add and divide.
    Slow; intended for instrumentation tests, not solving.
    """
    A = system.a_tilde
    m1, m2 = A.nrows, A.ncols
    ptr, rows, vals = A.col_ptr, A.row_idx, A.values
    bt = system.b_tilde
    flops = 0

    b_n = [0.0] * m1
    for j in range(m2):
        xj = x_n[j]
        for p in range(ptr[j], ptr[j + 1]):
            b_n[rows[p]] += vals[p] * xj
            flops += 2
    c = [0.0] * m1
    for i in range(m1):
        if b_n[i] == 0.0:
            if bt[i] > 0.0:
                raise ZeroDenominator(i)
            c[i] = 0.0
        else:
            c[i] = bt[i] / b_n[i]
            flops += 1
    x_next = [0.0] * m2
    for j in range(m2):
        s = 0.0
        for p in range(ptr[j], ptr[j + 1]):
            s += vals[p] * c[rows[p]]
            flops += 2
        x_next[j] = s * x_n[j]
        flops += 1
    return np.array(x_next), flops


def _breakdown(exc: Exception, b: np.ndarray, started: int) -> SolveReport:
    return SolveReport(
        status=SolveStatus.BREAKDOWN,
        iterations=0,
        x=np.full(b.shape, np.nan),
        residual_trace=np.empty(0),
        kl_trace=np.empty(0),
        elapsed_ns=time.perf_counter_ns() - started,
        diagnostic=f"{type(exc).__name__}: {exc}",
    )


def _check_rows_reachable(A: SparseMatrix, b_tilde: np.ndarray):
    occupancy = np.bincount(A.row_idx, minlength=A.nrows)
    empty = np.flatnonzero((occupancy == 0) & (b_tilde > 0.0))
    if empty.size:
        raise ZeroDenominator(int(empty[0]))


def _run_iteration(A, shifted, x0, cfg, eps, residual_fn):
    """Iterate from a fixed shift; returns a report without elapsed time filled in."""
    t = shifted.t
    system = rescale(A, shifted.b_shifted)
    _check_rows_reachable(A, system.b_tilde)

    x_start = np.ones(A.ncols) if x0 is None else as_vector(x0, "x0")
    if x_start.shape != (A.ncols,):
        raise DimensionMismatch(f"x0 has length {x_start.size}, expected {A.ncols}")
    x_t = x_start + t
    if np.any(x_t <= 0.0):
        raise NegativeInput("x0 + t*1 must be positive; raise t or choose x0 > 0")
    # iterate 0 is the shifted start exactly as given; the first update lands
    # on the probability simplex and every later iterate stays there
    xt = x_t * system.col_scale / system.b_total

    res_trace: list[float] = []
    kl_trace: list[float] = []
    matvecs = 0
    streak = 0
    prev_kl = None
    n = 0
    while True:
        b_n = spmv(system.a_tilde, xt)
        matvecs += 1
        if residual_fn is None:
            resid = system.b_total * float(np.linalg.norm(b_n - system.b_tilde))
        else:
            resid = float(residual_fn(system.recover(xt) - t))
        kl = metrics.kl_divergence(system.b_tilde, b_n)
        res_trace.append(resid)
        kl_trace.append(kl)
        if resid <= eps:
            status = SolveStatus.CONVERGED
            break
        if prev_kl is not None:
            drop = (prev_kl - kl) / max(prev_kl, _KL_FLOOR)
            streak = streak + 1 if drop < cfg.stagnation_rel_delta else 0
            if streak >= cfg.stagnation_window:
                status = SolveStatus.STAGNATED_MIN_KL
                break
        prev_kl = kl
        if n >= cfg.max_iter:
            status = SolveStatus.MAX_ITERATIONS
            break
        c_n = _ratio_with_convention(system.b_tilde, b_n)
        xt = xt * spmv_transpose(system.a_tilde, c_n)
        matvecs += 1
        n += 1

    return SolveReport(
        status=status,
        iterations=n,
        x=system.recover(xt) - t,
        residual_trace=np.asarray(res_trace),
        kl_trace=np.asarray(kl_trace),
        elapsed_ns=0,
        matvec_count=matvecs,
    )


def nna_solve(
    A: SparseMatrix,
    b,
    x0=None,
    cfg: SolverConfig | None = None,
    residual_fn=None,
) -> SolveReport:
    """Solve A x = b for nonnegative A by shift, rescale and multiplicative iteration.

    b may have any sign (the shift is applied internally); the returned x is
    un-shifted.  Terminates when ||A x_n - b||_2 <= eps_tol (converged), at
    max_iter, or when the divergence trace stagnates, which on systems with
    no solution signals arrival at the minimal-KL point.  When the automatic
    shift was engaged (some b_i <= 0) and the run stagnates, the shift is
    doubled and the solve retried a bounded number of times, keeping the best
    attempt; explicit t and positive-b runs are never retried.  Setup defects
    (zero column, unshiftable row, zero row with positive b) come back as a
    BREAKDOWN report carrying a diagnostic instead of an exception.

    residual_fn optionally replaces the traced/stopping residual; it receives
    the current iterate in original (un-shifted) coordinates.  Wrappers use
    it to report residuals of an outer system.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    started = time.perf_counter_ns()
    b_arr = as_vector(b, "b")
    eps = cfg.eps_tol if cfg.eps_tol is not None else default_tolerance(b_arr)
    _require_nonnegative(A)

    try:
        shifted = shift(A, b_arr, cfg.t_shift)
    except (ZeroColumn, UnshiftableRow) as exc:
        return _breakdown(exc, b_arr, started)

    auto = cfg.t_shift is None
    best = None
    attempt = 0
    while True:
        try:
            report = _run_iteration(A, shifted, x0, cfg, eps, residual_fn)
        except (ZeroColumn, ZeroDenominator, UnshiftableRow) as exc:
            return _breakdown(exc, b_arr, started)
        if best is None or report.residual_trace[-1] < best.residual_trace[-1]:
            best = report
        retry = (
            auto
            and shifted.t > 0.0
            and report.status is SolveStatus.STAGNATED_MIN_KL
            and attempt < _MAX_AUTO_RETRIES
        )
        if not retry:
            break
        attempt += 1
        t_next = 2.0 * shifted.t
        shifted = ShiftedSystem(t_next, b_arr + t_next * shifted.a_row_sums, shifted.a_row_sums)
    return replace(best, elapsed_ns=time.perf_counter_ns() - started)


def rate_certificate(A: SparseMatrix, x_star, dense_limit: int = 200) -> RateCertificate:
    """Contraction certificate delta = min_j x_tilde*_j / (3 ||a_tilde^{-1}||_1^2).

    Uses a dense inverse of the rescaled matrix, so it is restricted to small
    square systems; intended for test harnesses, not production paths.
    """
    if A.nrows != A.ncols:
        raise DimensionMismatch("rate_certificate requires a square matrix")
    if A.nrows > dense_limit:
        raise TooLargeForDense(f"m={A.nrows} exceeds the dense limit {dense_limit}")
    _require_nonnegative(A)
    x_star = as_vector(x_star, "x_star")
    if x_star.shape != (A.ncols,):
        raise DimensionMismatch("x_star length does not match the matrix")
    s = column_sums(A)
    zero = np.flatnonzero(s == 0.0)
    if zero.size:
        raise ZeroColumn(int(zero[0]))
    b = spmv(A, x_star)
    b_total = float(b.sum())
    if b_total <= 0.0:
        raise NonPositiveRhs(0, "A x_star must have positive total mass")
    x_tilde = x_star * s / b_total
    if np.any(x_tilde <= 0.0):
        raise NegativeInput("rescaled x_star must be strictly positive")
    dense = A.to_dense() / s[np.newaxis, :]
    try:
        inv = np.linalg.inv(dense)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc
    norm1 = float(np.abs(inv).sum(axis=0).max())
    min_x = float(x_tilde.min())
    return RateCertificate(delta=min_x / (3.0 * norm1 * norm1), a_inv_norm1=norm1, min_xstar=min_x)
