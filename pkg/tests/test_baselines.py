import numpy as np
import pytest

from nnasolve import (
    Dominance,
    IndefiniteBreakdown,
    NotSquare,
    NotSymmetric,
    SolveStatus,
    SolverConfig,
    ZeroDiagonal,
    arnoldi_process,
    cg_solve,
    dominance_class,
    gauss_seidel_solve,
    gmres_restarted,
    is_symmetric,
    jacobi_solve,
    lanczos_process,
    minres_solve,
    normal_equation_solve,
)
from conftest import identity, sparse_of, spd_dominant


CFG = SolverConfig(eps_tol=1e-9, max_iter=10_000)


# ---------------------------------------------------------------------------
# Jacobi / Gauss-Seidel

def test_jacobi_identity_single_step():
    report = jacobi_solve(identity(3), [1.0, 2.0, 3.0], cfg=CFG)
    assert report.status is SolveStatus.CONVERGED
    assert report.iterations == 1
    assert np.allclose(report.x, [1.0, 2.0, 3.0])


def test_jacobi_dominant_matches_oracle():
    dense = np.array([[4.0, 1.0, 1.0], [1.0, 5.0, 2.0], [0.0, 1.0, 3.0]])
    b = np.array([6.0, 8.0, 4.0])
    report = jacobi_solve(sparse_of(dense), b, cfg=SolverConfig(eps_tol=1e-9))
    assert report.status is SolveStatus.CONVERGED
    assert np.abs(report.x - np.linalg.solve(dense, b)).max() <= 1e-8


def test_jacobi_zero_diagonal():
    with pytest.raises(ZeroDiagonal):
        jacobi_solve(sparse_of([[0.0, 1.0], [1.0, 0.0]]), [1.0, 1.0], cfg=CFG)


def test_jacobi_divergence_is_not_converged():
    report = jacobi_solve(
        sparse_of([[1.0, 3.0], [3.0, 1.0]]), [1.0, 1.0], cfg=SolverConfig(eps_tol=1e-9, max_iter=300)
    )
    assert report.status in (SolveStatus.MAX_ITERATIONS, SolveStatus.BREAKDOWN)


def test_gauss_seidel_identity_and_dominant():
    report = gauss_seidel_solve(identity(2), [1.0, -1.0], cfg=CFG)
    assert report.status is SolveStatus.CONVERGED and report.iterations == 1

    dense = np.array([[4.0, 1.0, 1.0], [1.0, 5.0, 2.0], [0.0, 1.0, 3.0]])
    b = np.array([6.0, 8.0, 4.0])
    gs = gauss_seidel_solve(sparse_of(dense), b, cfg=SolverConfig(eps_tol=1e-9))
    ja = jacobi_solve(sparse_of(dense), b, cfg=SolverConfig(eps_tol=1e-9))
    assert gs.status is SolveStatus.CONVERGED
    assert np.abs(gs.x - np.linalg.solve(dense, b)).max() <= 1e-8
    assert gs.iterations < ja.iterations


def test_gauss_seidel_spd_two_by_two():
    report = gauss_seidel_solve(sparse_of([[2.0, 1.0], [1.0, 2.0]]), [3.0, 3.0], cfg=CFG)
    assert report.status is SolveStatus.CONVERGED
    assert np.allclose(report.x, [1.0, 1.0], atol=1e-8)


# ---------------------------------------------------------------------------
# CG

def test_cg_identity_one_iteration():
    report = cg_solve(identity(4), [1.0, 2.0, 3.0, 4.0], cfg=CFG)
    assert report.status is SolveStatus.CONVERGED
    assert report.iterations == 1


def test_cg_spd_matches_oracle_in_m_steps():
    rng = np.random.default_rng(0)
    B = rng.uniform(-1, 1, (5, 5))
    dense = B.T @ B + np.eye(5)
    b = rng.uniform(-1, 1, 5)
    report = cg_solve(sparse_of(dense), b, cfg=SolverConfig(eps_tol=1e-8))
    assert report.status is SolveStatus.CONVERGED
    assert report.iterations <= 5 + 2  # exact-arithmetic bound plus float slack
    assert np.abs(report.x - np.linalg.solve(dense, b)).max() <= 1e-8


def test_cg_indefinite_breakdown():
    with pytest.raises(IndefiniteBreakdown):
        cg_solve(sparse_of([[1.0, 0.0], [0.0, -1.0]]), [1.0, 1.0], cfg=CFG)


def test_cg_requires_symmetry():
    with pytest.raises(NotSymmetric):
        cg_solve(sparse_of([[1.0, 2.0], [0.0, 1.0]]), [1.0, 1.0], cfg=CFG)
    report = cg_solve(
        sparse_of([[2.0, 1.0], [1.0, 2.0]]), [3.0, 3.0], cfg=CFG, assume_symmetric=True
    )
    assert report.status is SolveStatus.CONVERGED


def test_cg_directions_are_conjugate():
    # conjugacy is a finite-precision casualty on long runs; well-conditioned
    # instances that converge in well under m steps keep it observable at 1e-8
    rng = np.random.default_rng(1)
    for _ in range(5):
        m = int(rng.integers(10, 31))
        dense = spd_dominant(rng, m)
        directions = []
        cg_solve(sparse_of(dense), rng.uniform(-1, 1, m), cfg=SolverConfig(eps_tol=1e-10), directions_out=directions)
        P = np.column_stack(directions)
        gram = P.T @ dense @ P
        scale = np.sqrt(np.diag(gram))
        cosines = gram / np.outer(scale, scale)
        assert np.abs(cosines - np.diag(np.diag(cosines))).max() <= 1e-8


# ---------------------------------------------------------------------------
# GMRES / MINRES

def test_gmres_identity_happy_breakdown():
    report = gmres_restarted(identity(3), [1.0, 2.0, 3.0], k=5, cfg=CFG)
    assert report.status is SolveStatus.CONVERGED
    assert report.iterations == 1
    assert np.allclose(report.x, [1.0, 2.0, 3.0], atol=1e-9)


def test_gmres_positive_definite_nonsymmetric_small_k():
    rng = np.random.default_rng(2)
    sym = spd_dominant(rng, 10)
    skew = rng.uniform(-0.2, 0.2, (10, 10))
    dense = sym + (skew - skew.T)
    b = rng.uniform(-1, 1, 10)
    report = gmres_restarted(sparse_of(dense), b, k=2, cfg=SolverConfig(eps_tol=1e-9, max_iter=10_000))
    assert report.status is SolveStatus.CONVERGED
    assert np.abs(report.x - np.linalg.solve(dense, b)).max() <= 1e-7


def test_gmres_can_stagnate():
    report = gmres_restarted(
        sparse_of([[0.0, 1.0], [-1.0, 0.0]]), [1.0, 1.0], k=1, cfg=SolverConfig(eps_tol=1e-10, max_iter=25)
    )
    assert report.status is SolveStatus.MAX_ITERATIONS
    assert report.residual_trace[-1] == pytest.approx(report.residual_trace[0])


def test_arnoldi_orthonormal_basis():
    rng = np.random.default_rng(3)
    dense = rng.uniform(-1, 1, (60, 60))
    r0 = rng.uniform(-1, 1, 60)
    ws = arnoldi_process(sparse_of(dense), r0, 12, 1e-12)
    gram = ws.V.T @ ws.V
    assert np.abs(gram - np.eye(gram.shape[0])).max() <= 1e-8
    # Hessenberg structure: zero below the first subdiagonal
    H = ws.H
    for i in range(H.shape[0]):
        for j in range(H.shape[1]):
            if i > j + 1:
                assert H[i, j] == 0.0


def test_gmres_inner_least_squares_residual_nonincreasing():
    rng = np.random.default_rng(4)
    dense = rng.uniform(-1, 1, (30, 30))
    r0 = rng.uniform(-1, 1, 30)
    ws = arnoldi_process(sparse_of(dense), r0, 10, 1e-12)
    beta = np.linalg.norm(r0)
    resids = []
    for j in range(1, ws.H.shape[1] + 1):
        e1 = np.zeros(j + 1)
        e1[0] = beta
        H_j = ws.H[: j + 1, :j]
        y = np.linalg.lstsq(H_j, e1, rcond=None)[0]
        resids.append(np.linalg.norm(H_j @ y - e1))
    assert all(resids[i + 1] <= resids[i] + 1e-12 for i in range(len(resids) - 1))


def test_minres_identity_and_indefinite():
    report = minres_solve(identity(2), [1.0, 2.0], k=2, cfg=CFG)
    assert report.status is SolveStatus.CONVERGED

    report = minres_solve(sparse_of([[1.0, 0.0], [0.0, -1.0]]), [1.0, 1.0], k=2, cfg=CFG)
    assert report.status is SolveStatus.CONVERGED
    assert np.allclose(report.x, [1.0, -1.0], atol=1e-9)


def test_minres_requires_symmetry():
    with pytest.raises(NotSymmetric):
        minres_solve(sparse_of([[1.0, 2.0], [0.0, 1.0]]), [1.0, 1.0], k=2, cfg=CFG)


def test_minres_matches_gmres_per_restart_on_symmetric():
    rng = np.random.default_rng(5)
    dense = rng.uniform(-1, 1, (20, 20))
    dense = (dense + dense.T) / 2 + 0.5 * np.eye(20)
    A = sparse_of(dense)
    b = rng.uniform(-1, 1, 20)
    for restarts in (1, 2, 3):
        cfg = SolverConfig(eps_tol=1e-14, max_iter=restarts)
        xg = gmres_restarted(A, b, k=5, cfg=cfg).x
        xm = minres_solve(A, b, k=5, cfg=cfg).x
        assert np.abs(xg - xm).max() <= 1e-8


def test_lanczos_tridiagonal_matches_arnoldi_on_symmetric():
    rng = np.random.default_rng(6)
    dense = rng.uniform(-1, 1, (15, 15))
    dense = (dense + dense.T) / 2
    A = sparse_of(dense)
    r0 = rng.uniform(-1, 1, 15)
    ws = arnoldi_process(A, r0, 6, 1e-12)
    st = lanczos_process(A, r0, 6, 1e-12)
    assert np.allclose(st.alpha, np.diag(ws.H[:6, :6]), atol=1e-8)
    subdiag = [ws.H[i + 1, i] for i in range(5)]
    assert np.allclose(st.beta[:5], subdiag, atol=1e-8)


# ---------------------------------------------------------------------------
# normal equations

def test_normal_cg_identity_and_oracle():
    report = normal_equation_solve(identity(3), [1.0, 2.0, 3.0], cfg=CFG)
    assert report.status is SolveStatus.CONVERGED
    assert np.allclose(report.x, [1.0, 2.0, 3.0], atol=1e-9)

    rng = np.random.default_rng(7)
    dense = rng.uniform(-1, 1, (8, 8)) + 2.0 * np.eye(8)
    b = rng.uniform(-1, 1, 8)
    report = normal_equation_solve(sparse_of(dense), b, cfg=SolverConfig(eps_tol=1e-8, max_iter=50_000))
    assert report.status is SolveStatus.CONVERGED
    assert np.abs(report.x - np.linalg.solve(dense, b)).max() <= 1e-6


def test_normal_cg_slower_than_gmres_on_graded():
    rng = np.random.default_rng(8)
    m = 20
    dense = np.diag(np.logspace(0, 3, m)) + rng.uniform(-0.3, 0.3, (m, m))
    b = rng.uniform(-1, 1, m)
    eps = 1e-8 * (1 + float(np.linalg.norm(b)))
    cfg = SolverConfig(eps_tol=eps, max_iter=100_000)
    rn = normal_equation_solve(sparse_of(dense), b, cfg=cfg)
    rg = gmres_restarted(sparse_of(dense), b, k=m, cfg=SolverConfig(eps_tol=eps, max_iter=100))
    assert rn.status is SolveStatus.CONVERGED and rg.status is SolveStatus.CONVERGED
    assert rn.iterations > rg.matvec_count


# ---------------------------------------------------------------------------
# dominance classification

def test_dominance_examples():
    assert dominance_class(sparse_of([[4.0, 1.0], [1.0, 3.0]])).classification is Dominance.STRICTLY_DOMINANT
    weak = dominance_class(sparse_of([[1.0, 1.0], [1.0, 1.0]]))
    assert weak.classification is Dominance.WEAKLY_DOMINANT
    chain = dominance_class(sparse_of([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]]))
    assert chain.classification is Dominance.IRREDUCIBLY_DOMINANT
    assert chain.symmetric
    assert dominance_class(sparse_of([[1.0, 5.0], [0.0, 1.0]])).classification is Dominance.NOT_DOMINANT


def test_dominance_requires_square():
    with pytest.raises(NotSquare):
        dominance_class(sparse_of(np.ones((2, 3))))


def test_strong_connectivity_against_scipy():
    scipy_sparse = pytest.importorskip("scipy.sparse")
    from scipy.sparse.csgraph import connected_components

    from nnasolve.baselines import _strongly_connected

    rng = np.random.default_rng(9)
    for _ in range(25):
        m = int(rng.integers(1, 12))
        dense = (rng.uniform(0, 1, (m, m)) < 0.25).astype(float)
        A = sparse_of(dense)
        n, _ = connected_components(scipy_sparse.csr_matrix(dense), directed=True, connection="strong")
        assert _strongly_connected(A) == (n == 1)


def test_is_symmetric():
    assert is_symmetric(sparse_of([[2.0, 1.0], [1.0, 2.0]]))
    assert not is_symmetric(sparse_of([[2.0, 1.0], [1.0 + 1e-6, 2.0]]))
    assert not is_symmetric(sparse_of([[2.0, 1.0], [0.0, 2.0]]))  # pattern asymmetry
    assert not is_symmetric(sparse_of(np.ones((2, 3))))


def test_one_by_one_systems():
    A = sparse_of([[5.0]])
    b = np.array([10.0])
    for solver in (
        lambda: jacobi_solve(A, b, cfg=CFG),
        lambda: gauss_seidel_solve(A, b, cfg=CFG),
        lambda: cg_solve(A, b, cfg=CFG),
        lambda: gmres_restarted(A, b, k=1, cfg=CFG),
        lambda: minres_solve(A, b, k=1, cfg=CFG),
        lambda: normal_equation_solve(A, b, cfg=CFG),
    ):
        report = solver()
        assert report.status is SolveStatus.CONVERGED
        assert report.x[0] == pytest.approx(2.0, abs=1e-9)


def test_report_invariants_across_solvers():
    rng = np.random.default_rng(10)
    dense = spd_dominant(rng, 9)
    b = rng.uniform(-1, 1, 9)
    A = sparse_of(dense)
    eps = 1e-8
    cfg = SolverConfig(eps_tol=eps, max_iter=5_000)
    reports = [
        jacobi_solve(A, b, cfg=cfg),
        gauss_seidel_solve(A, b, cfg=cfg),
        cg_solve(A, b, cfg=cfg),
        gmres_restarted(A, b, k=4, cfg=cfg),
        minres_solve(A, b, k=4, cfg=cfg),
        normal_equation_solve(A, b, cfg=cfg),
    ]
    for report in reports:
        assert report.residual_trace.size == report.iterations + 1
        assert report.status is SolveStatus.CONVERGED
        assert report.residual_trace[-1] <= eps
        assert report.elapsed_ns >= 0


def test_zero_diagonal_warning_case():
    skew = sparse_of([[0.0, 1.0], [-1.0, 0.0]])
    with pytest.raises(ZeroDiagonal):
        jacobi_solve(skew, [1.0, 1.0], cfg=CFG)
    with pytest.raises(ZeroDiagonal):
        gauss_seidel_solve(skew, [1.0, 1.0], cfg=CFG)
