"""Complex linear-algebra primitives.

Matrices are plain ``numpy.ndarray`` (dense) or ``scipy.sparse`` matrices
(sparse, CSR unless a caller asks for another format).  Both storage kinds
go through the same functions and give the same numbers; dense semantics
are the reference.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotHermitian,
    Singular,
    TooLarge,
)

MAX_ROWS = 10**6


@dataclass(frozen=True)
class NumericSettings:
    """Every tolerance and size knob used by the solvers, in one place."""

    hermitian_tol: float = 1e-10
    solve_residual: float = 1e-8
    singular_pivot: float = 1e-14
    gmres_rtol: float = 1e-12
    gmres_restart: int = 100
    gmres_maxiter: int = 50
    # sparse systems up to this many rows are LU-factorized directly
    direct_limit: int = 4096
    steady_residual: float = 1e-8
    density_tol: float = 1e-9
    positivity_tol: float = 1e-8
    g2_threshold: float = 1e-12
    evolve_drift: float = 1e-6
    convergence_tol: float = 1e-6
    max_fock: int = 16
    max_liouvillian_dim: int = 10**6


DEFAULT_SETTINGS = NumericSettings()


def is_sparse(A) -> bool:
    return sp.issparse(A)


def to_dense(A) -> np.ndarray:
    if sp.issparse(A):
        return A.toarray()
    return np.asarray(A)


def kron(A, B, format: str = "csr"):
    """Kronecker product; block (i, j) of the result is ``A[i, j] * B``.

    Sparse (in ``format``) if either factor is sparse.
    """
    rows = A.shape[0] * B.shape[0]
    if rows > MAX_ROWS:
        raise TooLarge(f"kron result would have {rows} rows (limit {MAX_ROWS})")
    if sp.issparse(A) or sp.issparse(B):
        return sp.kron(A, B, format=format)
    return np.kron(np.asarray(A), np.asarray(B))


def dagger(A):
    if sp.issparse(A):
        return A.conj().T.tocsr()
    return np.asarray(A).conj().T


def hermiticity_error(A) -> float:
    """max |A - A^dagger| over all entries."""
    diff = A - dagger(A)
    if sp.issparse(diff):
        return float(abs(diff).max()) if diff.nnz else 0.0
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def eig_hermitian(A, settings: NumericSettings = DEFAULT_SETTINGS):
    """Eigenvalues (ascending) and orthonormal eigenvector columns of Hermitian A."""
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"eig_hermitian needs a square matrix, got {A.shape}")
    err = hermiticity_error(A)
    if err > settings.hermitian_tol:
        raise NotHermitian(f"|A - A^dagger|_max = {err:.3e}")
    try:
        w, V = np.linalg.eigh(to_dense(A))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return w, V


def _frobenius(A) -> float:
    if sp.issparse(A):
        return float(spla.norm(A))
    return float(np.linalg.norm(A))


def _check_pivots(diag: np.ndarray, settings: NumericSettings) -> None:
    mags = np.abs(diag)
    scale = mags.max() if mags.size else 0.0
    if scale == 0.0 or mags.min() < settings.singular_pivot * scale:
        raise Singular(
            f"smallest pivot {mags.min():.3e} relative to largest {scale:.3e}"
        )


def _direct_sparse(A, rhs, settings):
    try:
        lu = spla.splu(sp.csc_matrix(A))
    except RuntimeError as exc:  # "Factor is exactly singular"
        raise Singular(str(exc)) from exc
    _check_pivots(lu.U.diagonal(), settings)
    return lu.solve(rhs)


def solve_linear(A, rhs, preconditioner=None, settings: NumericSettings = DEFAULT_SETTINGS, x0=None):
    """Solve ``A x = rhs``.

    Dense matrices and small sparse ones are LU-factorized.  Large sparse
    systems use restarted GMRES when a ``preconditioner`` (anything
    ``scipy.sparse.linalg.aslinearoperator`` accepts, approximating A^-1) is
    supplied, starting from ``x0`` if given; if GMRES stalls the direct
    factorization is used instead.

    The result always satisfies
    ``|A x - rhs| <= solve_residual * (|A|_F |x| + |rhs|)``.
    """
    n, m = A.shape
    if n != m:
        raise DimensionMismatch(f"solve_linear needs a square matrix, got {A.shape}")
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape != (n,):
        raise DimensionMismatch(f"rhs has shape {rhs.shape}, expected ({n},)")

    if not sp.issparse(A):
        A = np.asarray(A, dtype=complex)
        with warnings.catch_warnings():
            # exact zero pivots are reported by _check_pivots as Singular
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(A, check_finite=True)
        _check_pivots(np.diag(lu), settings)
        x = sla.lu_solve((lu, piv), rhs)
    elif preconditioner is None or n <= settings.direct_limit:
        x = _direct_sparse(A, rhs, settings)
    else:
        x, info = spla.gmres(
            A,
            rhs,
            x0=x0,
            M=preconditioner,
            rtol=settings.gmres_rtol,
            atol=0.0,
            restart=settings.gmres_restart,
            maxiter=settings.gmres_maxiter,
        )
        if info != 0:
            x = _direct_sparse(A, rhs, settings)

    residual = np.linalg.norm(A @ x - rhs)
    bound = settings.solve_residual * (_frobenius(A) * np.linalg.norm(x) + np.linalg.norm(rhs))
    if not np.isfinite(residual) or residual > bound:
        raise NoConvergence(f"residual {residual:.3e} exceeds bound {bound:.3e}")
    return x
