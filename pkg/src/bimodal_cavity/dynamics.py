"""Lindblad dynamics: Liouvillian, steady state, RK4 evolution, observables.

Vectorization is column stacking, ``vec(A X B) = (B^T kron A) vec(X)``, and a
collapse entry ``(r, D)`` contributes ``r * (D rho D^+ - {D^+ D, rho}/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg.lapack import ztrsyl
from scipy.sparse.csgraph import connected_components

from . import numcore
from .errors import (
    DimensionMismatch,
    InvariantViolation,
    InvalidParameter,
    NotConverged,
    Singular,
    StabilityGuard,
    TooLarge,
    UnknownLabel,
)
from .model import HilbertSpace, SystemModel
from .numcore import DEFAULT_SETTINGS, NumericSettings


@dataclass(frozen=True)
class DensityMatrix:
    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        d = self.space.total
        if self.matrix.shape != (d, d):
            raise DimensionMismatch(f"density matrix shape {self.matrix.shape} != ({d}, {d})")

    def validate(self, settings: NumericSettings = DEFAULT_SETTINGS) -> "DensityMatrix":
        """Raise InvariantViolation unless Hermitian, unit trace and positive."""
        herm = numcore.hermiticity_error(self.matrix)
        if herm > settings.density_tol:
            raise InvariantViolation(f"density matrix not Hermitian ({herm:.3e})")
        tr = np.trace(self.matrix)
        if abs(tr - 1.0) > settings.density_tol:
            raise InvariantViolation(f"density matrix trace {tr} != 1")
        lowest = np.linalg.eigvalsh(self.matrix).min()
        if lowest < -settings.positivity_tol:
            raise InvariantViolation(
                f"density matrix has eigenvalue {lowest:.3e}; Fock truncation probably too small"
            )
        return self

    @classmethod
    def pure(cls, space: HilbertSpace, index: tuple[int, ...] | int) -> "DensityMatrix":
        """Projector on a product basis state, e.g. ``(0, 1, 0)`` = |g, 1, 0>."""
        flat = index if isinstance(index, int) else int(np.ravel_multi_index(index, space.dims))
        rho = np.zeros((space.total, space.total), dtype=complex)
        rho[flat, flat] = 1.0
        return cls(space, rho)


@dataclass(frozen=True)
class ObservableSet:
    mode_label: str
    occupation: float
    transmission: float
    g2: float | None  # None: occupation below threshold, g2 undefined


def vec(X: np.ndarray) -> np.ndarray:
    return np.asarray(X).ravel(order="F")


def unvec(x: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(x).reshape((d, d), order="F")


def liouvillian(m: SystemModel, settings: NumericSettings = DEFAULT_SETTINGS) -> sp.csr_matrix:
    """Superoperator L with vec(d rho/dt) = L vec(rho).

    L = -i(I x H - H^T x I) + sum_k r_k (conj(D_k) x D_k - I x D_k^+D_k / 2 - (D_k^+D_k)^T x I / 2),
    assembled as I x Heff + conj(Heff) x I + sum_k r_k conj(D_k) x D_k with
    Heff = -iH - sum_k r_k D_k^+ D_k / 2 (H Hermitian, so H^T = conj(H)).
    """
    d = m.space.total
    if d * d > settings.max_liouvillian_dim:
        raise TooLarge(f"Liouvillian dimension {d * d} exceeds {settings.max_liouvillian_dim}")
    eye = sp.identity(d, dtype=complex, format="csr")
    Heff = -1j * m.hamiltonian
    terms = []
    for rate, D in m.collapses:
        if rate == 0:
            continue
        Heff = Heff - 0.5 * rate * (numcore.dagger(D) @ D)
        terms.append(rate * numcore.kron(D.conj(), D, format="coo"))
    terms += [numcore.kron(eye, Heff, format="coo"), numcore.kron(Heff.conj(), eye, format="coo")]
    # one COO -> CSR conversion sums duplicates; cheaper than repeated CSR additions
    L = sp.coo_matrix(
        (
            np.concatenate([t.data for t in terms]),
            (np.concatenate([t.row for t in terms]), np.concatenate([t.col for t in terms])),
        ),
        shape=(d * d, d * d),
    )
    return L.tocsr()


def _undriven_no_jump_hamiltonian(m: SystemModel) -> sp.csr_matrix:
    H = m.hamiltonian if m.drive is None else m.hamiltonian - m.drive
    Heff = -1j * H
    for rate, D in m.collapses:
        Heff = Heff - 0.5 * rate * (numcore.dagger(D) @ D)
    return sp.csr_matrix(Heff)


class _BlockDiagonal:
    """Block-diagonal matrix stored as stacks of equal-size dense blocks.

    Rows are in block order: blocks sorted by size, so every group of equal
    sizes occupies a contiguous row range and multiplies as one batched matmul.
    """

    def __init__(self, groups):
        self.groups = groups  # list of (start, stop, stack of shape (count, k, k))

    def matmul(self, X: np.ndarray) -> np.ndarray:
        out = np.empty_like(X)
        for start, stop, stack in self.groups:
            count, k, _ = stack.shape
            out[start:stop] = np.matmul(stack, X[start:stop].reshape(count, k, -1)).reshape(stop - start, -1)
        return out

    def conj(self) -> "_BlockDiagonal":
        return _BlockDiagonal([(a, b, s.conj()) for a, b, s in self.groups])


def _blockwise_eig(Heff: sp.csr_matrix):
    """Eigen-decomposition of a matrix that splits into small decoupled blocks.

    Returns the permutation into block order, the eigenvalues (block order),
    the eigenvector matrix and its inverse as _BlockDiagonal, and the worst
    block condition number (1-norm).
    """
    _, component = connected_components(abs(Heff) + abs(Heff).T, directed=False)
    dense = Heff.toarray()
    members = [np.flatnonzero(component == c) for c in np.unique(component)]
    members.sort(key=len)
    perm = np.concatenate(members)
    lam = []
    groups_v, groups_vi = [], []
    worst = 1.0
    start = 0
    for k in sorted({len(idx) for idx in members}):
        vecs_k, inv_k = [], []
        for idx in (idx for idx in members if len(idx) == k):
            w, vecs = np.linalg.eig(dense[np.ix_(idx, idx)])
            inv = np.linalg.inv(vecs)
            worst = max(worst, np.abs(vecs).sum(axis=0).max() * np.abs(inv).sum(axis=0).max())
            lam.append(w)
            vecs_k.append(vecs)
            inv_k.append(inv)
        stop = start + k * len(vecs_k)
        groups_v.append((start, stop, np.array(vecs_k)))
        groups_vi.append((start, stop, np.array(inv_k)))
        start = stop
    return perm, np.concatenate(lam), _BlockDiagonal(groups_v), _BlockDiagonal(groups_vi), worst


def no_jump_inverse(m: SystemModel) -> spla.LinearOperator | None:
    """Approximate inverse of the Liouvillian for use as a GMRES preconditioner.

    Inverts ``X -> Heff X + X Heff^+`` (the Liouvillian without jump terms),
    with Heff built from the undriven Hamiltonian so that it splits into small
    excitation-number blocks.  Returns None only when Heff vanishes entirely.
    """
    Heff = _undriven_no_jump_hamiltonian(m)
    d = Heff.shape[0]
    n = d * d
    perm, lam, V, Vi, cond = _blockwise_eig(Heff)
    den = lam[:, None] + lam.conj()[None, :]
    # undamped pairs (the vacuum at least) would divide by zero; any finite
    # stand-in keeps the preconditioner invertible and GMRES handles the rest
    scale = np.abs(den).max()
    if scale == 0.0:
        return None
    den = np.where(np.abs(den) <= 1e-12 * scale, -scale, den)
    if cond < 1e10:
        Vc, Vic = V.conj(), Vi.conj()
        inverse = np.argsort(perm)

        def apply(c):
            # V ((Vi C Vi^+) / den) V^+ in block order
            C = unvec(c, d)[np.ix_(perm, perm)]
            X = Vi.matmul(C)
            X = Vic.matmul(X.T).T / den
            X = V.matmul(X)
            X = Vc.matmul(X.T).T
            return vec(X[np.ix_(inverse, inverse)])
    else:
        # near an exceptional point: Bartels-Stewart on the Schur form instead
        T, Q = sla.schur(Heff.toarray(), output="complex")
        Qh = Q.conj().T

        def apply(c):
            C = unvec(c, d)
            Y, scale, info = ztrsyl(T, T, Qh @ C @ Q, trana="N", tranb="C", isgn=1)
            return vec(Q @ (Y / scale) @ Qh)

    return spla.LinearOperator((n, n), matvec=apply, dtype=complex)


def pad_state(rho: DensityMatrix, space: HilbertSpace) -> np.ndarray:
    """Embed ``rho`` into a space with the same subsystems but larger truncations."""
    old, new = rho.space.dims, space.dims
    if len(old) != len(new) or any(n < o for o, n in zip(old, new)):
        raise DimensionMismatch(f"cannot embed a {old} state into {new}")
    widths = [(0, n - o) for o, n in zip(old, new)] * 2
    return np.pad(rho.matrix.reshape(old + old), widths).reshape(space.total, space.total)


def steady_state(
    m: SystemModel, settings: NumericSettings = DEFAULT_SETTINGS, guess: DensityMatrix | None = None
) -> DensityMatrix:
    """Unique steady state from L vec(rho) = 0 with the first row replaced by the trace.

    ``guess`` (for instance the solution at a smaller Fock truncation) only
    seeds the iterative solver; the accepted residual is the same either way.
    """
    if not any(rate > 0 for rate, _ in m.collapses):
        raise Singular("no dissipation: the steady state is not unique")
    d = m.space.total
    L = liouvillian(m, settings)
    trace_row = sp.csr_matrix(
        (np.ones(d, dtype=complex), (np.zeros(d, dtype=int), np.arange(d) * (d + 1))), shape=(1, d * d)
    )
    A = sp.vstack([trace_row, L[1:]], format="csr")
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    precond = no_jump_inverse(m) if d * d > settings.direct_limit else None
    x0 = None if guess is None or precond is None else vec(pad_state(guess, m.space))
    x = numcore.solve_linear(A, rhs, preconditioner=precond, settings=settings, x0=x0)

    rho = unvec(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    residual = np.linalg.norm(L @ vec(rho))
    bound = settings.steady_residual * spla.norm(L)
    if residual > bound:
        raise NotConverged(f"steady-state residual {residual:.3e} exceeds {bound:.3e}")
    return DensityMatrix(m.space, rho).validate(settings)


def evolve(
    m: SystemModel,
    rho0: DensityMatrix,
    t_final: float,
    dt: float,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> DensityMatrix:
    """Fixed-step RK4 integration of the master equation up to ``t_final`` (ns)."""
    if rho0.space != m.space:
        raise DimensionMismatch("initial state lives on a different Hilbert space")
    if dt <= 0 or t_final < 0:
        raise InvalidParameter("need dt > 0 and t_final >= 0")
    if dt > 0.1 / m.rate_scale:
        raise StabilityGuard(f"dt = {dt} ns exceeds 0.1/rate_scale = {0.1 / m.rate_scale:.3e} ns")
    if t_final == 0:
        return rho0
    steps = math.ceil(t_final / dt - 1e-9)
    h = t_final / steps
    d = m.space.total
    L = liouvillian(m, settings)
    x = vec(rho0.matrix).astype(complex)
    trace0 = np.trace(rho0.matrix)
    for _ in range(steps):
        k1 = L @ x
        k2 = L @ (x + 0.5 * h * k1)
        k3 = L @ (x + 0.5 * h * k2)
        k4 = L @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    rho = unvec(x, d)
    drift = abs(np.trace(rho) - trace0)
    herm = numcore.hermiticity_error(rho)
    if drift > settings.evolve_drift or herm > settings.evolve_drift:
        raise InvariantViolation(f"RK4 drift: trace {drift:.3e}, hermiticity {herm:.3e}")
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(m.space, rho).validate(settings)


def expect(op, rho: DensityMatrix) -> complex:
    """tr(op rho)."""
    if op.shape != rho.matrix.shape:
        raise DimensionMismatch(f"operator {op.shape} vs state {rho.matrix.shape}")
    return complex(np.trace(op @ rho.matrix))


def g2_zero(mode_op, rho: DensityMatrix, threshold: float = DEFAULT_SETTINGS.g2_threshold) -> float | None:
    """<D+ D+ D D> / <D+ D>^2, or None if <D+ D> is below ``threshold``."""
    Dd = numcore.dagger(mode_op)
    number = Dd @ mode_op
    occupation = expect(number, rho).real
    if occupation < threshold:
        return None
    pairs = expect(Dd @ number @ mode_op, rho).real
    return pairs / occupation**2


def observables(
    m: SystemModel, rho: DensityMatrix, label: str, settings: NumericSettings = DEFAULT_SETTINGS
) -> ObservableSet:
    try:
        D = m.labels[label]
    except KeyError:
        raise UnknownLabel(f"model has no operator {label!r}; known: {', '.join(m.labels)}") from None
    occupation = expect(numcore.dagger(D) @ D, rho).real
    return ObservableSet(
        mode_label=label,
        occupation=occupation,
        transmission=m.label_kappas[label] * occupation,
        g2=g2_zero(D, rho, settings.g2_threshold),
    )
