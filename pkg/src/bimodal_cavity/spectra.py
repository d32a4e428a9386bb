"""Energy ladders of the resonant, undriven systems.

Within an n-quanta manifold the Jaynes-Cummings block is 2x2 with
eigenvalues +-g sqrt(n).  The bimodal block spans the (n+1) ground-QD states
|g, n_a, n-n_a> and the n excited-QD states |e, n_a, n-1-n_a>, ordered
lexicographically in (QD excitation, n_a).  The coupling only links ground
to excited states, so the spectrum is symmetric and, with an odd dimension,
always contains 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, SpectrumAssertion
from .numcore import eig_hermitian


@dataclass(frozen=True)
class ManifoldSpectrum:
    n_quanta: int
    eigenvalues: np.ndarray
    dimension: int
    eigenvectors: np.ndarray | None = None
    basis: tuple[tuple[int, int, int], ...] = ()


def jc_manifold(n: int, g: float) -> ManifoldSpectrum:
    """Closed form: eigenvalues -g sqrt(n), +g sqrt(n) in basis {|g,n>, |e,n-1>}."""
    if n < 1 or g < 0:
        raise InvalidParameter("need n >= 1 and g >= 0")
    split = g * math.sqrt(n)
    vectors = np.array([[1.0, 1.0], [-1.0, 1.0]]) / math.sqrt(2.0)  # columns: |n,->, |n,+>
    return ManifoldSpectrum(
        n_quanta=n,
        eigenvalues=np.array([-split, split]),
        dimension=2,
        eigenvectors=vectors,
        basis=((0, n, 0), (1, n - 1, 0)),
    )


def bimodal_block(n: int, g_a: float, g_b: float):
    """Resonant bimodal Hamiltonian restricted to n quanta, and its basis.

    Basis entries are (qd, n_a, n_b) with qd = 0 for |g>, 1 for |e>.
    """
    if n < 1:
        raise InvalidParameter("need n >= 1")
    basis = [(0, na, n - na) for na in range(n + 1)] + [(1, na, n - 1 - na) for na in range(n)]
    index = {state: i for i, state in enumerate(basis)}
    H = np.zeros((len(basis), len(basis)))
    for qd, na, nb in basis:
        if qd != 1:
            continue
        j = index[(1, na, nb)]
        # a^+ sigma |e, na, nb> = sqrt(na+1) |g, na+1, nb>
        i = index[(0, na + 1, nb)]
        H[i, j] = H[j, i] = g_a * math.sqrt(na + 1)
        i = index[(0, na, nb + 1)]
        H[i, j] = H[j, i] = g_b * math.sqrt(nb + 1)
    return H, tuple(basis)


def bimodal_manifold(n: int, g_a: float, g_b: float, tol: float = 1e-9) -> ManifoldSpectrum:
    H, basis = bimodal_block(n, g_a, g_b)
    w, V = eig_hermitian(H)
    scale = max(np.abs(w).max(), 1e-300)
    if abs(w.sum()) > tol * scale:
        raise SpectrumAssertion(f"manifold trace {w.sum():.3e} is not zero")
    if np.abs(w).min() > tol * scale:
        raise SpectrumAssertion(f"no zero eigenvalue in the {n}-quanta manifold")
    return ManifoldSpectrum(n_quanta=n, eigenvalues=w, dimension=len(basis), eigenvectors=V, basis=basis)
