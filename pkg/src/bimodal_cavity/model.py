"""Hilbert spaces, canonical operators and the four system Hamiltonians.

All rates are stored as value/2pi in GHz and
converted to angular units (rad/ns) exactly once, when a model is built.
Basis order is always [QD, mode a, mode b] with the QD basis [g, e].
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, fields, replace
from types import MappingProxyType
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from . import numcore
from .errors import DimensionMismatch, InvalidParameter, UnequalKappas

TWO_PI = 2.0 * math.pi

SYSTEMS = ("single", "bimodal", "effective", "molecule")


@dataclass(frozen=True)
class HilbertSpace:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 2 for d in dims):
            raise InvalidParameter(f"every subsystem dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)


@dataclass(frozen=True)
class RateParams:
    """Model parameters in GHz (value/2pi); defaults are the reference point."""

    g_a: float = 10.0
    g_b: float = 10.0
    kappa_a: float = 20.0
    kappa_b: float = 20.0
    gamma: float = 1.0
    drive_E: float = 1.0
    delta: float = 0.0
    delta_ab: float = 0.0
    J: float = 40.0
    fock_trunc: int = 8

    def __post_init__(self):
        for name in ("g_a", "g_b", "kappa_a", "kappa_b", "gamma", "drive_E", "J"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidParameter(f"{name} must be finite and >= 0, got {value}")
        for name in ("delta", "delta_ab"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameter(f"{name} must be finite")
        if int(self.fock_trunc) != self.fock_trunc or self.fock_trunc < 2:
            raise InvalidParameter(f"fock_trunc must be an integer >= 2, got {self.fock_trunc}")
        object.__setattr__(self, "fock_trunc", int(self.fock_trunc))

    def angular(self, name: str) -> float:
        """Rate ``name`` in rad/ns."""
        return TWO_PI * getattr(self, name)

    def with_values(self, **values) -> "RateParams":
        """Copy with fields replaced; understands the aliases in ``ALIASES``."""
        updates: dict[str, float] = {}
        for key, value in values.items():
            if key == "ratio":
                continue
            if key in ALIASES:
                for target in ALIASES[key]:
                    updates[target] = value
            elif key in PARAM_FIELDS:
                updates[key] = value
            else:
                raise InvalidParameter(f"unknown parameter {key!r}")
        if "ratio" in values:
            updates["g_b"] = values["ratio"] * updates.get("g_a", self.g_a)
        return replace(self, **updates)


PARAM_FIELDS = tuple(f.name for f in fields(RateParams))
# composite keys used by figure sweeps; "ratio" sets g_b = ratio * g_a
ALIASES = {"g": ("g_a", "g_b"), "kappa": ("kappa_a", "kappa_b")}
SWEEPABLE = PARAM_FIELDS + tuple(ALIASES) + ("ratio",)


@dataclass(frozen=True)
class SystemModel:
    space: HilbertSpace
    hamiltonian: sp.csr_matrix
    collapses: tuple[tuple[float, sp.csr_matrix], ...]
    labels: Mapping[str, sp.csr_matrix]
    # decay rate (GHz, /2pi) used to turn occupation into transmitted output
    label_kappas: Mapping[str, float]
    # rough upper bound on the fastest rate (rad/ns), for the RK4 guard
    rate_scale: float
    params: RateParams | None = None
    system: str = ""
    # coherent drive part of the Hamiltonian (already included in it)
    drive: sp.csr_matrix | None = None

    def __post_init__(self):
        d = self.space.total
        ops = [self.hamiltonian, *(op for _, op in self.collapses), *self.labels.values()]
        if self.drive is not None:
            ops.append(self.drive)
        for op in ops:
            if op.shape != (d, d):
                raise DimensionMismatch(f"operator shape {op.shape} does not match space dim {d}")
        object.__setattr__(self, "labels", MappingProxyType(dict(self.labels)))
        object.__setattr__(self, "label_kappas", MappingProxyType(dict(self.label_kappas)))


def annihilation(N: int) -> sp.csr_matrix:
    """Truncated bosonic annihilation operator, a|n> = sqrt(n)|n-1>."""
    if N < 2:
        raise InvalidParameter(f"Fock truncation must be >= 2, got {N}")
    return sp.diags(np.sqrt(np.arange(1, N, dtype=float)), 1, shape=(N, N), format="csr", dtype=complex)


def lowering_qd() -> sp.csr_matrix:
    """QD lowering operator |g><e| in the [g, e] basis."""
    return sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=complex))


def identity(N: int) -> sp.csr_matrix:
    return sp.identity(N, dtype=complex, format="csr")


def embed(op, space: HilbertSpace, slot: int):
    """Lift a single-subsystem operator into ``space`` at position ``slot``."""
    if not 0 <= slot < len(space.dims):
        raise DimensionMismatch(f"slot {slot} outside space with {len(space.dims)} subsystems")
    d = space.dims[slot]
    if op.shape != (d, d):
        raise DimensionMismatch(f"operator shape {op.shape} does not fit slot {slot} of dim {d}")
    out = None
    for i, dim in enumerate(space.dims):
        factor = op if i == slot else identity(dim)
        out = factor if out is None else numcore.kron(out, factor)
    return sp.csr_matrix(out) if sp.issparse(out) else out


def _hc(op):
    return numcore.dagger(op)


def _rate_scale(p: RateParams, *extra: float) -> float:
    values = [2 * p.kappa_a, 2 * p.kappa_b, 2 * p.gamma, abs(p.delta), abs(p.delta_ab), p.drive_E]
    return TWO_PI * max(values + list(extra))


@functools.lru_cache(maxsize=16)
def _two_mode_ops(N: int):
    # shared between models; operators are never modified in place
    space = HilbertSpace((2, N, N))
    sigma = embed(lowering_qd(), space, 0)
    a = embed(annihilation(N), space, 1)
    b = embed(annihilation(N), space, 2)
    return space, sigma, a, b


def build_bimodal(p: RateParams) -> SystemModel:
    """QD coupled to two degenerate, mutually uncoupled modes; mode a driven.

    Mode b sits ``delta_ab`` above mode a; the QD is resonant with mode a.
    """
    space, s, a, b = _two_mode_ops(p.fock_trunc)
    ad, bd, sd = _hc(a), _hc(b), _hc(s)
    H = (
        p.angular("delta") * (ad @ a + sd @ s + bd @ b)
        + p.angular("delta_ab") * (bd @ b)
        + p.angular("g_a") * (ad @ s + a @ sd)
        + p.angular("g_b") * (bd @ s + b @ sd)
    )
    drive = p.angular("drive_E") * (a + ad)
    collapses = (
        (2 * p.angular("kappa_a"), a),
        (2 * p.angular("kappa_b"), b),
        (2 * p.angular("gamma"), s),
    )
    return SystemModel(
        space=space,
        hamiltonian=sp.csr_matrix(H + drive),
        drive=sp.csr_matrix(drive),
        collapses=collapses,
        labels={"a": a, "b": b, "sigma": s},
        label_kappas={"a": p.kappa_a, "b": p.kappa_b, "sigma": p.gamma},
        rate_scale=_rate_scale(p, p.g_a, p.g_b),
        params=p,
        system="bimodal",
    )


def build_single_mode(p: RateParams) -> SystemModel:
    """Jaynes-Cummings system: QD coupled to the single driven mode a."""
    N = p.fock_trunc
    space = HilbertSpace((2, N))
    s = embed(lowering_qd(), space, 0)
    a = embed(annihilation(N), space, 1)
    ad, sd = _hc(a), _hc(s)
    H = (
        p.angular("delta") * (ad @ a + sd @ s)
        + p.angular("g_a") * (ad @ s + a @ sd)
    )
    drive = p.angular("drive_E") * (a + ad)
    return SystemModel(
        space=space,
        hamiltonian=sp.csr_matrix(H + drive),
        drive=sp.csr_matrix(drive),
        collapses=((2 * p.angular("kappa_a"), a), (2 * p.angular("gamma"), s)),
        labels={"a": a, "sigma": s},
        label_kappas={"a": p.kappa_a, "sigma": p.gamma},
        rate_scale=_rate_scale(replace(p, kappa_b=0.0, delta_ab=0.0), p.g_a),
        params=p,
        system="single",
    )


def build_effective(p: RateParams) -> SystemModel:
    """Bimodal system rewritten in the bright/dark mode basis.

    alpha = (g_a a + g_b b)/G couples to the QD with strength G = sqrt(g_a^2 + g_b^2);
    beta = (g_b a - g_a b)/G is an empty driven cavity.  Slots are [QD, alpha, beta].
    The labels ``a`` and ``b`` are the original modes rebuilt from alpha and beta.
    """
    if p.g_a <= 0:
        raise InvalidParameter("effective model needs g_a > 0")
    if p.kappa_a != p.kappa_b:
        raise UnequalKappas(
            f"effective model needs kappa_a == kappa_b, got {p.kappa_a} and {p.kappa_b}"
        )
    if p.delta_ab != 0:
        raise InvalidParameter("effective model needs degenerate modes (delta_ab = 0)")
    space, s, alpha, beta = _two_mode_ops(p.fock_trunc)
    alpha_d, beta_d, sd = _hc(alpha), _hc(beta), _hc(s)
    r = p.g_b / p.g_a
    G = math.hypot(p.g_a, p.g_b)
    norm = math.sqrt(1.0 + r * r)
    delta = p.angular("delta")
    E = p.angular("drive_E")
    drive1 = (E / norm) * (alpha + alpha_d)
    drive2 = (r * E / norm) * (beta + beta_d)
    H1 = delta * (alpha_d @ alpha + sd @ s) + TWO_PI * G * (alpha @ sd + alpha_d @ s) + drive1
    H2 = delta * (beta_d @ beta) + drive2
    kappa = 2 * p.angular("kappa_a")
    a = (p.g_a * alpha + p.g_b * beta) / G
    b = (p.g_b * alpha - p.g_a * beta) / G
    return SystemModel(
        space=space,
        hamiltonian=sp.csr_matrix(H1 + H2),
        drive=sp.csr_matrix(drive1 + drive2),
        collapses=((kappa, alpha), (kappa, beta), (2 * p.angular("gamma"), s)),
        labels={"alpha": alpha, "beta": beta, "a": sp.csr_matrix(a), "b": sp.csr_matrix(b), "sigma": s},
        label_kappas={"alpha": p.kappa_a, "beta": p.kappa_a, "a": p.kappa_a, "b": p.kappa_a, "sigma": p.gamma},
        rate_scale=_rate_scale(p, G),
        params=p,
        system="effective",
    )


def build_photonic_molecule(p: RateParams) -> SystemModel:
    """Driven empty cavity a tunnel-coupled (J) to cavity b holding the QD (g_b)."""
    space, s, a, b = _two_mode_ops(p.fock_trunc)
    ad, bd, sd = _hc(a), _hc(b), _hc(s)
    H = (
        p.angular("delta") * (ad @ a + sd @ s + bd @ b)
        + p.angular("g_b") * (bd @ s + b @ sd)
        + p.angular("J") * (ad @ b + a @ bd)
    )
    drive = p.angular("drive_E") * (a + ad)
    collapses = (
        (2 * p.angular("kappa_a"), a),
        (2 * p.angular("kappa_b"), b),
        (2 * p.angular("gamma"), s),
    )
    return SystemModel(
        space=space,
        hamiltonian=sp.csr_matrix(H + drive),
        drive=sp.csr_matrix(drive),
        collapses=collapses,
        labels={"a": a, "b": b, "sigma": s},
        label_kappas={"a": p.kappa_a, "b": p.kappa_b, "sigma": p.gamma},
        rate_scale=_rate_scale(replace(p, delta_ab=0.0), p.g_b, p.J),
        params=p,
        system="molecule",
    )


BUILDERS = {
    "single": build_single_mode,
    "bimodal": build_bimodal,
    "effective": build_effective,
    "molecule": build_photonic_molecule,
}


def build(system: str, p: RateParams) -> SystemModel:
    try:
        builder = BUILDERS[system]
    except KeyError:
        raise InvalidParameter(f"unknown system {system!r}; choose from {', '.join(SYSTEMS)}") from None
    return builder(p)
