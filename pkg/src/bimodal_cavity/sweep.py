"""Parameter sweeps over RateParams fields (1-D or 2-D grids).

Every grid point is an independent steady-state solve, checked for Fock
truncation convergence by re-solving with two more photons per mode.
Points are evaluated serially or in a process pool; rows always come back
in row-major grid order, so output does not depend on the worker count.
"""
from __future__ import annotations

import functools
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from threadpoolctl import threadpool_limits

from .dynamics import ObservableSet, observables, steady_state
from .errors import CavityError, InvalidParameter, SweepFailed, UnknownLabel
from .model import SWEEPABLE, SYSTEMS, RateParams, build
from .numcore import DEFAULT_SETTINGS, NumericSettings

log = logging.getLogger(__name__)

QUANTITIES = ("occupation", "transmission", "g2")
DRIVE_RULES = ("fixed", "polariton")
MAX_POINTS = 10**6


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise InvalidParameter(f"cannot sweep {self.name!r}; choose from {', '.join(SWEEPABLE)}")
        if self.points < 2:
            raise InvalidParameter(f"axis {self.name} needs at least 2 points")
        if self.spacing not in ("linear", "log"):
            raise InvalidParameter(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
            raise InvalidParameter(f"log axis {self.name} needs positive endpoints")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepSpec:
    base: RateParams
    system: str
    axes: tuple[Axis, ...]
    observe: tuple[tuple[str, str], ...]
    drive_rule: str = "fixed"
    # further systems solved at each point; their columns get a "<system>_" prefix
    compare: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        for system in (self.system, *self.compare):
            if system not in SYSTEMS:
                raise InvalidParameter(f"unknown system {system!r}")
        if not 1 <= len(self.axes) <= 2:
            raise InvalidParameter("a sweep has one or two axes")
        if len({a.name for a in self.axes}) != len(self.axes):
            raise InvalidParameter("axes must sweep different parameters")
        if math.prod(a.points for a in self.axes) > MAX_POINTS:
            raise InvalidParameter(f"sweep exceeds {MAX_POINTS} points")
        if not self.observe:
            raise InvalidParameter("nothing to observe")
        for label, quantity in self.observe:
            if quantity not in QUANTITIES:
                raise InvalidParameter(f"unknown quantity {quantity!r}; choose from {', '.join(QUANTITIES)}")
        if self.drive_rule not in DRIVE_RULES:
            raise InvalidParameter(f"drive rule must be one of {DRIVE_RULES}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(label for label, _ in self.observe))

    def observable_columns(self) -> list[str]:
        cols = []
        for system in (self.system, *self.compare):
            prefix = "" if system == self.system else f"{system}_"
            cols += [f"{prefix}{q}_{label}" for label, q in self.observe]
        return cols

    def columns(self) -> list[str]:
        return [a.name for a in self.axes] + self.observable_columns() + ["converged", "fock_trunc", "status"]

    def grid(self) -> list[tuple[float, ...]]:
        return list(itertools.product(*(a.values().tolist() for a in self.axes)))

    def point_params(self, point: tuple[float, ...]) -> RateParams:
        params = self.base.with_values(**dict(zip((a.name for a in self.axes), point)))
        if self.drive_rule == "polariton":
            params = replace(params, delta=params.g_a)
        return params

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "system": self.system,
            "compare": list(self.compare),
            "drive_rule": self.drive_rule,
            "base": asdict(self.base),
            "axes": [asdict(a) for a in self.axes],
            "observe": [list(o) for o in self.observe],
        }


@dataclass
class SweepRow:
    point: tuple[float, ...]
    values: dict[str, float | None]
    converged: bool
    fock_trunc: int
    status: str = "ok"


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        """One column as floats, undefined entries as NaN (for analysis only)."""
        axis_names = [a.name for a in self.spec.axes]
        if name in axis_names:
            i = axis_names.index(name)
            return np.array([row.point[i] for row in self.rows])
        return np.array([np.nan if row.values.get(name) is None else row.values[name] for row in self.rows])


def _solve(system: str, params: RateParams, settings, guess=None):
    m = build(system, params)
    rho = steady_state(m, settings, guess)
    return {label: observables(m, rho, label, settings) for label in m.labels}, rho


def _close(x: float | None, y: float | None, tol: float) -> bool:
    if x is None or y is None:
        return x is None and y is None
    return abs(x - y) <= tol * max(abs(x), abs(y), 1e-300)


def _agree(lo: dict[str, ObservableSet], hi: dict[str, ObservableSet], tol: float) -> bool:
    return all(
        _close(lo[k].occupation, hi[k].occupation, tol) and _close(lo[k].g2, hi[k].g2, tol) for k in lo
    )


@functools.lru_cache(maxsize=20000)
def _converged(system: str, params: RateParams, settings: NumericSettings):
    N = params.fock_trunc
    lo, rho = _solve(system, params, settings)
    while True:
        # the N solution, zero-padded, seeds the N + 2 solve
        hi, rho = _solve(system, replace(params, fock_trunc=N + 2), settings, rho)
        if _agree(lo, hi, settings.convergence_tol):
            return lo, N, True
        if N + 2 >= settings.max_fock:
            return hi, N + 2, False
        lo, N = hi, N + 2


def clear_cache() -> None:
    """Forget memoized solves (in this process)."""
    _converged.cache_clear()


def solve_converged(system: str, params: RateParams, labels, settings: NumericSettings = DEFAULT_SETTINGS):
    """Steady-state observables at truncation N, verified against N + 2.

    Every labelled operator of the model must agree between N and N + 2 to
    ``convergence_tol`` (relative); otherwise N is raised in steps of 2 up to
    ``max_fock``.  Returns (observables, N, converged), with observables
    mapping each of ``labels`` to its ObservableSet.  Results are memoized per
    process, so presets sharing grid points do not solve twice.
    """
    obs, N, ok = _converged(system, params, settings)
    missing = [label for label in labels if label not in obs]
    if missing:
        raise UnknownLabel(f"{system} model has no operator {missing[0]!r}; known: {', '.join(obs)}")
    return {label: obs[label] for label in labels}, N, ok


def evaluate_point(spec: SweepSpec, point: tuple[float, ...], settings: NumericSettings = DEFAULT_SETTINGS) -> SweepRow:
    values: dict[str, float | None] = {c: None for c in spec.observable_columns()}
    try:
        params = spec.point_params(point)
        converged, fock = True, params.fock_trunc
        for system in (spec.system, *spec.compare):
            prefix = "" if system == spec.system else f"{system}_"
            obs, n_used, ok = solve_converged(system, params, spec.labels, settings)
            converged &= ok
            fock = max(fock, n_used)
            for label, quantity in spec.observe:
                values[f"{prefix}{quantity}_{label}"] = getattr(obs[label], quantity)
    except (CavityError, np.linalg.LinAlgError) as exc:
        log.warning("point %s failed: %s", point, exc)
        return SweepRow(point, values, False, 0, status=f"error: {type(exc).__name__}: {exc}")
    return SweepRow(point, values, converged, fock)


def _limit_blas():
    threadpool_limits(limits=1)


def _evaluate_chunk(args):
    spec, points, settings = args
    return [evaluate_point(spec, p, settings) for p in points]


def run_sweep(spec: SweepSpec, settings: NumericSettings = DEFAULT_SETTINGS, workers: int = 1) -> SweepResult:
    """Evaluate every grid point of ``spec``; rows are in row-major axis order."""
    grid = spec.grid()
    log.info("sweep %s: %d points, %d worker(s)", spec.name or spec.system, len(grid), workers)
    if workers <= 1:
        with threadpool_limits(limits=1):
            rows = [evaluate_point(spec, p, settings) for p in grid]
    else:
        size = max(1, len(grid) // (4 * workers))
        chunks = [(spec, grid[i : i + size], settings) for i in range(0, len(grid), size)]
        with ProcessPoolExecutor(max_workers=workers, initializer=_limit_blas) as pool:
            rows = [row for chunk in pool.map(_evaluate_chunk, chunks) for row in chunk]
    if all(row.status != "ok" for row in rows):
        raise SweepFailed(f"all {len(rows)} points failed; first error: {rows[0].status}")
    return SweepResult(spec, rows)
