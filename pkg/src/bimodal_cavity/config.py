"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored.  Every key has a default and an
empty file yields the default parameter set
(g_a = g_b = 10, kappa = 20, gamma = 1, drive_E = 1).  Rates are GHz (value/2pi).

Recognised keys: the RateParams fields (plus ``g``, ``kappa`` and ``ratio``
shorthands), any NumericSettings field, ``system``, ``grid_points_1d``,
``grid_points_2d``, ``out``, ``format`` (csv | csv+gnuplot), ``threads``,
and for custom sweeps ``axis1``/``axis2`` (``name:start:stop:points[:log]``),
``observe`` (``label:quantity, ...``), ``drive_rule`` and ``compare``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import CavityError, ConfigError
from .model import SWEEPABLE, SYSTEMS, RateParams
from .numcore import NumericSettings
from .sweep import Axis

FORMATS = ("csv", "csv+gnuplot")
_SETTING_TYPES = {f.name: f.type for f in fields(NumericSettings)}


@dataclass(frozen=True)
class RunConfig:
    params: RateParams = field(default_factory=RateParams)
    system: str = "bimodal"
    settings: NumericSettings = field(default_factory=NumericSettings)
    grid_points_1d: int = 241
    grid_points_2d: int = 61
    out: str | None = None
    format: str = "csv"
    threads: int = 1
    axes: tuple[Axis, ...] = ()
    observe: tuple[tuple[str, str], ...] = (("a", "occupation"), ("a", "transmission"), ("a", "g2"))
    drive_rule: str = "fixed"
    compare: tuple[str, ...] = ()


def parse_lines(lines) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        values[key.strip()] = value.strip()
    return values


def read_config_file(path: str | Path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_lines(text.splitlines())


def _number(key: str, value: str, kind=float):
    try:
        number = kind(value)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}") from None
    return number


def _axis(key: str, value: str) -> Axis:
    parts = [p.strip() for p in value.split(":")]
    if len(parts) not in (4, 5):
        raise ConfigError(f"{key}: expected name:start:stop:points[:linear|log], got {value!r}")
    spacing = parts[4] if len(parts) == 5 else "linear"
    try:
        return Axis(parts[0], _number(key, parts[1]), _number(key, parts[2]), _number(key, parts[3], int), spacing)
    except CavityError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _observe(key: str, value: str) -> tuple[tuple[str, str], ...]:
    pairs = []
    for item in filter(None, (s.strip() for s in value.split(","))):
        label, sep, quantity = item.partition(":")
        if not sep:
            raise ConfigError(f"{key}: expected label:quantity, got {item!r}")
        pairs.append((label.strip(), quantity.strip()))
    if not pairs:
        raise ConfigError(f"{key}: empty")
    return tuple(pairs)


def build_config(values: dict[str, str], base: RunConfig | None = None) -> RunConfig:
    """Apply raw string ``values`` on top of ``base`` (defaults if None)."""
    cfg = base or RunConfig()
    param_updates: dict[str, float] = {}
    setting_updates: dict[str, float | int] = {}
    updates: dict[str, object] = {}
    axes = {i: a for i, a in enumerate(cfg.axes, 1)}
    for key, value in values.items():
        if key in SWEEPABLE:
            kind = int if key == "fock_trunc" else float
            param_updates[key] = _number(key, value, kind)
        elif key in _SETTING_TYPES:
            kind = int if _SETTING_TYPES[key] in (int, "int") else float
            setting_updates[key] = _number(key, value, kind)
        elif key in ("grid_points_1d", "grid_points_2d", "threads"):
            updates[key] = _number(key, value, int)
        elif key == "system":
            if value not in SYSTEMS:
                raise ConfigError(f"system must be one of {', '.join(SYSTEMS)}, got {value!r}")
            updates[key] = value
        elif key == "format":
            if value not in FORMATS:
                raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got {value!r}")
            updates[key] = value
        elif key == "out":
            updates[key] = value or None
        elif key in ("axis1", "axis2"):
            axes[int(key[-1])] = _axis(key, value)
        elif key == "observe":
            updates[key] = _observe(key, value)
        elif key == "drive_rule":
            updates[key] = value
        elif key == "compare":
            updates[key] = tuple(filter(None, (s.strip() for s in value.split(","))))
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
    try:
        params = cfg.params.with_values(**param_updates)
        settings = replace(cfg.settings, **setting_updates)
    except CavityError as exc:
        raise ConfigError(str(exc)) from exc
    if axes:
        updates["axes"] = tuple(axes[i] for i in sorted(axes))
    return replace(cfg, params=params, settings=settings, **updates)


def parse_assignments(items) -> dict[str, str]:
    """``["key=value", ...]`` from repeated ``--set`` flags."""
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out
