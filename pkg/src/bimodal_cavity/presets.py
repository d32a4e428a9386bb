"""Sweep specifications that regenerate each simulated figure.

Parameters are GHz (value/2pi).  Exact grid
densities are not known, so 1-D axes default to 241 points and the g-kappa
maps to 61 x 61; both are adjustable (a 21 x 21 map is the quick variant).
"""
from __future__ import annotations

from .errors import UnknownFigure
from .model import RateParams
from .sweep import Axis, SweepSpec

FIGURES = ("fig1c", "fig1d", "fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5", "fig6")

FIG1 = RateParams(g_a=10.0, g_b=10.0, kappa_a=20.0, kappa_b=20.0, gamma=1.0, drive_E=1.0)


def _detuning(points: int, span: float = 30.0) -> Axis:
    return Axis("delta", -span, span, points)


def _g_kappa(points: int) -> tuple[Axis, Axis]:
    return Axis("g", 1.0, 50.0, points), Axis("kappa", 1.0, 50.0, points)


def figure_preset(name: str, grid_1d: int = 241, grid_2d: int = 61, base: RateParams | None = None) -> SweepSpec:
    """SweepSpec for figure ``name``; ``base`` overrides the reference parameters."""
    p = FIG1 if base is None else base
    if name == "fig1c":
        return SweepSpec(p, "bimodal", (_detuning(grid_1d),), (("a", "transmission"),), compare=("single",), name=name)
    if name == "fig1d":
        return SweepSpec(p, "bimodal", (_detuning(grid_1d),), (("a", "g2"),), compare=("single",), name=name)
    if name == "fig2a":
        return SweepSpec(p, "single", _g_kappa(grid_2d), (("a", "g2"),), drive_rule="polariton", name=name)
    if name == "fig2b":
        return SweepSpec(p, "bimodal", _g_kappa(grid_2d), (("a", "g2"),), name=name)
    if name in ("fig3a", "fig3b"):
        quantity = "transmission" if name == "fig3a" else "g2"
        observe = tuple((label, quantity) for label in ("alpha", "beta", "a"))
        return SweepSpec(p, "effective", (_detuning(grid_1d),), observe, name=name)
    if name == "fig4a":
        # reaches delta_ab = 2 kappa for every series, same step as the detuning axes
        axes = (Axis("kappa", 10.0, 40.0, 4), Axis("delta_ab", 0.0, 80.0, (grid_1d - 1) * 4 // 3 + 1))
        return SweepSpec(p, "bimodal", axes, (("a", "g2"),), name=name)
    if name == "fig4b":
        axes = (Axis("g_a", 5.0, 20.0, 4), Axis("ratio", 0.1, 10.0, grid_1d, "log"))
        return SweepSpec(p, "bimodal", axes, (("a", "g2"),), name=name)
    if name == "fig5":
        return SweepSpec(p, "bimodal", _g_kappa(grid_2d), (("b", "transmission"), ("b", "g2")), name=name)
    if name == "fig6":
        observe = (("a", "transmission"), ("a", "g2"))
        return SweepSpec(p, "molecule", (_detuning(grid_1d, 60.0),), observe, compare=("bimodal",), name=name)
    raise UnknownFigure(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
