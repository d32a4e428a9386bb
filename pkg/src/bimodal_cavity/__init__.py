"""Photon statistics of a quantum dot coupled to a lossy bimodal cavity.

Build a model with :func:`build`, solve it with :func:`steady_state` and read
mode occupations, transmission and g2(0) with :func:`observables`.  Sweeps and
the figure presets live in :mod:`bimodal_cavity.sweep` and
:mod:`bimodal_cavity.presets`; the command line is ``bimodal-cavity``.
"""
from .dynamics import DensityMatrix, ObservableSet, evolve, g2_zero, liouvillian, observables, steady_state
from .errors import CavityError
from .model import SYSTEMS, HilbertSpace, RateParams, SystemModel, build
from .numcore import DEFAULT_SETTINGS, NumericSettings
from .presets import FIGURES, figure_preset
from .spectra import bimodal_manifold, jc_manifold
from .sweep import Axis, SweepResult, SweepSpec, run_sweep, solve_converged

__all__ = [
    "Axis", "CavityError", "DEFAULT_SETTINGS", "DensityMatrix", "FIGURES", "HilbertSpace",
    "NumericSettings", "ObservableSet", "RateParams", "SYSTEMS", "SweepResult", "SweepSpec",
    "SystemModel", "bimodal_manifold", "build", "evolve", "figure_preset", "g2_zero",
    "jc_manifold", "liouvillian", "observables", "run_sweep", "solve_converged", "steady_state",
]
__version__ = "0.1.0"
