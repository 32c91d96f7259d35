"""Reaction-diffusion-chemotaxis model of dystrophic muscle damage and its invasion fronts."""

from .equilibria import Regime, classify_regime, equilibrium_report, pathological_equilibria
from .errors import DomainProblem, DystroError, NumericalFailure
from .linear import dispersion, gamma_cutoff, min_speed, s_plus
from .model import DimensionalParams, DimensionlessParams, State, nondimensionalize, reaction_rhs

__version__ = "0.1.0"

__all__ = [
    "DimensionalParams",
    "DimensionlessParams",
    "DomainProblem",
    "DystroError",
    "NumericalFailure",
    "Regime",
    "State",
    "classify_regime",
    "dispersion",
    "equilibrium_report",
    "gamma_cutoff",
    "min_speed",
    "nondimensionalize",
    "pathological_equilibria",
    "reaction_rhs",
    "s_plus",
    "__version__",
]
