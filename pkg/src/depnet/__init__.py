"""Epidemic dynamics on networks with copula-dependent push and pull attacks."""
from .copula import CopulaSpec, Family
from .dynamics import DependenceModel, EpidemicParams, simulate, step
from .equilibrium import solve, solve_star
from .graph import Graph, spectral_radius

__all__ = [
    "CopulaSpec", "Family", "DependenceModel", "EpidemicParams", "simulate", "step",
    "solve", "solve_star", "Graph", "spectral_radius",
]
__version__ = "0.1.0"
