"""Conformal moduli, ring capacities and uniform-perfectness analysis of Julia sets.

Submodules
----------
sphere       chordal metric, round rings and closed-form moduli
modulus      discrete n-modulus solver, capacities, Teichmüller estimates, quasihyperbolic distance
dynamics     built-in uniformly quasiregular maps and Julia set sampling
perfectness  separating-annulus search and modulus inequality checks
dimension    box-counting dimension and Hausdorff content estimates
generators   reference clouds (Cantor sets, circles, segments, balls)
io           CSV clouds, JSON reports and SVG plots
cli          the ``uniperf`` command
"""

__version__ = "0.1.0"

from .cloud import PointCloud
from .dimension import BoxCountingDimension, fit_dimension
from .dynamics import get_preset, sample_julia
from .modulus import ring_capacity, spherical_ring_capacity, tau_estimate
from .perfectness import UniformPerfectness, analyze
from .sphere import Metric, RoundRing, ring_modulus

__all__ = [
    "__version__",
    "PointCloud",
    "BoxCountingDimension",
    "fit_dimension",
    "get_preset",
    "sample_julia",
    "ring_capacity",
    "spherical_ring_capacity",
    "tau_estimate",
    "UniformPerfectness",
    "analyze",
    "Metric",
    "RoundRing",
    "ring_modulus",
]
