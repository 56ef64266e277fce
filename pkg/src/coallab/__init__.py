"""Simulation and verification toolkit for Lambda-n-coalescents."""

from .errors import CoalLabError
from .measures import CoalescentMeasure, beta, density, kingman
from .rates import FirstJumpLaw, RateTable, rate_table
from .rng import SeedSpec

__all__ = [
    "CoalLabError",
    "CoalescentMeasure",
    "FirstJumpLaw",
    "RateTable",
    "SeedSpec",
    "beta",
    "density",
    "kingman",
    "rate_table",
]
__version__ = "0.1.0"
