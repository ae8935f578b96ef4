"""Optimal-weight log-linear fusion of ToA/AoA likelihoods for multi-monostatic localization."""
from .errors import ConfigError, DegenerateGeometry, NonConvergence
from .kernels import BACKEND

__all__ = ["BACKEND", "ConfigError", "DegenerateGeometry", "NonConvergence"]
__version__ = "0.1.0"
