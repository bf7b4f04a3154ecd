"""Numerical laboratory for wave-particle duality in asymmetric two-path interference."""
from .discrimination import Strategy
from .interferometer import ExperimentConfig
from .montecarlo import NoiseModel

__all__ = ["ExperimentConfig", "NoiseModel", "Strategy"]
__version__ = "0.1.0"
