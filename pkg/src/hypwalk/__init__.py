"""Hyperbolic reflection/Fuchsian groups, singularity criteria and walk simulation."""

__version__ = "0.1.0"
