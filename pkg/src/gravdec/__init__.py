"""Gravitational decoherence of a non-relativistic spin-1/2 particle."""

__version__ = "0.1.0"
