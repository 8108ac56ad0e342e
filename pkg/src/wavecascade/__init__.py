"""Stochastic pseudo-spectral transport in wavenumber space with analytical oracles."""

__version__ = "0.1.0"
