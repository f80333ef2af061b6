"""Spectral toolkit for one-dimensional quantum walks with long-range coins."""

__version__ = "0.1.0"
