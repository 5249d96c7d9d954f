"""Weil-Petersson volume bounds from ribbon-graph cell decompositions."""

__version__ = "0.1.0"
