"""Exact and approximate best responses in the one-round Voronoi game on networks."""

__version__ = "0.1.0"
