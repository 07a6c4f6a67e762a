"""Energetic cost of executing input-output strategies with classical or quantum memory."""

__version__ = "0.1.0"
