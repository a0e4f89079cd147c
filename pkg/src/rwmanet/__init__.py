"""Discrete-event MANET simulator: random-walk routing vs. AODV-lite."""

__version__ = "0.1.0"
