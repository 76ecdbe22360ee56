"""Capacity bounds and simulation tools for underspread WSSUS fading channels."""

__version__ = "0.1.0"
