"""Superadiabatic Landau-Zener dynamics toolkit."""

__version__ = "0.1.0"
__author__ = "superlz contributors"
