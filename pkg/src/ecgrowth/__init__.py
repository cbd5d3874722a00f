"""Electricity-consumption growth modelling from macroeconomic drivers."""

__version__ = "0.1.0"
