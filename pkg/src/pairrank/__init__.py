"""Geometric rank and forking independence for imaginaries in pairs of algebraically closed fields."""
__version__ = "0.1.0"
