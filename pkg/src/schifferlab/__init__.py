"""Numerical laboratory for Schiffer's conjecture on centrally symmetric planar domains."""
__version__ = "0.1.0"
