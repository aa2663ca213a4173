"""Seedable system-level simulator for RIS-assisted multi-cell networks."""

__version__ = "0.1.0"
