"""Steklov windows - optimal trace constants with boundary windows on oscillating domains."""

__version__ = "0.1.0"
