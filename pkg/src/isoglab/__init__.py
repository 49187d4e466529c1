"""Elliptic curves, isogenies and isogeny graphs over small finite fields."""

__version__ = "0.1.0"
