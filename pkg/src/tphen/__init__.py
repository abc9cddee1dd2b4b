"""Temporal phenomena definition language and stream engine."""

__version__ = "0.1.0"
