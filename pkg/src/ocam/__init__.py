"""Ownership-and-contribution alignment versus technical debt density."""

__version__ = "0.1.0"
