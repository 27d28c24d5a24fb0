"""Deterministic desktop-to-mobile chart adaptation."""

__version__ = "0.1.0"
