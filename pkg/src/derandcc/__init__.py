"""Deterministic distributed MIS and spanner construction with exact
bandwidth accounting and certified derandomization."""

__version__ = "0.1.0"
