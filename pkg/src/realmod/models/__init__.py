"""Concrete structures: arithmetic, truncated set hierarchy, Scott graph."""
