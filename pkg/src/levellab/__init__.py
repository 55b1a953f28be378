"""Levels of DG modules over graded algebras, computed from finite presentations."""

__version__ = "0.1.0"
