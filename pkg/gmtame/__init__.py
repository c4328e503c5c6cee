"""Brieskorn lattices, spectrum and monodromy at infinity of tame polynomials."""

__version__ = "1.0.0"
