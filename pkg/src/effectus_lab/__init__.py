"""Finite and finite-dimensional models of effect algebras, effectuses and
sequential products, with executable law checks."""

__version__ = "0.1.0"
