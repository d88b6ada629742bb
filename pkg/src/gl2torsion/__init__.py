"""Predicted rational torsion orders of modular abelian varieties of GL2-type."""

__version__ = "0.1.0"
