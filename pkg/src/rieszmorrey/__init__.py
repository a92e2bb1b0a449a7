"""Generalized Riesz potentials, weighted Morrey norms and Muckenhoupt diagnostics."""

__version__ = "0.1.0"
