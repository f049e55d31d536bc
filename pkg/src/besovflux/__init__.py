"""Littlewood-Paley, Besov-norm and flux diagnostics for ideal flow on the torus."""

__version__ = "0.1.0"
