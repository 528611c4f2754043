"""Exact numerics for periodically driven qubit chains."""

__version__ = "0.1.0"
