"""Exact verification workbench for the generalized loop Heisenberg-Virasoro algebra."""

__version__ = "0.1.0"
