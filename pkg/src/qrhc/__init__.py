"""Numerical toolkit for quantum reverse hypercontractivity."""

__version__ = "0.1.0"
