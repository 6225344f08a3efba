"""Tuned software effort estimators and the machinery to benchmark them."""

__version__ = "0.1.0"
