"""Fuchsian systems, middle convolution and monodromy on elliptic curves."""

__version__ = "0.1.0"
