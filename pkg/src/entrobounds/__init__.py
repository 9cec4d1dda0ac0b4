"""Entropy bounds on the information gained by quantum measurements."""

__version__ = "0.1.0"
