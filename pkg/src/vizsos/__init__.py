"""Exact sum-of-squares certificates for Vizing's inequality on graphs with
a dominating vertex."""

__version__ = "0.1.0"
