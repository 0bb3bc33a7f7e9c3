"""Quasistatic versus bang-bang optimization on Hamming-symmetric landscapes."""

__version__ = "0.1.0"
