"""Elliptic 6j-symbols, 8VSOS partition functions and A_n elliptic
hypergeometric series, with numerical identity verification."""
from .core import EllipticParams

__version__ = "0.1.0"
__all__ = ["EllipticParams"]
