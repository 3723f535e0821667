"""Workbench for dynamical irreducibility of integer polynomials modulo primes."""

from .exactalg import IntPoly, RatPoly, ResDecomp, iterate, res_decompose, resultant

__all__ = ["IntPoly", "RatPoly", "ResDecomp", "iterate", "res_decompose", "resultant"]
__version__ = "0.1.0"
