"""Finite q-deformed Dirac models on quantum SU(2), U(2) and the Podles sphere."""

from .scalars import ExactScalar, NumScalar, QContext, q_factor, q_int

__all__ = ["QContext", "NumScalar", "ExactScalar", "q_int", "q_factor"]

__version__ = "0.1.0"
