"""Finite-dimensional toolkit for commuting pairs over the symmetrized bidisc.

Fundamental operators, Sz.-Nagy type dilations represented exactly as banded
sequence-space operators, and functional models of Gamma-contractions.
"""

from .dilation import build_sznagy, verify_dilation, verify_gamma_unitary_structure
from .errors import GammaLabError
from .fundop import FundamentalPair, identity_suite, solve_fundamental
from .gamma import OperatorPair, classify_pair, is_gamma_contraction, point_in_gamma
from .model import build_coisometric_model, dmp_check, pure_gamma_isometry_from_A
from .numlin import defect, numerical_radius, principal_sqrt, psd_sqrt
from .seqop import FiniteVector, SeqOperator, SlotLayout

__all__ = [
    "FiniteVector",
    "FundamentalPair",
    "GammaLabError",
    "OperatorPair",
    "SeqOperator",
    "SlotLayout",
    "build_coisometric_model",
    "build_sznagy",
    "classify_pair",
    "defect",
    "dmp_check",
    "identity_suite",
    "is_gamma_contraction",
    "numerical_radius",
    "point_in_gamma",
    "principal_sqrt",
    "psd_sqrt",
    "pure_gamma_isometry_from_A",
    "solve_fundamental",
    "verify_dilation",
    "verify_gamma_unitary_structure",
]
