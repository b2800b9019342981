"""Spectra of one-qutrit marginals of pure three-qutrit states.

Membership test for the feasible spectra, witness construction and
numerical verification tools.
"""
from .constructor import construct, construct_numeric
from .decomposer import lp_decompose, solve_simplex_coords
from .errors import (
    DomainError,
    InfeasibleError,
    NotInHullError,
    QutritMarginalError,
    RangeError,
    RegionError,
)
from .polytope import (
    EPoint,
    Functional,
    InequalityId,
    corner_points,
    eval_functional,
    eval_inequality,
    facet_simplices,
    membership,
)
from .tensor_core import StateTensor, canonicalize, rdm, spectra

__version__ = "0.1.0"

__all__ = [
    "EPoint", "Functional", "InequalityId", "StateTensor",
    "DomainError", "InfeasibleError", "NotInHullError", "QutritMarginalError", "RangeError",
    "RegionError", "canonicalize", "construct", "construct_numeric", "corner_points",
    "eval_functional", "eval_inequality", "facet_simplices", "lp_decompose", "membership",
    "rdm", "solve_simplex_coords", "spectra",
]
