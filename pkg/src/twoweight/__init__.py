"""Dyadic two-weight norm inequalities: Orlicz maximal operators, sparse
operators, weight constants and Rubio de Francia extrapolation on a discrete
model space."""

__version__ = "0.1.0"

from . import kernels
from .domain import CubeId, DyadicDomain
from .errors import (DegenerateInputError, DomainError, InvariantError, SparsityError,
                     UnboundedConjugateError)
from .orlicz import HL, Associate, Lr, OrliczSpace, maximal
from .rubio import RdFConfig
from .sparse import SparseFamily
from .weights import WeightPair
from .youngfn import YoungFunction

BACKEND = kernels.BACKEND

__all__ = [
    "BACKEND",
    "CubeId",
    "DyadicDomain",
    "YoungFunction",
    "HL",
    "Lr",
    "OrliczSpace",
    "Associate",
    "maximal",
    "SparseFamily",
    "WeightPair",
    "RdFConfig",
    "DomainError",
    "DegenerateInputError",
    "InvariantError",
    "SparsityError",
    "UnboundedConjugateError",
]
