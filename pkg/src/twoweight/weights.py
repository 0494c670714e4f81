"""Weight-class constants and the example weight pairs.

Every supremum enumerates all dyadic cubes of every configured grid, so the
reported constants are exact for the discrete model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .domain import CubeId, DyadicDomain, as_function, power_weight
from .errors import DomainError
from .orlicz import (HL, Lr, OrliczSpace, cube_norm_heap, lp_norm_on_cube, maximal)
from .sparse import SparseFamily
from .youngfn import YoungFunction

__all__ = [
    "WeightPair",
    "two_weight_ap_constant",
    "neugebauer_constant",
    "bump_constant",
    "reverse_holder_constant",
    "a1_constant",
    "make_pair_mq",
    "make_pair_ma_inv",
    "constant_pair",
    "power_weight_blowup",
    "check_unit_normalized",
]

BanachSpaceSpec = Union[Lr, OrliczSpace]


def _conj(p):
    return p / (p - 1.0)


def _positive(D, f, name):
    f = as_function(D, f, name)
    if np.any(f <= 0):
        raise DomainError(f"{name} must be strictly positive")
    return f


@dataclass(frozen=True, eq=False)
class WeightPair:
    """Weights ``(w, v)`` with the space ``Y`` measuring ``1/v`` and the bump exponent ``q``."""

    w: np.ndarray
    v: np.ndarray
    Y: BanachSpaceSpec
    q: float

    def __post_init__(self):
        if not self.q > 1.0:
            raise DomainError("bump exponent q must exceed 1")
        for name in ("w", "v"):
            arr = np.asarray(getattr(self, name), float)
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise DomainError(f"{name} must be finite and strictly positive")
            object.__setattr__(self, name, arr)


def _sup(D: DyadicDomain, heap_of_shift, cubes=None):
    """Maximum of per-cube values and the cube attaining it."""
    if cubes is not None:
        cubes = list(cubes.cubes if isinstance(cubes, SparseFamily) else cubes)
        by_shift = {}
        for c in cubes:
            c = CubeId(*c)
            by_shift.setdefault(c.shift, []).append(c)
        best, arg = -math.inf, None
        for s, cs in by_shift.items():
            with np.errstate(divide="ignore", invalid="ignore"):
                h = heap_of_shift(s)
            for c in cs:
                if h[c.heap] > best:
                    best, arg = float(h[c.heap]), c
        return best, arg
    best, arg = -math.inf, None
    for s in range(D.n_grids):
        with np.errstate(divide="ignore", invalid="ignore"):
            h = heap_of_shift(s)
        h[0] = -math.inf  # unused heap slot
        k = int(np.argmax(h[1:])) + 1
        if h[k] > best:
            best, arg = float(h[k]), D.cube_from_heap(s, k)
    return best, arg


def two_weight_ap_constant(D: DyadicDomain, w, v, p: float, with_witness: bool = False):
    """sup_Q (avg_Q w) * (avg_Q v^(-p'/p))^(p-1)."""
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    w = _positive(D, w, "w")
    v = _positive(D, v, "v")
    e = _conj(p) / p
    vv = v ** (-e)

    def heap(s):
        return D.heap_averages(w, s) * D.heap_averages(vv, s) ** (p - 1.0)

    val, arg = _sup(D, heap)
    return (val, arg) if with_witness else val


def neugebauer_constant(D: DyadicDomain, w, v, p: float, r: float, with_witness: bool = False):
    """sup_Q (avg_Q w^(pr))^(1/pr) * (avg_Q v^(-p'r))^(1/(p'r))."""
    if not (p > 1.0 and r >= 1.0):
        raise DomainError("need p > 1 and r >= 1")
    w = _positive(D, w, "w")
    v = _positive(D, v, "v")
    pp = _conj(p)
    a, b = w ** (p * r), v ** (-pp * r)

    def heap(s):
        return D.heap_averages(a, s) ** (1.0 / (p * r)) * D.heap_averages(b, s) ** (1.0 / (pp * r))

    val, arg = _sup(D, heap)
    return (val, arg) if with_witness else val


def bump_constant(D: DyadicDomain, pair: WeightPair, exponent: float, cubes=None):
    """sup over cubes of |w|_{exponent,Q} |1/v|_{Y,Q}; returns ``(K, witness)``.

    ``cubes`` restricts the supremum (e.g. to a sparse family).
    """
    inv_v = 1.0 / pair.v

    def heap(s):
        return cube_norm_heap(D, pair.w, Lr(exponent), s) * cube_norm_heap(D, inv_v, pair.Y, s)

    return _sup(D, heap, cubes)


def reverse_holder_constant(D: DyadicDomain, rho, p: float, with_witness: bool = False):
    """sup_Q (avg_Q rho^p)^(1/p) / avg_Q rho over every cube of every grid."""
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    rho = _positive(D, rho, "rho")
    rp = rho**p

    def heap(s):
        return D.heap_averages(rp, s) ** (1.0 / p) / D.heap_averages(rho, s)

    val, arg = _sup(D, heap)
    val = max(val, 1.0)
    return (val, arg) if with_witness else val


def a1_constant(D: DyadicDomain, w) -> float:
    """max over cells of (M w) / w with M the dyadic Hardy-Littlewood maximal function."""
    w = _positive(D, w, "w")
    return max(1.0, float(np.max(maximal(D, w, HL()) / w)))


def check_unit_normalized(Y: BanachSpaceSpec) -> None:
    """Raise unless constants have unit norm in ``Y``."""
    if isinstance(Y, OrliczSpace) and abs(Y.A(1.0) - 1.0) > 1e-12:
        raise DomainError("Y must be normalised so that A(1) = 1")


def constant_pair(D: DyadicDomain, Y: BanachSpaceSpec = Lr(2.0), q: float = 3.0, c: float = 1.0) -> WeightPair:
    return WeightPair(np.full(D.n, float(c)), np.full(D.n, float(c)), Y, q)


def make_pair_mq(D: DyadicDomain, u, q: float, Y: BanachSpaceSpec) -> WeightPair:
    """The pair (u, M_q u); its bump constant is at most 1 for exponents <= q."""
    check_unit_normalized(Y)
    u = _positive(D, u, "u")
    return WeightPair(u, maximal(D, u, Lr(q)), Y, q)


def make_pair_ma_inv(D: DyadicDomain, u, A: YoungFunction, p: float, w, Y: BanachSpaceSpec,
                     q: float | None = None):
    """The pair ((M_A u)^(1-p), w) and its hypothesis constant.

    The hypothesis constant is sup_Q |u|_{A,Q}^(1-p) |1/w|_{Y,Q}; it bounds
    the bump constant of the pair for every exponent.  ``q`` defaults to
    ``p + 1``.
    """
    u = _positive(D, u, "u")
    w = _positive(D, w, "w")
    if q is None:
        q = p + 1.0
    first = maximal(D, u, OrliczSpace(A)) ** (1.0 - p)
    inv_w = 1.0 / w

    def heap(s):
        nu = cube_norm_heap(D, u, OrliczSpace(A), s)
        return nu ** (1.0 - p) * cube_norm_heap(D, inv_w, Y, s)

    hyp, _ = _sup(D, heap)
    return WeightPair(first, w, Y, q), hyp


def centered_cube_domain(depth: int) -> tuple[DyadicDomain, CubeId]:
    """Uniform domain whose second grid (offset one cell) has a cube of two
    cells centred on x = 1/2, and that cube."""
    if depth < 2:
        raise DomainError("depth must be >= 2")
    D = DyadicDomain.with_offsets(depth, (0, 1))
    n = D.n
    return D, CubeId(1, depth - 1, n // 4 - 1)


def power_weight_blowup(alpha: float, beta: float, p: float, scales: Iterable[int]) -> list[float]:
    """|w|_{p,Q0} |1/v|_{p',Q0} for w = |x-1/2|^-alpha, v = |x-1/2|^-beta.

    ``Q0`` is the smallest dyadic cube with 1/2 in its interior: two cells
    wide, on the grid shifted by one cell.  Each entry of ``scales`` is a
    grid depth.
    """
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    pp = _conj(p)
    out = []
    for L in scales:
        D, Q0 = centered_cube_domain(int(L))
        w = power_weight(D, 0.5, alpha)
        v = power_weight(D, 0.5, beta)
        out.append(lp_norm_on_cube(D, w, Q0, p) * lp_norm_on_cube(D, 1.0 / v, Q0, pp))
    return out
