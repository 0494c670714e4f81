"""Normalised cube norms and the dyadic maximal operators built from them.

Maximal operators are specified by one of:

* ``HL()``                 cube averages (Hardy-Littlewood)
* ``Lr(q)``                normalised L^q norms, q in [1, inf]
* ``OrliczSpace(A)``       Luxemburg norms for the Young function A
* ``Associate(Y)``         the norm of the associate space of ``Y``

``Lr`` and ``OrliczSpace`` double as the Banach function space ``Y`` of the
bump conditions.  The associate of ``OrliczSpace(A)`` is realised as the
Luxemburg norm of a tabulated complementary function, rescaled in its
argument so that constants keep norm one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from . import kernels
from .domain import CubeId, DyadicDomain, as_function
from .errors import DomainError
from .youngfn import YoungFunction, conjugate_table, inverse

__all__ = [
    "HL",
    "Lr",
    "OrliczSpace",
    "Associate",
    "associate",
    "associate_young",
    "lp_norm_on_cube",
    "orlicz_norm_on_cube",
    "norm_on_cube",
    "generalized_holder_gap",
    "cube_norm_heap",
    "maximal",
    "iterated_maximal",
    "maximal_indicator_closed_form",
    "linfty_bound_check",
    "space_norm",
    "HOLDER_CONSTANT",
]

NORM_RTOL = 1e-10
CHECK_SLACK = 1e-8
# Luxemburg-Luxemburg Hoelder constant; the constant-1 form needs the
# associate (Orlicz) norm on one side.
HOLDER_CONSTANT = 2.0
ASSOCIATE_TABLE_POINTS = 512


@dataclass(frozen=True)
class HL:
    def to_dict(self):
        return {"kind": "hl"}


@dataclass(frozen=True)
class Lr:
    r: float

    def __post_init__(self):
        if not self.r >= 1.0:
            raise DomainError("Lr needs r >= 1")

    def to_dict(self):
        return {"kind": "lr", "r": self.r}


@dataclass(frozen=True)
class OrliczSpace:
    A: YoungFunction

    def to_dict(self):
        return {"kind": "orlicz", "young": self.A.to_dict()}


@dataclass(frozen=True)
class Associate:
    Y: Union[Lr, OrliczSpace]

    def to_dict(self):
        return {"kind": "associate", "space": self.Y.to_dict()}


BanachSpaceSpec = Union[Lr, OrliczSpace]
MaximalSpec = Union[HL, Lr, OrliczSpace, Associate]


def _dual_exponent(r):
    if math.isinf(r):
        return 1.0
    if r == 1.0:
        return math.inf
    return r / (r - 1.0)


@lru_cache(maxsize=64)
def associate_young(A: YoungFunction, n: int = ASSOCIATE_TABLE_POINTS) -> YoungFunction:
    """Tabulated complementary function of ``A``, argument-normalised.

    The table is rescaled to ``t -> Abar(k t)`` with ``k = max(1, Abar^-1(1))``
    so that ``Abar(1) = 1`` whenever that makes the function larger.  Larger
    Young functions give larger norms, so the Luxemburg Hoelder inequality
    with constant 2 keeps holding against the computed norms.
    """
    tab = conjugate_table(A, n)
    k = max(1.0, inverse(tab, 1.0))
    if k == 1.0:
        return tab
    return YoungFunction.table([(t / k, a) for t, a in tab.params])


def associate(Y: BanachSpaceSpec) -> BanachSpaceSpec:
    if isinstance(Y, Lr):
        return Lr(_dual_exponent(Y.r))
    if isinstance(Y, OrliczSpace):
        return OrliczSpace(associate_young(Y.A))
    raise DomainError(f"no associate space for {Y!r}")


def _resolve(spec):
    if isinstance(spec, Associate):
        return associate(spec.Y)
    if isinstance(spec, Lr) and spec.r == 1.0:
        return HL()
    return spec


# -- single-cube norms ------------------------------------------------------------

def lp_norm_on_cube(D: DyadicDomain, f, Q: CubeId, p: float) -> float:
    """(avg_Q f^p)^(1/p); the maximum over Q's cells when ``p`` is infinite."""
    if not p >= 1.0:
        raise DomainError("p must be >= 1")
    f = as_function(D, f)
    cells = D.cube_cells(Q)
    if math.isinf(p):
        return float(np.max(f[cells]))
    m = D.mass[cells]
    return (math.fsum(f[cells] ** p * m) / math.fsum(m)) ** (1.0 / p)


def orlicz_norm_on_cube(D: DyadicDomain, f, Q: CubeId, A: YoungFunction) -> float:
    """Luxemburg norm inf{lam > 0 : avg_Q A(|f|/lam) <= 1} by bisection."""
    f = as_function(D, f)
    cells = D.cube_cells(Q)
    code, params, tt, ta = A.kernel_spec()
    out = kernels.luxemburg_blocks(f[cells], D.mass[cells], cells.size, code, params, tt, ta, NORM_RTOL)
    return float(out[0])


def norm_on_cube(D: DyadicDomain, f, Q: CubeId, spec) -> float:
    spec = _resolve(spec)
    if isinstance(spec, HL):
        return D.average(f, Q)
    if isinstance(spec, Lr):
        return lp_norm_on_cube(D, f, Q, spec.r)
    if isinstance(spec, OrliczSpace):
        return orlicz_norm_on_cube(D, f, Q, spec.A)
    raise DomainError(f"unsupported norm spec {spec!r}")


def generalized_holder_gap(D: DyadicDomain, f, g, Q: CubeId, A: YoungFunction) -> float:
    """``2 |f|_{A,Q} |g|_{Abar,Q} - avg_Q |fg|``; nonnegative for valid inputs."""
    f = as_function(D, f, "f")
    g = as_function(D, g, "g")
    nf = orlicz_norm_on_cube(D, f, Q, A)
    ng = orlicz_norm_on_cube(D, g, Q, associate_young(A))
    return HOLDER_CONSTANT * nf * ng - D.average(f * g, Q)


# -- all cubes of a grid ------------------------------------------------------------

def _heap_max(D, f, shift):
    pos = D.to_positions(f, shift)
    heap = np.empty(2 * D.n)
    heap[D.n:] = pos
    for l in range(D.depth - 1, -1, -1):
        a = 1 << l
        heap[a:2 * a] = heap[2 * a:4 * a].reshape(-1, 2).max(axis=1)
    heap[0] = 0.0
    return heap


def cube_norm_heap(D: DyadicDomain, f, spec, shift: int) -> np.ndarray:
    """Norm of ``f`` on every cube of grid ``shift``, in heap order."""
    spec = _resolve(spec)
    f = as_function(D, f)
    if isinstance(spec, HL):
        return D.heap_averages(f, shift)
    if isinstance(spec, Lr):
        if math.isinf(spec.r):
            return _heap_max(D, f, shift)
        h = D.heap_averages(f ** spec.r, shift)
        return h ** (1.0 / spec.r)
    if isinstance(spec, OrliczSpace):
        code, params, tt, ta = spec.A.kernel_spec()
        g = D.to_positions(f, shift)
        m = D.to_positions(D.mass, shift)
        heap = np.zeros(2 * D.n)
        for l in range(D.depth + 1):
            a = 1 << l
            heap[a:2 * a] = kernels.luxemburg_blocks(g, m, D.n >> l, code, params, tt, ta, NORM_RTOL)
        return heap
    raise DomainError(f"unsupported maximal spec {spec!r}")


def maximal(D: DyadicDomain, f, spec=HL()) -> np.ndarray:
    """Per cell, the largest cube norm over every dyadic cube containing it."""
    spec = _resolve(spec)
    f = as_function(D, f)
    if isinstance(spec, HL):
        return kernels.hl_maximal(f, D.mass, np.array(D.offsets, dtype=np.int64))
    return D.heap_cells_max([cube_norm_heap(D, f, spec, s) for s in range(D.n_grids)])


def iterated_maximal(D: DyadicDomain, f, k: int) -> np.ndarray:
    if k < 0:
        raise DomainError("k must be >= 0")
    g = as_function(D, f).copy()
    for _ in range(k):
        g = maximal(D, g)
    return g


def maximal_indicator_closed_form(D: DyadicDomain, B, A: YoungFunction) -> np.ndarray:
    """Orlicz maximal function of an indicator from the inverse of ``A``.

    On a cube Q meeting B the Luxemburg norm of the indicator equals
    1 / A^-1(mu(Q) / mu(Q & B)); cubes missing B contribute 0.
    """
    cells = np.unique(np.asarray(list(B) if not isinstance(B, np.ndarray) else B, dtype=int))
    if cells.size == 0:
        raise DomainError("B must be nonempty")
    if cells.min() < 0 or cells.max() >= D.n:
        raise DomainError("cells of B out of range")
    chi = np.zeros(D.n)
    chi[cells] = 1.0
    heaps = []
    for s in range(D.n_grids):
        hit = D.heap_integrals(chi, s)
        mu = D.heap_mass(s)
        h = np.zeros(2 * D.n)
        meet = hit > 0
        meet[0] = False
        ratio = mu[meet] / hit[meet]
        h[meet] = 1.0 / inverse(A, np.maximum(ratio, 1.0))
        heaps.append(h)
    return D.heap_cells_max(heaps)


def linfty_bound_check(D: DyadicDomain, f, A: YoungFunction) -> bool:
    """max M_A f <= max f (+ slack) for a normalised Young function."""
    if not A.normalized and abs(A(1.0) - 1.0) > 1e-12:
        raise DomainError("the L-infinity bound needs A(1) = 1")
    f = as_function(D, f)
    return bool(np.max(maximal(D, f, OrliczSpace(A))) <= np.max(f) + CHECK_SLACK)


def space_norm(D: DyadicDomain, f, p: float) -> float:
    """Unnormalised L^p(mu) norm over the whole domain."""
    f = as_function(D, f)
    if math.isinf(p):
        return float(np.max(f))
    return math.fsum(f**p * D.mass) ** (1.0 / p)
