"""Dyadic model space: N = 2**L cells on [0, 1) with arbitrary positive masses.

A grid function is simply a length-N float array holding one value per cell.
Each configured shift defines a cyclic dyadic grid: with offset ``o`` (in
cells) the cube at level ``l`` and index ``i`` covers the cells
``(o + i*w + j) mod N`` for ``j < w = N >> l``.

Internally cubes of one grid are laid out in heap order, slot ``2**l + i``
of a length-2N array, which lets every level be processed in one pass.
"""
from __future__ import annotations

import csv
import math
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import DomainError

__all__ = [
    "CubeId",
    "DyadicDomain",
    "as_function",
    "constant",
    "indicator",
    "power_weight",
    "lognormal",
    "load_function_csv",
    "save_function_csv",
]

DEFAULT_SHIFTS = (0.0, 1.0 / 3.0)


class CubeId(NamedTuple):
    shift: int
    level: int
    index: int

    @property
    def heap(self) -> int:
        return (1 << self.level) + self.index

    def to_list(self):
        return [self.shift, self.level, self.index]


class DyadicDomain:
    """Depth-``L`` binary grid over [0, 1) with per-cell masses.

    Args:
        depth: number of halvings, so the domain has ``2**depth`` cells.
        cell_mass: positive mass of every cell; uniform ``1/N`` by default.
        shifts: grid offsets as fractions of [0, 1), rounded to whole cells.
            Offsets that coincide after rounding are merged.
    """

    def __init__(self, depth: int, cell_mass: Sequence[float] | None = None,
                 shifts: Sequence[float] = DEFAULT_SHIFTS):
        if int(depth) != depth or depth < 1:
            raise DomainError("depth must be an integer >= 1")
        self.depth = int(depth)
        self.n = 1 << self.depth
        if cell_mass is None:
            mass = np.full(self.n, 1.0 / self.n)
        else:
            mass = np.array(cell_mass, dtype=float)
            if mass.shape != (self.n,):
                raise DomainError(f"cell_mass must have length {self.n}")
            if not np.all(np.isfinite(mass)) or np.any(mass <= 0):
                raise DomainError("cell masses must be finite and positive")
        mass.setflags(write=False)
        self.mass = mass
        offsets = []
        for s in shifts:
            if not 0.0 <= s < 1.0:
                raise DomainError("shifts must lie in [0, 1)")
            o = int(round(s * self.n)) % self.n
            if o not in offsets:
                offsets.append(o)
        self.offsets = tuple(offsets)

    @classmethod
    def with_offsets(cls, depth, offsets, cell_mass=None):
        """Build a domain from integer cell offsets instead of fractions."""
        n = 1 << int(depth)
        return cls(depth, cell_mass, shifts=[(o % n) / n for o in offsets])

    def __repr__(self):
        return f"DyadicDomain(depth={self.depth}, offsets={self.offsets})"

    @property
    def n_grids(self) -> int:
        return len(self.offsets)

    @cached_property
    def total_mass(self) -> float:
        return math.fsum(self.mass)

    @cached_property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) / self.n

    # cube addressing

    def check(self, Q: CubeId) -> CubeId:
        s, l, i = Q
        if not (0 <= s < self.n_grids and 0 <= l <= self.depth and 0 <= i < (1 << l)):
            raise DomainError(f"cube {tuple(Q)} is not valid in {self!r}")
        return CubeId(int(s), int(l), int(i))

    def root(self, shift: int = 0) -> CubeId:
        return CubeId(shift, 0, 0)

    def cube_cells(self, Q: CubeId) -> np.ndarray:
        s, l, i = self.check(Q)
        w = self.n >> l
        return (self.offsets[s] + i * w + np.arange(w)) % self.n

    def cube_width(self, Q: CubeId) -> int:
        return self.n >> Q.level

    def cubes(self, shift: int | None = None, levels: Iterable[int] | None = None) -> Iterator[CubeId]:
        shifts = range(self.n_grids) if shift is None else [shift]
        lv = range(self.depth + 1) if levels is None else levels
        for s in shifts:
            for l in lv:
                for i in range(1 << l):
                    yield CubeId(s, l, i)

    def cube_from_heap(self, shift: int, k: int) -> CubeId:
        level = int(k).bit_length() - 1
        return CubeId(shift, level, int(k) - (1 << level))

    @staticmethod
    def parent(Q: CubeId) -> CubeId:
        if Q.level == 0:
            raise DomainError("the root has no parent")
        return CubeId(Q.shift, Q.level - 1, Q.index >> 1)

    def children(self, Q: CubeId) -> tuple[CubeId, CubeId]:
        if Q.level >= self.depth:
            raise DomainError("leaf cubes have no children")
        return (CubeId(Q.shift, Q.level + 1, 2 * Q.index),
                CubeId(Q.shift, Q.level + 1, 2 * Q.index + 1))

    @staticmethod
    def contains(Q: CubeId, R: CubeId) -> bool:
        """True when ``R`` is a (not necessarily strict) subcube of ``Q``."""
        return Q.shift == R.shift and R.level >= Q.level and (R.index >> (R.level - Q.level)) == Q.index

    def ancestors(self, cell: int, shift_index: int = 0) -> list[CubeId]:
        """The ``L + 1`` cubes of one grid containing ``cell``, leaf first."""
        if not 0 <= cell < self.n:
            raise DomainError(f"cell {cell} out of range")
        if not 0 <= shift_index < self.n_grids:
            raise DomainError(f"shift index {shift_index} out of range")
        pos = (cell - self.offsets[shift_index]) % self.n
        return [CubeId(shift_index, l, pos >> (self.depth - l)) for l in range(self.depth, -1, -1)]

    # measures and integrals

    def cube_measure(self, Q: CubeId) -> float:
        return math.fsum(self.mass[self.cube_cells(Q)])

    def integrate(self, f, Q: CubeId) -> float:
        """Unnormalised integral of ``f`` over ``Q``."""
        cells = self.cube_cells(Q)
        f = as_function(self, f)
        return math.fsum(f[cells] * self.mass[cells])

    def average(self, f, Q: CubeId) -> float:
        return self.integrate(f, Q) / self.cube_measure(Q)

    def integral(self, f) -> float:
        """Integral of ``f`` over the whole domain."""
        return math.fsum(as_function(self, f) * self.mass)

    def to_positions(self, f, shift: int) -> np.ndarray:
        return np.roll(np.asarray(f, float), -self.offsets[shift])

    def heap_mass(self, shift: int) -> np.ndarray:
        cache = self.__dict__.setdefault("_heap_mass", {})
        if shift not in cache:
            h = kernels.heap_sums(self.to_positions(self.mass, shift))
            h.setflags(write=False)
            cache[shift] = h
        return cache[shift]

    def heap_integrals(self, f, shift: int) -> np.ndarray:
        """Integral of ``f`` over every cube of one grid, in heap order."""
        return kernels.heap_sums(self.to_positions(np.asarray(f, float) * self.mass, shift))

    def heap_averages(self, f, shift: int) -> np.ndarray:
        h = self.heap_integrals(f, shift)
        h[1:] /= self.heap_mass(shift)[1:]
        return h

    def heap_cells_max(self, heaps: Sequence[np.ndarray]) -> np.ndarray:
        """Per-cell maximum of cube values over all ancestors in every grid."""
        out = np.full(self.n, -np.inf)
        for s, h in enumerate(heaps):
            kernels.heap_to_cells_max(np.asarray(h, float), self.offsets[s], out)
        return out

    def doubling_constant(self) -> float:
        """max mu(2I)/mu(I) over every non-wrapping cube of every grid.

        ``2I`` is the concentric interval of twice the width, clipped to
        [0, 1); each cell's mass is spread uniformly over the cell so that
        half-cell overhangs are measured exactly.
        """
        cum = np.concatenate([[0.0], np.cumsum(self.mass)])
        grid = np.arange(self.n + 1, dtype=float)
        best = 1.0
        for off in self.offsets:
            for l in range(self.depth + 1):
                w = self.n >> l
                start = (off + np.arange(1 << l) * w) % self.n
                start = start[start + w <= self.n].astype(float)
                if start.size == 0:
                    continue
                inner = np.interp(start + w, grid, cum) - np.interp(start, grid, cum)
                lo = np.maximum(start - 0.5 * w, 0.0)
                hi = np.minimum(start + 1.5 * w, float(self.n))
                outer = np.interp(hi, grid, cum) - np.interp(lo, grid, cum)
                best = max(best, float(np.max(outer / inner)))
        return best


# -- grid functions ------------------------------------------------------------

def as_function(D: DyadicDomain, f, name: str = "f") -> np.ndarray:
    """Validate a grid function: length N, finite, nonnegative."""
    arr = np.asarray(f, dtype=float)
    if arr.ndim == 0:
        arr = np.full(D.n, float(arr))
    if arr.shape != (D.n,):
        raise DomainError(f"{name} must have length {D.n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be finite and nonnegative")
    return arr


def constant(D: DyadicDomain, c: float = 1.0) -> np.ndarray:
    return np.full(D.n, float(c))


def indicator(D: DyadicDomain, cells) -> np.ndarray:
    f = np.zeros(D.n)
    f[np.asarray(list(cells) if not isinstance(cells, np.ndarray) else cells, dtype=int)] = 1.0
    return f


def power_weight(D: DyadicDomain, x0: float, alpha: float) -> np.ndarray:
    """|x - x0|**(-alpha) sampled at cell centres.

    A cell whose centre sits exactly on ``x0`` takes the value of the nearest
    nonsingular cell instead.
    """
    dist = np.abs(D.centers - x0)
    sing = dist == 0.0
    if sing.any():
        dist[sing] = np.min(dist[~sing]) if (~sing).any() else 1.0
    return dist ** (-float(alpha))


def lognormal(D: DyadicDomain, rng, sigma: float = 1.0) -> np.ndarray:
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return rng.lognormal(0.0, sigma, D.n)


def load_function_csv(D: DyadicDomain, path) -> np.ndarray:
    """Read one value per row (first column); a non-numeric header is skipped."""
    vals = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().startswith("#"):
                continue
            try:
                vals.append(float(rec[0]))
            except ValueError:
                if vals:
                    raise DomainError(f"malformed row {rec!r} in {path}") from None
    return as_function(D, vals)


def save_function_csv(path, f) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for v in np.asarray(f, float):
            w.writerow([repr(float(v))])
