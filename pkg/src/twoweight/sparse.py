"""Sparse cube families, their exceptional sets, and the sparse operator."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .domain import CubeId, DyadicDomain, as_function
from .errors import DegenerateInputError, DomainError, InvariantError, SparsityError

__all__ = [
    "SparseFamily",
    "build_cz_sparse",
    "verify_sparsity",
    "exceptional_sets",
    "sparse_operator",
    "ainfty_gamma",
    "random_sparse_family",
]

PACKING_RTOL = 1e-12


@dataclass(frozen=True)
class SparseFamily:
    """A set of cubes inside one shifted grid.

    ``cubes`` is kept sorted (coarse to fine).  Sparseness is not enforced
    at construction; use :func:`verify_sparsity`.
    """

    shift: int
    cubes: tuple

    @classmethod
    def of(cls, cubes: Iterable, shift: int | None = None) -> "SparseFamily":
        cs = sorted({CubeId(*c) for c in cubes}, key=lambda q: (q.level, q.index))
        shifts = {c.shift for c in cs}
        if len(shifts) > 1:
            raise DomainError("a sparse family lives in a single grid")
        if shift is None:
            shift = shifts.pop() if shifts else 0
        elif shifts and shifts != {shift}:
            raise DomainError("cube shifts disagree with the family shift")
        return cls(shift, tuple(cs))

    def __len__(self):
        return len(self.cubes)

    def __iter__(self):
        return iter(self.cubes)

    def __contains__(self, Q):
        return CubeId(*Q) in set(self.cubes)

    def to_text(self) -> str:
        lines = [f"{q.shift} {q.level} {q.index}" for q in self.cubes]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str) -> "SparseFamily":
        triples = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").replace("(", " ").replace(")", " ").split()
            if len(parts) != 3:
                raise DomainError(f"expected 'shift level index', got {line!r}")
            triples.append(tuple(int(p) for p in parts))
        return cls.of(triples)

    def check(self, D: DyadicDomain) -> None:
        for q in self.cubes:
            D.check(q)


def _s_parents(S: SparseFamily) -> dict:
    """Deepest strict S-ancestor of every cube (None at the top)."""
    heap_ids = {q.heap: q for q in S.cubes}
    parents = {}
    for q in S.cubes:
        k = q.heap >> 1
        par = None
        while k >= 1:
            if k in heap_ids:
                par = heap_ids[k]
                break
            k >>= 1
        parents[q] = par
    return parents


def _owner(D: DyadicDomain, S: SparseFamily) -> np.ndarray:
    """Per grid position, the index into ``S.cubes`` of its deepest S-cube (-1 if none)."""
    owner = np.full(D.n, -1, dtype=np.int64)
    for j, q in enumerate(S.cubes):  # coarse to fine
        w = D.n >> q.level
        owner[q.index * w:(q.index + 1) * w] = j
    return owner


def verify_sparsity(D: DyadicDomain, S: SparseFamily):
    """Check mu(union of strict S-subcubes of Q) <= mu(Q)/2 for every Q in S.

    Returns ``(ok, worst_ratio)``.  The union is measured as the sum over the
    maximal strict S-subcubes, which are pairwise disjoint.
    """
    S.check(D)
    hm = D.heap_mass(S.shift)
    covered = {q: [] for q in S.cubes}
    for q, par in _s_parents(S).items():
        if par is not None:
            covered[par].append(hm[q.heap])
    worst = 0.0
    ok = True
    for q, parts in covered.items():
        c = math.fsum(parts)
        mu = hm[q.heap]
        worst = max(worst, c / mu)
        if c > 0.5 * mu * (1.0 + PACKING_RTOL):
            ok = False
    return ok, worst


def exceptional_sets(D: DyadicDomain, S: SparseFamily, check: bool = True) -> dict:
    """E(Q) = Q minus its strict S-subcubes, as arrays of cell indices.

    With ``check`` the pairwise disjointness and the bounds
    mu(E) <= mu(Q) <= 2 mu(E) are verified.
    """
    ok, worst = verify_sparsity(D, S)
    if not ok:
        raise SparsityError(f"family is not sparse (worst covered ratio {worst:.6g})")
    owner = _owner(D, S)
    off = D.offsets[S.shift]
    order = np.argsort(owner, kind="stable")
    bounds = np.searchsorted(owner[order], np.arange(-1, len(S.cubes) + 1))
    out = {}
    hm = D.heap_mass(S.shift)
    for j, q in enumerate(S.cubes):
        pos = order[bounds[j + 1]:bounds[j + 2]]
        cells = np.sort((pos + off) % D.n)
        out[q] = cells
        if check:
            muE = math.fsum(D.mass[cells])
            muQ = hm[q.heap]
            if not (muE <= muQ * (1 + PACKING_RTOL) and muQ <= 2.0 * muE * (1 + PACKING_RTOL)):
                raise InvariantError(f"exceptional set of {tuple(q)} has measure {muE} vs cube {muQ}")
    if check:
        allc = np.concatenate(list(out.values())) if out else np.zeros(0, int)
        if allc.size != np.unique(allc).size:
            raise InvariantError("exceptional sets are not disjoint")
    return out


def sparse_operator(D: DyadicDomain, S: SparseFamily, f) -> np.ndarray:
    """T^S f = sum over Q in S of (avg_Q f) * indicator(Q)."""
    f = as_function(D, f)
    S.check(D)
    avg = D.heap_averages(f, S.shift)
    acc = np.zeros(2 * D.n)
    for q in S.cubes:
        acc[q.heap] += avg[q.heap]
    width = 1
    while width < D.n:
        acc[2 * width:4 * width] += np.repeat(acc[width:2 * width], 2)
        width *= 2
    return np.roll(acc[D.n:], D.offsets[S.shift])


def build_cz_sparse(D: DyadicDomain, f, lam: float = 2.0, shift: int = 0) -> SparseFamily:
    """Calderon-Zygmund stopping cubes starting from the root of one grid.

    Each selected cube Q contributes its maximal subcubes R with
    avg_R f >= lam * avg_Q f; their total measure is at most mu(Q)/lam.
    """
    if lam < 2.0:
        raise DomainError("lambda must be >= 2")
    f = as_function(D, f)
    if not np.any(f > 0):
        raise DegenerateInputError("f vanishes identically")
    avg = D.heap_averages(f, shift)
    n = D.n
    chosen = [1]
    stack = [1]
    while stack:
        k = stack.pop()
        thresh = lam * avg[k]
        if thresh <= 0.0:
            continue
        todo = [2 * k, 2 * k + 1] if k < n else []
        while todo:
            c = todo.pop()
            if avg[c] >= thresh:
                chosen.append(c)
                stack.append(c)
            elif c < n:
                todo.extend((2 * c, 2 * c + 1))
    S = SparseFamily.of([D.cube_from_heap(shift, k) for k in chosen], shift)
    ok, worst = verify_sparsity(D, S)
    if not ok or worst > 1.0 / lam * (1 + 1e-9):
        raise InvariantError(f"stopping family failed the packing bound (worst {worst})")
    return S


def ainfty_gamma(D: DyadicDomain, S: SparseFamily, w) -> float:
    """max over Q in S of w(Q) / w(E(Q)) for a positive weight ``w``."""
    w = as_function(D, w, "w")
    E = exceptional_sets(D, S, check=False)
    wq = D.heap_integrals(w, S.shift)
    gamma = 1.0
    for q, cells in E.items():
        we = math.fsum(w[cells] * D.mass[cells])
        if we <= 0:
            raise InvariantError(f"exceptional set of {tuple(q)} carries no weight")
        gamma = max(gamma, wq[q.heap] / we)
    return gamma


def random_sparse_family(D: DyadicDomain, rng, shift: int = 0, p_descend: float = 0.7,
                         max_jump: int = 3, max_tries: int = 100) -> SparseFamily:
    """Random sparse family for fuzzing.

    From each selected cube a random number of disjoint subcubes a few levels
    down is chosen, keeping their total measure within half the parent's;
    the result is re-verified and resampled on failure.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    hm = D.heap_mass(shift)
    n = D.n
    for _ in range(max_tries):
        chosen = [1]
        stack = [1]
        while stack:
            k = stack.pop()
            level = k.bit_length() - 1
            if level >= D.depth or rng.random() > p_descend:
                continue
            jump = int(rng.integers(1, min(max_jump, D.depth - level) + 1))
            kids = (k << jump) + rng.permutation(1 << jump)
            budget = 0.5 * hm[k]
            used = 0.0
            for c in kids:
                if rng.random() < 0.5 and used + hm[c] <= budget:
                    used += hm[c]
                    chosen.append(int(c))
                    stack.append(int(c))
        S = SparseFamily.of([D.cube_from_heap(shift, k) for k in chosen], shift)
        if verify_sparsity(D, S)[0]:
            return S
    raise InvariantError("could not sample a sparse family")
