"""Young functions, their generalized inverses and complementary functions.

Four families are supported:

``power``        A(t) = t**r
``log_bump``     A(t) = t**p / log(1+t)**(1+delta)
``loglog_bump``  A(t) = t**p / (log(1+t) * log(log(1+t))**(1+delta))
``table``        convex piecewise-linear interpolation of breakpoints

The two logarithmic formulas are not convex through the origin (their ratio
A(t)/t decreases near zero, and the loglog formula is singular at t = e - 1).
They are therefore replaced below a knot ``t*`` by the tangent line through
the origin, which gives the greatest convex minorant with A(0) = 0.  Above the
knot the closed form is used untouched, so the behaviour at infinity (and
hence B_p membership) is exactly that of the formula.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, UnboundedConjugateError

__all__ = [
    "YoungFunction",
    "BpResult",
    "evaluate",
    "inverse",
    "conjugate",
    "conjugate_table",
    "young_inequality_gap",
    "is_doubling",
    "has_increasing_ratio",
    "is_convex_sampled",
    "bp_test",
]

FAMILY_CODES = {"power": 0, "log_bump": 1, "loglog_bump": 2, "table": 3}

INVERSE_RTOL = 1e-12
CONJUGATE_RTOL = 1e-10
MAX_DOUBLINGS = 200


def _log_bump_raw(t, p, delta):
    return t**p / np.log1p(t) ** (1.0 + delta)


def _loglog_bump_raw(t, p, delta):
    L = np.log1p(t)
    return t**p / (L * np.log(L) ** (1.0 + delta))


def _log_bump_knot(p, delta):
    # d/du log(A(e^u)/e^u) = (p-1) - (1+delta) * t/((1+t) log(1+t));
    # the second factor decreases from 1 to 0.
    if p - 1.0 >= 1.0 + delta:
        return 0.0

    def g(t):
        return (p - 1.0) * (1.0 + t) * math.log1p(t) - (1.0 + delta) * t

    hi = 1.0
    while g(hi) <= 0.0:
        hi *= 2.0
    return optimize.brentq(g, 1e-12, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _loglog_bump_knot(p, delta):
    def g(t):
        L = math.log1p(t)
        return (p - 1.0) - t / ((1.0 + t) * L) * (1.0 + (1.0 + delta) / math.log(L))

    lo = math.e - 1.0
    lo = lo + 1e-9 * lo
    hi = 16.0
    while g(hi) <= 0.0:
        hi *= 2.0
    return optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class YoungFunction:
    """A convex increasing function A on [0, inf) with A(0) = 0.

    Instances are immutable and hashable; build them with the classmethod
    constructors rather than calling the dataclass directly.  Calling an
    instance evaluates it elementwise on scalars or arrays.
    """

    family: str
    params: tuple
    normalized: bool = False
    _knot: float = field(init=False, repr=False, compare=False)
    _slope: float = field(init=False, repr=False, compare=False)
    _scale: float = field(init=False, repr=False, compare=False)
    _tab_t: np.ndarray = field(init=False, repr=False, compare=False)
    _tab_a: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILY_CODES:
            raise DomainError(f"unknown Young function family {self.family!r}")
        knot, slope = 0.0, 0.0
        tab_t = tab_a = np.zeros(0)
        if self.family == "power":
            (r,) = self.params
            if not r > 1.0:
                raise DomainError("power Young function needs r > 1")
        elif self.family in ("log_bump", "loglog_bump"):
            p, delta = self.params
            if not (p > 1.0 and delta > 0.0):
                raise DomainError("log bumps need p > 1 and delta > 0")
            if self.family == "log_bump":
                knot = _log_bump_knot(p, delta)
                slope = float(_log_bump_raw(knot, p, delta) / knot) if knot > 0 else 0.0
            else:
                knot = _loglog_bump_knot(p, delta)
                slope = float(_loglog_bump_raw(knot, p, delta) / knot)
        else:
            tab_t, tab_a = _validate_table(self.params)
        object.__setattr__(self, "_knot", knot)
        object.__setattr__(self, "_slope", slope)
        object.__setattr__(self, "_tab_t", tab_t)
        object.__setattr__(self, "_tab_a", tab_a)
        object.__setattr__(self, "_scale", 1.0)
        if self.normalized:
            object.__setattr__(self, "_scale", float(self._raw(np.float64(1.0))))

    # constructors

    @classmethod
    def power(cls, r: float) -> "YoungFunction":
        return cls("power", (float(r),))

    @classmethod
    def log_bump(cls, p: float, delta: float, normalized: bool = False) -> "YoungFunction":
        return cls("log_bump", (float(p), float(delta)), normalized)

    @classmethod
    def loglog_bump(cls, p: float, delta: float, normalized: bool = False) -> "YoungFunction":
        return cls("loglog_bump", (float(p), float(delta)), normalized)

    @classmethod
    def table(cls, breakpoints: Sequence[tuple[float, float]], normalized: bool = False) -> "YoungFunction":
        pts = tuple((float(t), float(a)) for t, a in breakpoints)
        if pts and pts[0] != (0.0, 0.0):
            pts = ((0.0, 0.0),) + pts
        return cls("table", pts, normalized)

    @classmethod
    def from_csv(cls, path, normalized: bool = False) -> "YoungFunction":
        """Load a table Young function from a two-column ``t, A(t)`` CSV."""
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0].strip().startswith("#"):
                    continue
                try:
                    rows.append((float(rec[0]), float(rec[1])))
                except ValueError:
                    if rows:
                        raise DomainError(f"malformed row {rec!r} in {path}") from None
                    continue  # header
        return cls.table(rows, normalized)

    def normalize(self) -> "YoungFunction":
        """Return the value-rescaled copy A / A(1)."""
        if self.normalized:
            return self
        return YoungFunction(self.family, self.params, True)

    # evaluation

    def _raw(self, t):
        t = np.asarray(t, dtype=float)
        fam = self.family
        if fam == "power":
            return t ** self.params[0]
        if fam == "table":
            return _table_eval(self._tab_t, self._tab_a, t)
        p, delta = self.params
        raw = _log_bump_raw if fam == "log_bump" else _loglog_bump_raw
        with np.errstate(divide="ignore", invalid="ignore"):
            if self._knot > 0.0:
                tt = np.maximum(t, self._knot)
                out = np.where(t < self._knot, self._slope * t, raw(tt, p, delta))
            else:
                out = np.where(t > 0.0, raw(np.where(t > 0.0, t, 1.0), p, delta), 0.0)
        return out

    def __call__(self, t):
        out = self._raw(t)
        if self._scale != 1.0:
            out = out / self._scale
        return out if np.ndim(out) else float(out)

    @property
    def initial_slope(self) -> float:
        """Right derivative at 0; the conjugate vanishes on [0, initial_slope]."""
        if self.family == "power":
            return 0.0
        if self.family == "table":
            return float((self._tab_a[1] - self._tab_a[0]) / (self._tab_t[1] - self._tab_t[0])) / self._scale
        if self._knot > 0.0:
            return self._slope / self._scale
        p, delta = self.params
        if self.family == "log_bump" and p - 1.0 == 1.0 + delta:
            return 1.0 / self._scale
        return 0.0

    @property
    def final_slope(self) -> float:
        """Slope at infinity (finite only for tables)."""
        if self.family == "table":
            t, a = self._tab_t, self._tab_a
            return float((a[-1] - a[-2]) / (t[-1] - t[-2])) / self._scale
        return math.inf

    @property
    def knot(self) -> float:
        return self._knot

    def kernel_spec(self):
        """Flat description consumed by the compiled and numpy kernels.

        Returns ``(code, params, tab_t, tab_a)`` where ``params`` is
        ``[exponent, delta, knot, slope, scale]``.
        """
        code = FAMILY_CODES[self.family]
        if self.family == "power":
            params = [self.params[0], 0.0, 0.0, 0.0, self._scale]
        elif self.family == "table":
            params = [0.0, 0.0, 0.0, 0.0, self._scale]
        else:
            params = [self.params[0], self.params[1], self._knot, self._slope, self._scale]
        return (code, np.array(params, dtype=float),
                np.ascontiguousarray(self._tab_t, dtype=float),
                np.ascontiguousarray(self._tab_a, dtype=float))

    def to_dict(self):
        d = {"family": self.family, "normalized": self.normalized}
        if self.family == "table":
            d["breakpoints"] = [list(bp) for bp in self.params]
        else:
            d["params"] = list(self.params)
        return d

    def __repr__(self):
        if self.family == "table":
            body = f"{len(self.params)} breakpoints"
        else:
            body = ", ".join(f"{v:g}" for v in self.params)
        norm = ", normalized" if self.normalized else ""
        return f"YoungFunction.{self.family}({body}{norm})"


def _validate_table(pts):
    if len(pts) < 2:
        raise DomainError("a table Young function needs at least one breakpoint beyond the origin")
    arr = np.array(pts, dtype=float)
    t, a = arr[:, 0], arr[:, 1]
    if not np.all(np.isfinite(arr)):
        raise DomainError("table breakpoints must be finite")
    if t[0] != 0.0 or a[0] != 0.0:
        raise DomainError("table must start at the origin")
    if np.any(np.diff(t) <= 0) or np.any(np.diff(a) <= 0):
        raise DomainError("table breakpoints must be strictly increasing in both coordinates")
    slopes = np.diff(a) / np.diff(t)
    if np.any(np.diff(slopes) < -1e-12 * np.maximum(1.0, np.abs(slopes[1:]))):
        raise DomainError("table breakpoints do not define a convex function")
    t.setflags(write=False)
    a.setflags(write=False)
    return t.copy(), a.copy()


def _table_eval(tt, ta, t):
    inside = np.interp(t, tt, ta)
    last = (ta[-1] - ta[-2]) / (tt[-1] - tt[-2])
    return np.where(t > tt[-1], ta[-1] + last * (t - tt[-1]), inside)


def _check_arg(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be finite and nonnegative")
    return arr


def evaluate(A: YoungFunction, t):
    """Return A(t) for a nonnegative finite scalar or array ``t``."""
    _check_arg(t, "t")
    return A(t)


def inverse(A: YoungFunction, s):
    """Generalized inverse ``inf{t : A(t) >= s}`` by bracketed bisection."""
    s_arr = _check_arg(s, "s")
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    out = np.zeros_like(s_arr)
    pos = s_arr > 0
    if np.any(pos):
        out[pos] = _inverse_positive(A, s_arr[pos])
    return float(out[0]) if scalar else out


def _inverse_positive(A, s):
    hi = np.ones_like(s)
    for _ in range(2100):
        low = A(hi) < s
        if not low.any():
            break
        hi[low] *= 2.0
    lo = hi * 0.5
    for _ in range(2100):
        high = A(lo) >= s
        if not high.any():
            break
        lo[high] *= 0.5
        hi[high] = lo[high] * 2.0
    # invariant: A(lo) < s <= A(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        up = A(mid) >= s
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
        if np.all(hi - lo <= INVERSE_RTOL * hi):
            break
    return hi


def conjugate(A: YoungFunction, s):
    """Complementary function ``sup_t {s t - A(t)}``.

    Closed form for powers, exact breakpoint maximisation for tables, and a
    vectorised golden-section search for the logarithmic bumps.
    """
    s_arr = _check_arg(s, "s")
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr).astype(float)
    if A.family == "power":
        r = A.params[0]
        out = (r - 1.0) * (s_arr / r) ** (r / (r - 1.0))
    elif A.family == "table":
        out = _table_conjugate(A, s_arr)
    else:
        out = _golden_conjugate(A, s_arr)
    return float(out[0]) if scalar else out


def _table_conjugate(A, s):
    t = A._tab_t
    a = A._tab_a / A._scale
    if np.any(s > A.final_slope * (1 + 1e-14)):
        raise UnboundedConjugateError("s exceeds the final slope of the table; conjugate is infinite")
    vals = s[:, None] * t[None, :] - a[None, :]
    return np.maximum(vals.max(axis=1), 0.0)


def _golden_conjugate(A, s):
    out = np.zeros_like(s)
    active = s > A.initial_slope
    if not active.any():
        return out
    sa = s[active]

    def phi(t):
        return sa * t - A(t)

    T = np.ones_like(sa)
    open_ = phi(2 * T) - phi(T) >= 0
    n = 0
    while open_.any():
        n += 1
        if n > MAX_DOUBLINGS:
            raise UnboundedConjugateError("could not bracket the conjugate maximiser; supremum appears infinite")
        T[open_] *= 2.0
        open_ = phi(2 * T) - phi(T) >= 0
    a = np.zeros_like(sa)
    b = 2.0 * T
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = phi(c), phi(d)
    for _ in range(200):
        left = fc > fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c, d = (np.where(left, b - inv * (b - a), d),
                np.where(left, c, a + inv * (b - a)))
        # only one interior point is new, but re-evaluating both keeps the
        # vector code simple
        fc, fd = phi(c), phi(d)
        if np.all(b - a <= CONJUGATE_RTOL * np.maximum(b, 1e-300)):
            break
    best = np.maximum.reduce([phi(a), phi(b), fc, fd])
    out[active] = np.maximum(best, 0.0)
    return out


@lru_cache(maxsize=64)
def conjugate_table(A: YoungFunction, n: int = 512, t_min: float | None = None,
                    t_max: float | None = None, value_ceiling: float = 1e15) -> YoungFunction:
    """Tabulate the complementary function of ``A`` on a log grid of ``n`` points.

    The grid starts just above ``A.initial_slope`` (below which the conjugate
    vanishes) and by default runs until the conjugate exceeds
    ``value_ceiling``.  Linear interpolation of a convex function lies above
    it, so norms computed from the table never undershoot.
    """
    if A.family == "table":
        t = A._tab_t
        a = A._tab_a / A._scale
        slopes = np.diff(a) / np.diff(t)
        vals = slopes * t[1:] - a[1:]
        pts = [(0.0, 0.0)]
        for sl, v in zip(slopes, vals):
            if v > pts[-1][1] and sl > pts[-1][0]:
                pts.append((float(sl), float(v)))
        if len(pts) == 1:
            raise UnboundedConjugateError("table conjugate is identically zero on its domain")
        return YoungFunction.table(pts)
    s0 = A.initial_slope
    if t_min is None:
        t_min = s0 * (1.0 + 1e-6) if s0 > 0 else 1e-6
    if t_max is None:
        t_max = max(2.0 * t_min, 1.0)
        while conjugate(A, t_max) < value_ceiling:
            t_max *= 2.0
    grid = np.geomspace(t_min, t_max, n)
    vals = conjugate(A, grid)
    keep = vals > 0
    grid, vals = grid[keep], vals[keep]
    # enforce strict monotonicity against search noise
    mask = np.concatenate([[True], (np.diff(vals) > 0) & (np.diff(grid) > 0)])
    pts = [(0.0, 0.0)] + [(float(t), float(v)) for t, v in zip(grid[mask], vals[mask])]
    return YoungFunction.table(_convex_hull_upper_safe(pts))


def _convex_hull_upper_safe(pts):
    # drop breakpoints that break convexity (search noise); the lower convex
    # hull of the samples is returned
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) > (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def young_inequality_gap(A: YoungFunction, a, b):
    """``A(a) + conj(A)(b) - a*b``; nonnegative up to search tolerance."""
    _check_arg(a, "a")
    _check_arg(b, "b")
    return A(a) + conjugate(A, b) - np.asarray(a, float) * np.asarray(b, float)


DEFAULT_DOUBLING_GRID = np.geomspace(1e-6, 1e6, 241)


def is_doubling(A: YoungFunction, t_grid=None, ceiling: float = 1e3):
    """Sampled doubling check: max of A(2t)/A(t) over ``t_grid``.

    Only a heuristic; a finite grid cannot prove the inequality for all t.
    """
    t = DEFAULT_DOUBLING_GRID if t_grid is None else np.asarray(t_grid, float)
    if t.size == 0 or np.any(t <= 0):
        raise DomainError("t_grid must be nonempty and positive")
    ratio = float(np.max(A(2 * t) / A(t)))
    return ratio <= ceiling, ratio


def has_increasing_ratio(A: YoungFunction, t_grid=None, rtol: float = 1e-12) -> bool:
    """Sampled check that A(t)/t is nondecreasing."""
    t = DEFAULT_DOUBLING_GRID if t_grid is None else np.asarray(t_grid, float)
    q = A(t) / t
    return bool(np.all(np.diff(q) >= -rtol * np.abs(q[1:])))


def is_convex_sampled(fn, t, tol=1e-9) -> bool:
    """Check monotonicity and the three-point convexity inequality on sorted samples."""
    t = np.sort(np.asarray(t, float))
    a = np.asarray(fn(t), float)
    if np.any(np.diff(a) < -tol * np.maximum(1.0, np.abs(a[1:]))):
        return False
    t1, t2, t3 = t[:-2], t[1:-1], t[2:]
    a1, a2, a3 = a[:-2], a[1:-1], a[2:]
    chord = ((t3 - t2) * a1 + (t2 - t1) * a3) / (t3 - t1)
    return bool(np.all(a2 <= chord + tol * np.maximum(1.0, np.abs(chord))))


# -- B_p classification ------------------------------------------------------

@dataclass
class BpResult:
    verdict: str
    numeric_verdict: str
    analytic_verdict: str | None
    ladder: list
    tail_integrals: list
    increments: list
    ratios: list
    decay_exponent: float | None
    diagnostics: str = ""

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def analytic_bp_verdict(A: YoungFunction, p: float) -> str | None:
    """Exact B_p membership for the closed families; ``None`` for tables."""
    if A.family == "power":
        return "member" if A.params[0] < p else "non_member"
    if A.family in ("log_bump", "loglog_bump"):
        return "member" if A.params[0] <= p else "non_member"
    return None


def bp_test(A: YoungFunction, p: float, decades: int = 12, c: float = 1.0) -> BpResult:
    """Classify ``A`` against B_p from the tail integral of A(t)/t^p dt/t.

    The integral from ``c`` to 10**k is computed decade by decade (in the
    variable u = log t) with adaptive quadrature.  Increments that shrink at a
    steady geometric ratio mean convergence; nondecreasing increments mean
    divergence.  Increments whose ratio creeps up towards 1 are fitted to a
    power of u: decay faster than 1/u converges, slower diverges.
    """
    if not p > 1.0:
        raise DomainError("B_p needs p > 1")
    ladder = [c * 10.0**k for k in range(decades + 1)]
    analytic = analytic_bp_verdict(A, p)

    def integrand(u):
        t = math.exp(u)
        return float(A(t)) * math.exp(-p * u)

    incs = []
    diag = ""
    try:
        for lo, hi in zip(ladder[:-1], ladder[1:]):
            val, err = integrate.quad(integrand, math.log(lo), math.log(hi), limit=200,
                                      epsabs=0.0, epsrel=1e-10)
            if not math.isfinite(val):
                raise FloatingPointError("non-finite quadrature value")
            incs.append(val)
    except (FloatingPointError, OverflowError, ValueError) as exc:
        num, expo, ratios, diag = "inconclusive", None, [], f"quadrature failure: {exc}"
        cum = list(np.cumsum(incs)) if incs else []
        return BpResult(analytic or num, num, analytic, ladder[1:], [float(x) for x in cum],
                        incs, ratios, expo, diag)
    incs_arr = np.array(incs)
    cum = np.cumsum(incs_arr)
    num, expo, ratios, diag = _classify_increments(incs_arr, c)
    verdict = analytic if analytic is not None else num
    return BpResult(verdict, num, analytic, ladder[1:], [float(x) for x in cum],
                    [float(x) for x in incs_arr], ratios, expo, diag)


def _classify_increments(incs, c, tail=6):
    tail_incs = incs[-tail:]
    if np.any(tail_incs <= 0):
        return "inconclusive", None, [], "nonpositive increments"
    ratios = tail_incs[1:] / tail_incs[:-1]
    rlist = [float(r) for r in ratios]
    if np.all(ratios >= 1.0 - 1e-9):
        return "non_member", None, rlist, "increments nondecreasing"
    if np.all(ratios < 1.0 - 1e-3) and ratios[-1] <= ratios[0] + 1e-6:
        return "member", None, rlist, "geometric decay of increments"
    # ratios below one but drifting upward: fit increments ~ u^(-a)
    k0 = len(incs) - tail
    u = math.log(10.0) * (np.arange(k0, len(incs)) + 0.5) + math.log(c)
    if np.any(u <= 0):
        return "inconclusive", None, rlist, "ladder too short for a power fit"
    slope = np.polyfit(np.log(u), np.log(tail_incs), 1)[0]
    a = float(-slope)
    if a > 1.2:
        return "member", a, rlist, f"increments decay like u^-{a:.3g}"
    if a < 0.8:
        return "non_member", a, rlist, f"increments decay like u^-{a:.3g}"
    return "inconclusive", a, rlist, f"borderline decay exponent {a:.3g}"
