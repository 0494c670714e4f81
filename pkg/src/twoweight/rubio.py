"""Truncated Rubio de Francia iteration and its certified properties."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .domain import DyadicDomain, as_function
from .errors import DegenerateInputError, DomainError
from .orlicz import HL, maximal, space_norm
from .weights import a1_constant, reverse_holder_constant

__all__ = [
    "RdFConfig",
    "maximal_norm_bound",
    "rubio_series",
    "rubio_operator",
    "tilde_r",
    "certify_properties",
]

POINTWISE_SLACK = 1e-10
NORM_SLACK = 1e-6


def maximal_norm_bound(s: float) -> float:
    """Dual exponent s' = s/(s-1), the L^s bound used for the dyadic maximal operator."""
    if not s > 1.0:
        raise DomainError("s must exceed 1")
    if math.isinf(s):
        return 1.0
    return s / (s - 1.0)


@dataclass(frozen=True)
class RdFConfig:
    """Parameters of one Rubio de Francia construction.

    ``B`` defaults to ``maximal_norm_bound(p'/q')``.  ``K`` is a minimum
    series length; it is raised when needed so that the omitted tail stays
    below ``tail_tol``.
    """

    p: float
    q: float
    B: float | None = None
    K: int = 40
    tail_tol: float = 1e-12

    def __post_init__(self):
        if not self.p > 1.0:
            raise DomainError("p must exceed 1")
        if not self.q > self.p:
            raise DomainError("q must exceed p (the endpoint q = p is excluded)")
        if int(self.K) != self.K or self.K < 1:
            raise DomainError("K must be a positive integer")
        if not self.tail_tol > 0:
            raise DomainError("tail_tol must be positive")
        if self.B is None:
            object.__setattr__(self, "B", maximal_norm_bound(self.s))
        if not self.B >= 1.0:
            raise DomainError("B must be >= 1")

    @property
    def p_dual(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def q_dual(self) -> float:
        return self.q / (self.q - 1.0)

    @property
    def s(self) -> float:
        """Exponent p'/q' > 1 on which the maximal operator must be bounded."""
        return self.p_dual / self.q_dual

    def terms_for(self, hmax: float) -> int:
        if hmax <= 0:
            return int(self.K)
        return max(int(self.K), math.ceil(math.log2(hmax / self.tail_tol)))

    def to_dict(self):
        return asdict(self)


def rubio_series(D: DyadicDomain, h, cfg: RdFConfig, K: int | None = None):
    """Return ``(R_K h, R_{K+1} h)``.

    The omitted tail of R_K is at most max(h) 2^-K because M^k h <= max(h)
    and B >= 1.
    """
    h = as_function(D, h, "h")
    if K is None:
        K = cfg.terms_for(float(h.max()))
    denom = 2.0 * cfg.B
    term = h.copy()
    acc = h.copy()
    for _ in range(K):
        term = maximal(D, term, HL()) / denom
        acc += term
    nxt = acc + maximal(D, term, HL()) / denom
    return acc, nxt


def rubio_operator(D: DyadicDomain, h, cfg: RdFConfig, K: int | None = None) -> np.ndarray:
    """R_K h = sum_{k<=K} M^k h / (2B)^k."""
    return rubio_series(D, h, cfg, K)[0]


def tilde_r(D: DyadicDomain, h, cfg: RdFConfig, K: int | None = None) -> np.ndarray:
    """R(h^q')^(1/q')."""
    h = as_function(D, h, "h")
    qd = cfg.q_dual
    return rubio_operator(D, h**qd, cfg, K) ** (1.0 / qd)


def certify_properties(D: DyadicDomain, h, cfg: RdFConfig) -> dict:
    """Check the three Rubio de Francia properties for one ``h``.

    1. h <= R~h pointwise;
    2. |R~h|_{p'} <= 2^(1/q') |h|_{p'};
    3. M(R_K g) <= 2B R_{K+1} g pointwise with g = h^q'.

    The weight constants of R~h are reported as well, together with the
    chain [R~h]_{RH_q'} <= [R_K g]_{A_1}^(1/q') <= (2B(1 + tail))^(1/q').
    """
    h = as_function(D, h, "h")
    if not np.any(h > 0):
        raise DegenerateInputError("h vanishes identically")
    qd, pd = cfg.q_dual, cfg.p_dual
    g = h**qd
    K = cfg.terms_for(float(g.max()))
    RK, RK1 = rubio_series(D, g, cfg, K)
    Rt = RK ** (1.0 / qd)

    gap1 = float(np.max(h - Rt * (1.0 + POINTWISE_SLACK)))
    p1 = gap1 <= 0.0

    ratio = space_norm(D, Rt, pd) / space_norm(D, h, pd)
    bound2 = 2.0 ** (1.0 / qd)
    p2 = ratio <= bound2 + NORM_SLACK

    MR = maximal(D, RK, HL())
    rhs3 = 2.0 * cfg.B * RK1
    worst3 = float(np.max(MR / rhs3))
    p3 = worst3 <= 1.0 + POINTWISE_SLACK

    a1_RK = a1_constant(D, RK)
    a1_Rt = a1_constant(D, Rt)
    rh_Rt = reverse_holder_constant(D, Rt, qd)
    tail = float(np.max(RK1 / RK))
    ceiling = (2.0 * cfg.B * tail) ** (1.0 / qd)
    lhs_chain = a1_RK ** (1.0 / qd)
    p4 = (rh_Rt <= lhs_chain * (1.0 + 1e-8)
          and a1_Rt <= lhs_chain * (1.0 + 1e-8)
          and lhs_chain <= ceiling * (1.0 + 1e-8))
    return {
        "config": cfg.to_dict(),
        "terms": K,
        "B_is_upper_bound": True,
        "properties": {
            "pointwise_majorant": {"pass": bool(p1), "worst_gap": gap1, "slack": POINTWISE_SLACK},
            "norm_bound": {"pass": bool(p2), "ratio": ratio, "bound": bound2, "slack": NORM_SLACK},
            "maximal_step": {"pass": bool(p3), "worst_ratio": worst3, "slack": POINTWISE_SLACK},
            "weight_chain": {
                "pass": bool(p4),
                "rh_tilde": rh_Rt,
                "a1_tilde": a1_Rt,
                "a1_series_root": lhs_chain,
                "ceiling": ceiling,
            },
        },
        "pass": bool(p1 and p2 and p3 and p4),
    }
