"""Randomised acceptance run: ten numbered checks, each returning a dict.

``quick=True`` shrinks the sample counts; tolerances never change.
"""
from __future__ import annotations

import math
import time

import numpy as np

from .domain import CubeId, DyadicDomain, indicator, lognormal
from .orlicz import (Lr, OrliczSpace, lp_norm_on_cube, maximal, maximal_indicator_closed_form,
                     orlicz_norm_on_cube, space_norm)
from .rubio import RdFConfig, certify_properties
from .sparse import build_cz_sparse, exceptional_sets, verify_sparsity
from .verify import (PAIR_FAMILIES, main_stability, main_theorem_check, perez_stability, random_instance,
                     step1_check)
from .weights import power_weight_blowup
from .youngfn import YoungFunction, bp_test

__all__ = ["CHECKS", "run_suite", "single_cell_growth"]


def _rngs(seed, tag, n):
    ss = np.random.SeedSequence([seed, tag])
    return [np.random.default_rng(s) for s in ss.spawn(n)]


def check_norm_agreement(seed, quick):
    n = 200 if quick else 1000
    D = DyadicDomain(12)
    worst = 0.0
    t0 = time.perf_counter()
    for rng in _rngs(seed, 1, n):
        p = float(rng.uniform(1.0, 6.0))
        s = int(rng.integers(D.n_grids))
        level = int(rng.integers(0, D.depth + 1))
        Q = CubeId(s, level, int(rng.integers(1 << level)))
        f = lognormal(D, rng, 1.5)
        a = orlicz_norm_on_cube(D, f, Q, YoungFunction.power(p))
        b = lp_norm_on_cube(D, f, Q, p)
        worst = max(worst, abs(a - b) / b)
    dt = time.perf_counter() - t0
    return {"worst_rel_err": worst, "seconds": dt, "samples": n,
            "pass": worst <= 1e-9 and dt < 10.0 * n / 1000}


def check_bp_classifier(seed, quick):
    cases = [(YoungFunction.power(r), p) for r in (1.5, 2.0, 2.5) for p in (2.0, 3.0)]
    cases += [(YoungFunction.log_bump(p, 1.0), p) for p in (2.0, 3.0)]
    rows = []
    for A, p in cases:
        res = bp_test(A, p)
        rows.append({"young": A.to_dict(), "p": p, "numeric": res.numeric_verdict,
                     "analytic": res.analytic_verdict})
    ok = all(r["numeric"] == r["analytic"] for r in rows)
    ok &= all(r["analytic"] == "member" for r in rows if r["young"]["family"] == "log_bump")
    return {"cases": rows, "pass": bool(ok)}


def check_closed_form(seed, quick):
    n = 10 if quick else 50
    D = DyadicDomain(10)
    worst = 0.0
    for A in (YoungFunction.power(2.0), YoungFunction.log_bump(2.0, 1.0)):
        for rng in _rngs(seed, 3, n):
            k = int(rng.integers(1, 64))
            B = rng.choice(D.n, size=k, replace=False)
            a = maximal_indicator_closed_form(D, B, A)
            b = maximal(D, indicator(D, B), OrliczSpace(A))
            worst = max(worst, float(np.max(np.abs(a - b))))
    return {"worst_sup_err": worst, "pass": worst <= 1e-7}


def check_sparse(seed, quick):
    n = 30 if quick else 100
    D = DyadicDomain(10)
    worst_ratio, bad = 0.0, 0
    for rng in _rngs(seed, 4, n):
        f = lognormal(D, rng, 2.0)
        lam = float(rng.choice([2.0, 3.0, 4.0, 8.0]))
        S = build_cz_sparse(D, f, lam, int(rng.integers(D.n_grids)))
        ok, worst = verify_sparsity(D, S)
        worst_ratio = max(worst_ratio, worst * lam)
        E = exceptional_sets(D, S)
        hm = D.heap_mass(S.shift)
        for Q, cells in E.items():
            muE = math.fsum(D.mass[cells])
            if not (muE <= hm[Q.heap] * (1 + 1e-12) and hm[Q.heap] <= 2 * muE * (1 + 1e-12)):
                bad += 1
        bad += (not ok)
    return {"worst_ratio_times_lambda": worst_ratio, "violations": bad,
            "pass": bad == 0 and worst_ratio <= 1.0 + 1e-12}


def check_rubio(seed, quick):
    n = 100 if quick else 1000
    D = DyadicDomain(8)
    out = {}
    ok = True
    for j, (p, q) in enumerate([(2.0, 3.0), (2.0, 4.0), (3.0, 4.0)]):
        cfg = RdFConfig(p, q)
        worst, fails = 0.0, 0
        for i, rng in enumerate(_rngs(seed, 50 + j, n)):
            kind = i % 3
            if kind == 0:
                h = lognormal(D, rng, 1.5)
            elif kind == 1:
                h = indicator(D, [int(rng.integers(D.n))])
            else:
                h = rng.random(D.n) ** 6
            r = certify_properties(D, h, cfg)
            nb = r["properties"]["norm_bound"]
            worst = max(worst, nb["ratio"] - nb["bound"])
            fails += not r["pass"]
        out[f"{p:g},{q:g}"] = {"worst_excess": worst, "failures": fails}
        ok &= fails == 0 and worst <= 1e-6
    return {"by_exponents": out, "pass": bool(ok)}


def _sweep(check, seed, tag, n, depth):
    D = DyadicDomain(depth)
    viol = 0
    worst = 0.0
    for i, rng in enumerate(_rngs(seed, tag, n)):
        fam = PAIR_FAMILIES[i % len(PAIR_FAMILIES)]
        inst = random_instance(D, fam, rng)
        if check == "step1":
            r = step1_check(D, inst["S"], inst["pair"], inst["f"], inst["rho"], 2.0)
        else:
            r = main_theorem_check(D, inst["S"], inst["pair"], inst["f"], 2.0, RdFConfig(2.0, 3.0))
        viol += not r["pass"]
        if r["constant"] > 0:
            worst = max(worst, r["ratio"] / r["constant"])
    return viol, worst


def check_step1(seed, quick):
    n = 60 if quick else 500
    t0 = time.perf_counter()
    viol, worst = _sweep("step1", seed, 6, n, 10)
    dt = time.perf_counter() - t0
    return {"instances": n, "violations": viol, "worst_ratio_over_constant": worst, "seconds": dt,
            "pass": viol == 0 and dt < 300}


def check_main(seed, quick):
    n = 30 if quick else 200
    viol, worst = _sweep("main", seed, 7, n, 10)
    stab = main_stability(range(8, 15))
    return {"instances": n, "violations": viol, "worst_ratio_over_constant": worst,
            "stability": stab, "pass": viol == 0 and stab["pass"]}


def check_perez(seed, quick):
    stab = perez_stability(range(8, 15))
    return {"stability": stab, "pass": bool(stab["pass"])}


def check_blowup(seed, quick):
    depths = list(range(8, 17))
    grow = power_weight_blowup(0.4, 0.2, 2.0, depths)
    flat = power_weight_blowup(0.25, 0.25, 2.0, depths)
    target = 2.0**0.2
    ratios = [b / a for a, b in zip(grow, grow[1:])]
    ok_grow = all(abs(r / target - 1.0) <= 0.10 for r in ratios)
    spread = max(flat) / min(flat) - 1.0
    return {"ratios": ratios, "target": target, "flat_spread": spread,
            "pass": bool(ok_grow and spread < 0.05)}


def single_cell_growth(p: float, depths, cell_fraction: float = 0.0) -> list:
    """|M_p f|_p / |f|_p for the indicator of one cell, at each depth."""
    out = []
    for L in depths:
        D = DyadicDomain(L)
        f = indicator(D, [int(cell_fraction * D.n)])
        Mf = maximal(D, f, Lr(p))
        out.append(space_norm(D, Mf, p) / space_norm(D, f, p))
    return out


def check_non_bp(seed, quick):
    g = single_cell_growth(2.0, [8, 14])
    factor = g[1] / g[0]
    return {"ratios": g, "factor": factor, "required": 2.0, "pass": factor >= 2.0}


CHECKS = {
    1: ("orlicz_lp_agreement", check_norm_agreement),
    2: ("bp_classifier", check_bp_classifier),
    3: ("closed_form_maximal", check_closed_form),
    4: ("sparse_structure", check_sparse),
    5: ("rubio_certification", check_rubio),
    6: ("step1_inequality", check_step1),
    7: ("main_theorem", check_main),
    8: ("perez_maximal", check_perez),
    9: ("power_weight_blowup", check_blowup),
    10: ("non_bp_witness", check_non_bp),
}


def run_suite(seed: int = 0, quick: bool = True, only=None) -> list:
    rows = []
    for k, (name, fn) in CHECKS.items():
        if only and k not in only:
            continue
        res = fn(seed, quick)
        res.update(criterion=k, name=name)
        rows.append(res)
    return rows
