"""The ten acceptance criteria at full size, computed independently of suite.py.

Each test prints one ``[PASS]``/``[FAIL]`` line straight to the terminal.
Run as a script to get just those lines.
"""
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from twoweight.domain import CubeId, DyadicDomain, indicator
from twoweight.orlicz import (Associate, Lr, OrliczSpace, lp_norm_on_cube, maximal,
                              maximal_indicator_closed_form, orlicz_norm_on_cube, space_norm)
from twoweight.rubio import RdFConfig, certify_properties, tilde_r
from twoweight.sparse import build_cz_sparse, exceptional_sets, verify_sparsity
from twoweight.verify import main_theorem_check, random_instance, step1_check
from twoweight.weights import make_pair_mq, power_weight_blowup
from twoweight.youngfn import YoungFunction, bp_test, inverse

SEED = 20240601


@pytest.fixture
def emit(capsys):
    def _emit(k, name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {k:2d} {name}: {detail}", flush=True)
    return _emit


def rngs(tag, n):
    return [np.random.default_rng(s) for s in np.random.SeedSequence([SEED, tag]).spawn(n)]


def test_c01_orlicz_matches_lp(emit):
    D = DyadicDomain(12)
    worst = 0.0
    t0 = time.perf_counter()
    for rng in rngs(1, 1000):
        p = float(rng.uniform(1.05, 8.0))
        l = int(rng.integers(0, 13))
        Q = CubeId(int(rng.integers(2)), l, int(rng.integers(1 << l)))
        f = rng.lognormal(0, 1.5, D.n) * (rng.random(D.n) < 0.9)
        a = orlicz_norm_on_cube(D, f, Q, YoungFunction.power(p))
        b = lp_norm_on_cube(D, f, Q, p)
        if b == 0:
            assert a == 0
            continue
        cells = D.cube_cells(Q)
        direct = (np.sum(f[cells] ** p * D.mass[cells]) / np.sum(D.mass[cells])) ** (1 / p)
        assert b == pytest.approx(direct, rel=1e-12)
        worst = max(worst, abs(a / b - 1))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 10
    emit(1, "orlicz/lp agreement", ok, f"worst rel err {worst:.2e} in {dt:.2f}s (need <=1e-9, <10s)")
    assert ok


def test_c02_bp_classifier(emit):
    # analytic membership: t^r in B_p iff r < p; t^p/log(1+t)^2 always
    cases = [(YoungFunction.power(r), p, r < p) for r in (1.5, 2.0, 2.5) for p in (2.0, 3.0)]
    cases += [(YoungFunction.log_bump(p, 1.0), p, True) for p in (2.0, 3.0)]
    agree = 0
    for A, p, member in cases:
        res = bp_test(A, p)
        want = "member" if member else "non_member"
        agree += res.numeric_verdict == want and res.analytic_verdict == want
    ok = agree == len(cases)
    emit(2, "B_p classifier", ok, f"{agree}/{len(cases)} verdicts agree")
    assert ok


def closed_form_oracle(D, B, A):
    # sup over cubes containing x of 1 / A^{-1}(mu(Q)/mu(Q & B)), uniform masses
    inB = np.zeros(D.n)
    inB[list(B)] = 1
    out = np.zeros(D.n)
    for off in D.offsets:
        pos = (np.arange(D.n) - off) % D.n
        for l in range(D.depth + 1):
            w = D.n >> l
            blk = pos // w
            frac = np.bincount(blk, weights=inB, minlength=1 << l) / w
            val = np.zeros_like(frac)
            nz = frac > 0
            val[nz] = 1 / inverse(A, 1 / frac[nz])
            out = np.maximum(out, val[blk])
    return out


def test_c03_closed_form_maximal(emit):
    D = DyadicDomain(10)
    worst = 0.0
    for A in (YoungFunction.power(2.0), YoungFunction.log_bump(2.0, 1.0)):
        for rng in rngs(3, 50):
            B = rng.choice(D.n, size=int(rng.integers(1, 200)), replace=False)
            a = maximal_indicator_closed_form(D, B, A)
            b = maximal(D, indicator(D, B), OrliczSpace(A))
            assert np.allclose(a, closed_form_oracle(D, B, A), rtol=1e-10)
            worst = max(worst, float(np.max(np.abs(a - b))))
    ok = worst <= 1e-7
    emit(3, "closed-form M_A(chi_B)", ok, f"worst sup err {worst:.2e} over 100 cases (need <=1e-7)")
    assert ok


def test_c04_sparse_structure(emit):
    bad_ratio = bad_exc = 0
    worst = Fraction(0)
    for rng in rngs(4, 100):
        L = int(rng.integers(6, 11))
        masses = rng.integers(1, 9, 1 << L)
        D = DyadicDomain(L, cell_mass=masses.astype(float))
        f = rng.lognormal(0, 2.0, D.n) * (rng.random(D.n) < 0.5)
        f[int(rng.integers(D.n))] += 1.0
        lam = float(rng.choice([2.0, 3.0, 4.0, 8.0]))
        S = build_cz_sparse(D, f, lam, int(rng.integers(D.n_grids)))
        ok, ratio = verify_sparsity(D, S)
        bad_ratio += not (ok and ratio <= 1 / lam + 1e-12)
        E = exceptional_sets(D, S)
        cells = {Q: set(int(c) for c in D.cube_cells(Q)) for Q in S}
        for Q in S:
            cover = set()
            for R in S:
                if R != Q and D.contains(Q, R):
                    cover |= cells[R]
            assert set(int(c) for c in E[Q]) == cells[Q] - cover
            muQ = int(masses[list(cells[Q])].sum())
            muE = int(masses[list(cells[Q] - cover)].sum())
            worst = max(worst, Fraction(muQ - muE, muQ) * Fraction(lam).limit_denominator())
            bad_exc += not (muE <= muQ <= 2 * muE)
    ok = bad_ratio == 0 and bad_exc == 0
    emit(4, "sparse structure", ok,
         f"{bad_ratio} ratio and {bad_exc} exceptional-set failures; worst lam*ratio {float(worst):.3f}")
    assert ok


RUBIO_H = (
    lambda rng, n: rng.lognormal(0, float(rng.uniform(0.2, 2.5)), n),
    lambda rng, n: indicator_at(n, int(rng.integers(n))),
    lambda rng, n: rng.random(n) ** 8 + 1e-12,
    lambda rng, n: np.where(rng.random(n) < 0.05, rng.pareto(1.5, n) + 1, 1e-3),
)


def indicator_at(n, i):
    h = np.zeros(n)
    h[i] = 1.0
    return h


def test_c05_rubio_certification(emit):
    parts, ok = [], True
    for p, q in ((2.0, 3.0), (2.0, 4.0), (3.0, 4.0)):
        cfg = RdFConfig(p, q)
        fails, excess = 0, -math.inf
        for i, rng in enumerate(rngs(50 + int(10 * p + q), 1000)):
            D = DyadicDomain(int(rng.integers(5, 9)))
            h = RUBIO_H[i % len(RUBIO_H)](rng, D.n)
            props = certify_properties(D, h, cfg)["properties"]
            fails += not all(props[k]["pass"] for k in ("pointwise_majorant", "norm_bound", "maximal_step"))
            # recompute the norm ratio from scratch
            Rt = tilde_r(D, h, cfg)
            r = space_norm(D, Rt, cfg.p_dual) / space_norm(D, h, cfg.p_dual)
            assert r == pytest.approx(props["norm_bound"]["ratio"], rel=1e-9)
            excess = max(excess, r - 2 ** (1 / cfg.q_dual))
        ok &= fails == 0 and excess <= 1e-6
        parts.append(f"({p:g},{q:g}) {fails} fails, max excess {excess:.2e}")
    emit(5, "Rubio certification", ok, "; ".join(parts) + " (1000 h each)")
    assert ok


WEIGHT_FAMILIES = ("mq-pair", "ma-inv")


def test_c06_step1(emit):
    D = DyadicDomain(10)
    viol, worst = 0, 0.0
    t0 = time.perf_counter()
    for i, rng in enumerate(rngs(6, 500)):
        inst = random_instance(D, WEIGHT_FAMILIES[i % 2], rng)
        rep = step1_check(D, inst["S"], inst["pair"], inst["f"], inst["rho"], 2.0)
        viol += not rep["pass"]
        worst = max(worst, rep["lhs"] / rep["rhs"] / rep["constant"])
    dt = time.perf_counter() - t0
    ok = viol == 0 and worst <= 1 + 1e-8 and dt < 300
    emit(6, "step-1 inequality", ok, f"{viol} violations in 500, worst lhs/(C rhs) {worst:.3f}, {dt:.1f}s")
    assert ok


def smooth_main_ratio(L):
    D = DyadicDomain(L)
    x = D.centers
    u = 1.5 + np.cos(2 * np.pi * x) ** 2
    f = 1.0 + 4.0 * np.exp(-20 * (x - 0.6) ** 2)
    pair = make_pair_mq(D, u, 3.0, OrliczSpace(YoungFunction.power(2.0)))
    S = build_cz_sparse(D, f, 2.0)
    return main_theorem_check(D, S, pair, f, 2.0, RdFConfig(2.0, 3.0))["ratio"]


def test_c07_main_theorem(emit):
    D = DyadicDomain(10)
    viol = 0
    for i, rng in enumerate(rngs(7, 200)):
        inst = random_instance(D, WEIGHT_FAMILIES[i % 2], rng)
        rep = main_theorem_check(D, inst["S"], inst["pair"], inst["f"], 2.0, RdFConfig(2.0, 3.0))
        viol += not rep["pass_tracked"]
    ratios = [smooth_main_ratio(L) for L in range(8, 15)]
    drift = max(abs(r / ratios[0] - 1) for r in ratios)
    ok = viol == 0 and drift < 0.25
    emit(7, "main theorem", ok, f"{viol} violations in 200; smooth-instance drift {drift:.2e} (need <0.25)")
    assert ok


def test_c08_perez_stability(emit):
    consts = []
    for L in range(8, 15):
        D = DyadicDomain(L)
        x = D.centers
        best = 0.0
        for u, f in ((1.2 + np.sin(2 * np.pi * x) ** 2, np.exp(np.sin(6 * x))),
                     (np.exp(-3 * x), 1.0 + (x > 0.25) * (x < 0.4))):
            pair = make_pair_mq(D, u, 3.0, Lr(3.0))
            Mf = maximal(D, f, Associate(pair.Y))
            assert np.allclose(Mf, maximal(D, f, Lr(1.5)), rtol=1e-9)
            num = np.sum((Mf * pair.w) ** 2 * D.mass)
            den = np.sum((f * pair.v) ** 2 * D.mass)
            best = max(best, num / den)
        consts.append(best)
    drift = max(consts) / min(consts) - 1
    ok = drift < 0.25
    emit(8, "Perez maximal theorem", ok, f"constants {min(consts):.4f}..{max(consts):.4f}, drift {drift:.2e}")
    assert ok


def test_c09_power_weight_blowup(emit):
    depths = list(range(8, 17))
    grow = power_weight_blowup(0.4, 0.2, 2.0, depths)
    # the two cells of the centred cube are both 1/(2N) from 1/2
    assert np.allclose(grow, [(2.0 ** (L + 1)) ** (0.4 - 0.2) for L in depths], rtol=1e-12)
    steps = np.array(grow[1:]) / np.array(grow[:-1])
    flat = power_weight_blowup(0.3, 0.3, 2.0, depths)
    spread = max(flat) / min(flat) - 1
    ok = bool(np.all(np.abs(steps / 2**0.2 - 1) <= 0.10) and spread < 0.05)
    emit(9, "power-weight blow-up", ok,
         f"per-depth factor {steps.min():.4f}..{steps.max():.4f} vs {2**0.2:.4f}; alpha=beta spread {spread:.1e}")
    assert ok


def single_cell_ratio(L, p, cell=0):
    # M_p chi_c(x) = (1/#Q)^(1/p) for the smallest shifted cube Q holding x and c
    n = 1 << L
    D = DyadicDomain(L)
    x = np.arange(n)
    best = np.zeros(n)
    for off in D.offsets:
        a, b = (x - off) % n, (cell - off) % n
        width = 2.0 ** np.array([int(v).bit_length() for v in a ^ b])
        best = np.maximum(best, width ** (-1 / p))
    lib = maximal(D, indicator(D, [cell]), Lr(p))
    assert np.allclose(best, lib, rtol=1e-12)
    return (np.sum(best**p) / 1.0) ** (1 / p)


def test_c10_non_bp_witness(emit):
    p = 2.0
    r8, r14 = single_cell_ratio(8, p), single_cell_ratio(14, p)
    factor = r14 / r8
    ok = factor >= 2.0
    emit(10, "non-B_p witness", ok, f"growth factor {factor:.4f} from N=2^8 to 2^14 at p=2 (need >=2)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
