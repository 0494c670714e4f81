import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize

from twoweight.errors import DomainError, UnboundedConjugateError
from twoweight.youngfn import (YoungFunction, analytic_bp_verdict, bp_test, conjugate, conjugate_table,
                               evaluate, has_increasing_ratio, inverse, is_convex_sampled, is_doubling,
                               young_inequality_gap)

FAMILIES = [
    YoungFunction.power(1.5),
    YoungFunction.power(2.0),
    YoungFunction.power(3.0),
    YoungFunction.log_bump(2.0, 1.0),
    YoungFunction.log_bump(1.5, 0.5),
    YoungFunction.loglog_bump(2.0, 1.0),
    YoungFunction.loglog_bump(3.0, 0.5),
    YoungFunction.table([(1.0, 1.0), (2.0, 3.0), (4.0, 10.0)]),
]


def raw_log_bump(t, p, d):
    return t**p / math.log1p(t) ** (1 + d)


def test_power_values():
    A = YoungFunction.power(2.0)
    assert evaluate(A, 0.0) == 0.0
    assert evaluate(A, 3.0) == 9.0


def test_log_bump_above_knot_is_the_formula():
    A = YoungFunction.log_bump(2.0, 1.0)
    assert A(5.0) == pytest.approx(25.0 / math.log(6.0) ** 2, rel=1e-14)


def test_log_bump_minorant_near_origin():
    # the raw formula is not convex near 0; below the tangency point the
    # function is the line through the origin touching the formula
    A = YoungFunction.log_bump(2.0, 1.0)
    res = optimize.minimize_scalar(lambda t: raw_log_bump(t, 2, 1) / t, bounds=(0.1, 50), method="bounded",
                                   options={"xatol": 1e-10})
    assert A.knot == pytest.approx(res.x, rel=1e-6)
    slope = raw_log_bump(res.x, 2, 1) / res.x
    assert A(1.0) == pytest.approx(slope, rel=1e-9)
    assert A(1.0) < raw_log_bump(1.0, 2, 1)
    t = np.geomspace(1e-3, 1e3, 400)
    assert np.all(A(t) <= np.array([raw_log_bump(x, 2, 1) for x in t]) * (1 + 1e-12))


@pytest.mark.parametrize("A", FAMILIES, ids=lambda A: A.family + str(A.params))
def test_convex_increasing_and_zero_at_origin(A):
    t = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, 600)])
    v = A(t)
    assert v[0] == 0.0
    assert np.all(np.diff(v) >= 0)
    assert is_convex_sampled(A, t)


@given(st.lists(st.floats(1e-4, 1e4), min_size=3, max_size=3, unique=True))
def test_convexity_on_random_triples(ts):
    t1, t2, t3 = sorted(ts)
    for A in FAMILIES:
        a1, a2, a3 = (float(A(x)) for x in (t1, t2, t3))
        chord = ((t3 - t2) * a1 + (t2 - t1) * a3) / (t3 - t1)
        assert a2 <= chord * (1 + 1e-9) + 1e-12


def test_normalization():
    for A in FAMILIES[3:]:
        assert abs(A.normalize()(1.0) - 1.0) <= 1e-12
    assert YoungFunction.log_bump(2, 1, normalized=True).normalized


def test_domain_errors():
    A = YoungFunction.power(2.0)
    for bad in (-1.0, math.inf, math.nan):
        with pytest.raises(DomainError):
            evaluate(A, bad)
    with pytest.raises(DomainError):
        YoungFunction.power(1.0)
    with pytest.raises(DomainError):
        YoungFunction.table([(1.0, 1.0), (0.5, 2.0)])


def test_inverse_examples():
    assert inverse(YoungFunction.power(2.0), 4.0) == pytest.approx(2.0, rel=1e-12)
    for A in FAMILIES:
        assert inverse(A, 0.0) == 0.0
    A = YoungFunction.log_bump(2.0, 1.0)
    assert inverse(A, evaluate(A, 5.0)) == pytest.approx(5.0, abs=1e-8)


@pytest.mark.parametrize("A", FAMILIES, ids=lambda A: A.family + str(A.params))
def test_inverse_round_trip(A):
    t = np.geomspace(1e-6, 1e6, 200)
    back = inverse(A, A(t))
    assert np.max(np.abs(back / t - 1)) <= 1e-8
    s = A(t)
    assert np.all(np.abs(A(back) / s - 1) <= 1e-9)


def test_conjugate_examples():
    assert conjugate(YoungFunction.power(2.0), 2.0) == pytest.approx(1.0, rel=1e-12)
    assert conjugate(YoungFunction.power(3.0), 3.0) == pytest.approx(2.0, rel=1e-12)
    for A in FAMILIES:
        assert conjugate(A, 0.0) == 0.0


def brute_conjugate(A, s):
    # dense log grid, then a bounded refinement around the best sample
    t = np.geomspace(1e-8, 1e16, 4001)
    k = int(np.argmax(s * t - A(t)))
    lo, hi = t[max(k - 1, 0)], t[min(k + 1, t.size - 1)]
    res = optimize.minimize_scalar(lambda x: -(s * x - float(A(x))), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-14 * hi})
    return max(-res.fun, float(s * t[k] - A(t[k])), 0.0)


@pytest.mark.parametrize("A", FAMILIES[3:7], ids=lambda A: A.family + str(A.params))
def test_conjugate_matches_direct_maximisation(A):
    for s in (A.initial_slope * 1.5 + 0.1, 3.0, 17.0, 250.0):
        assert conjugate(A, s) == pytest.approx(brute_conjugate(A, s), rel=1e-9, abs=1e-12)


def test_table_conjugate_is_exact_and_bounded():
    T = YoungFunction.table([(1.0, 1.0), (2.0, 3.0)])
    # slopes 1 then 2; conj(s) = max over breakpoints of s t - A(t)
    assert conjugate(T, 1.5) == pytest.approx(max(1.5 * 1 - 1, 1.5 * 2 - 3, 0.0))
    assert conjugate(T, 0.5) == 0.0
    with pytest.raises(UnboundedConjugateError):
        conjugate(T, 5.0)


def test_conjugate_is_a_young_function():
    for A in FAMILIES[:7]:
        s = np.geomspace(1e-3, 1e3, 300)
        c = conjugate(A, s)
        assert np.all(np.diff(c) >= -1e-12 * np.abs(c[1:]))
        assert is_convex_sampled(lambda x: conjugate(A, x), s, tol=1e-8)


@pytest.mark.parametrize("r", [1.5, 2.0, 3.0])
def test_biconjugation_power(r):
    A = YoungFunction.power(r)
    tab = conjugate_table(A, n=16384, t_min=1e-2, t_max=1e3)
    s = np.linspace(0.1, 10, 50)
    back = conjugate(tab, s)
    assert np.max(np.abs(back / s**r - 1)) <= 1e-6


@pytest.mark.parametrize("A", FAMILIES[:7], ids=lambda A: A.family + str(A.params))
def test_young_inequality(A):
    rng = np.random.default_rng(7)
    a = 10 ** rng.uniform(-3, 3, 10_000)
    b = 10 ** rng.uniform(-3, 2, 10_000)
    b = np.minimum(b, 1e2)
    assert np.min(young_inequality_gap(A, a, b)) >= -1e-8
    assert young_inequality_gap(YoungFunction.power(2.0), 0.0, 0.0) == 0.0
    assert young_inequality_gap(YoungFunction.power(2.0), 1.0, 2.0) == pytest.approx(0.0, abs=1e-12)


def test_doubling():
    ok, ratio = is_doubling(YoungFunction.power(2.0))
    assert ok and ratio == pytest.approx(4.0, rel=1e-12)
    ok, ratio = is_doubling(YoungFunction.power(3.0))
    assert ok and ratio == pytest.approx(8.0, rel=1e-12)
    ok, ratio = is_doubling(YoungFunction.log_bump(2.0, 1.0))
    assert ok and ratio <= 4.0
    # an exponential-type table is flagged non-doubling on its grid
    t = np.geomspace(1e-3, 40, 80)
    E = YoungFunction.table(list(zip(t, np.expm1(t))))
    assert not is_doubling(E, t_grid=np.geomspace(1e-2, 20, 50), ceiling=1e3)[0]


def test_increasing_ratio():
    assert has_increasing_ratio(YoungFunction.power(2.0))
    assert has_increasing_ratio(YoungFunction.log_bump(2.0, 1.0))


@pytest.mark.parametrize("A,p,expected", [
    (YoungFunction.power(1.5), 2.0, "member"),
    (YoungFunction.power(2.0), 2.0, "non_member"),
    (YoungFunction.log_bump(2.0, 1.0), 2.0, "member"),
])
def test_bp_examples(A, p, expected):
    res = bp_test(A, p)
    assert res.verdict == expected
    assert res.numeric_verdict == expected
    assert len(res.tail_integrals) == len(res.ladder)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_bp_numeric_matches_analytic_for_all_families(p):
    for A in FAMILIES[:7]:
        res = bp_test(A, p)
        assert res.numeric_verdict == analytic_bp_verdict(A, p), (A, p, res.diagnostics)


def test_bp_table_has_no_analytic_verdict():
    T = YoungFunction.table([(1.0, 1.0), (2.0, 3.0)])
    res = bp_test(T, 2.0)
    assert res.analytic_verdict is None
    # eventually linear, so t^(1-p) is integrable for p = 2
    assert res.verdict == "member"


def test_table_csv(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("t,A\n1,1\n2,3\n")
    A = YoungFunction.from_csv(p)
    assert A(1.5) == pytest.approx(2.0)
    assert A(3.0) == pytest.approx(5.0)  # last slope extrapolated
    p.write_text("1,1\n1,2\n")
    with pytest.raises(DomainError):
        YoungFunction.from_csv(p)
