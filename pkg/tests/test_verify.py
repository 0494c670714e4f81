import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twoweight.domain import DyadicDomain, lognormal
from twoweight.errors import DomainError
from twoweight.orlicz import Associate, Lr, OrliczSpace, maximal, space_norm
from twoweight.rubio import RdFConfig
from twoweight.sparse import SparseFamily, build_cz_sparse, sparse_operator
from twoweight.verify import (PAIR_FAMILIES, main_stability, main_theorem_check, perez_stability,
                              perez_theorem_check, random_instance, reports_to_csv, reports_to_jsonl,
                              rh_extrapolation_check, step1_check)
from twoweight.weights import constant_pair, make_pair_mq
from twoweight.youngfn import YoungFunction


def ones_setup(L=6):
    D = DyadicDomain(L)
    S = SparseFamily.of([D.root()])
    pair = constant_pair(D, Lr(2.0), 3.0)
    return D, S, pair, np.ones(D.n)


def test_step1_all_ones():
    D, S, pair, one = ones_setup()
    rep = step1_check(D, S, pair, one, one, 2.0)
    assert rep["lhs"] == pytest.approx(1.0) and rep["rhs"] == pytest.approx(1.0)
    assert rep["gamma"] == 1.0 and rep["kappa"] == 1.0
    assert rep["K_q"] == pytest.approx(1.0)
    assert rep["constant"] == pytest.approx(2.0)
    assert rep["pass"]
    with pytest.raises(DomainError):
        step1_check(D, S, pair, one, one, 3.0)


def test_main_all_ones_and_zero():
    D, S, pair, one = ones_setup()
    cfg = RdFConfig(2.0, 3.0)
    rep = main_theorem_check(D, S, pair, one, 2.0, cfg)
    assert rep["ratio"] == pytest.approx(1.0)
    assert rep["kappa"] == pytest.approx(1.0)
    assert rep["constant"] == pytest.approx(2 * 2 ** (1 / 1.5), rel=1e-9)
    assert rep["pass_tracked"] and rep["pass_coarse"] and rep["pass"]
    rep = main_theorem_check(D, S, pair, np.zeros(D.n), 2.0, cfg)
    assert rep["lhs"] == 0.0 and rep["pass"]
    with pytest.raises(DomainError):
        main_theorem_check(D, S, pair, one, 2.0, RdFConfig(2.0, 4.0))


def test_main_matches_direct_computation():
    rng = np.random.default_rng(12)
    D = DyadicDomain(7)
    pair = make_pair_mq(D, lognormal(D, rng, 1.0), 3.0, OrliczSpace(YoungFunction.power(2.0)))
    f = lognormal(D, rng, 1.0)
    S = build_cz_sparse(D, f)
    rep = main_theorem_check(D, S, pair, f, 2.0, RdFConfig(2.0, 3.0))
    lhs = space_norm(D, sparse_operator(D, S, f) * pair.w, 2.0)
    rhs = space_norm(D, maximal(D, f * pair.v, Associate(pair.Y)), 2.0)
    assert rep["ratio"] == pytest.approx(lhs / rhs, rel=1e-12)
    assert rep["constant"] <= rep["coarse_constant"] * (1 + 1e-9)
    assert rep["K_q_sparse"] <= rep["K_q_global"]


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.sampled_from(PAIR_FAMILIES), st.integers(4, 8))
def test_sweep_never_violates(seed, family, L):
    D = DyadicDomain(L)
    inst = random_instance(D, family, seed)
    s1 = step1_check(D, inst["S"], inst["pair"], inst["f"], inst["rho"], 2.0)
    m = main_theorem_check(D, inst["S"], inst["pair"], inst["f"], 2.0, RdFConfig(2.0, 3.0))
    assert s1["pass"], s1
    assert m["pass"], m


def test_random_instance_is_seeded():
    D = DyadicDomain(6)
    a, b = random_instance(D, "ma-inv", 5), random_instance(D, "ma-inv", 5)
    assert np.array_equal(a["f"], b["f"]) and a["S"] == b["S"]
    with pytest.raises(DomainError):
        random_instance(D, "nope", 0)


def test_perez_all_ones():
    D = DyadicDomain(6)
    pair = constant_pair(D, Lr(3.0), 3.0)
    rep = perez_theorem_check(D, pair, np.ones(D.n), 2.0)
    assert rep["ratio"] == pytest.approx(1.0)
    assert rep["K_p"] == pytest.approx(1.0)
    assert rep["Y_dual_exponent"] == pytest.approx(1.5)
    with pytest.raises(DomainError):
        perez_theorem_check(D, constant_pair(D, OrliczSpace(YoungFunction.power(2.0)), 3.0), np.ones(D.n), 2.0)


def test_rh_examples():
    D = DyadicDomain(6)
    rng = np.random.default_rng(0)
    s = rng.lognormal(0, 1, D.n)
    rep = rh_extrapolation_check(D, s, s, 2.0, 3.0)
    assert rep["status"] == "conclusion_checked"
    assert rep["C_emp"] == pytest.approx(1.0)
    assert rep["bound"] == pytest.approx(2 ** (2 / 1.5))
    assert rep["pass"]
    rep = rh_extrapolation_check(D, 2 * s, s, 2.0, 3.0)
    assert rep["status"] == "hypothesis_failed" and rep["pass"]
    assert rep["hypothesis_failures"][0]["witness"]
    # without the witness nothing refutes the hypothesis, and the conclusion fails
    rep = rh_extrapolation_check(D, 2 * s, s, 2.0, 3.0, add_witness=False)
    assert rep["status"] == "conclusion_checked" and rep["C_emp"] == pytest.approx(4.0)
    assert not rep["pass"]


def test_rh_discards_rough_samples():
    # a lone spike on 2^9 cells has RH_(3/2) constant near 512^(1/3) = 8 > 4
    D = DyadicDomain(9)
    s = np.ones(D.n)
    spike = np.full(D.n, 1e-6)
    spike[3] = 1.0
    rep = rh_extrapolation_check(D, s, s, 2.0, 3.0, rho_samples=[spike, np.ones(D.n)])
    assert rep["discarded"] and rep["discarded"][0]["sample"] == 0
    assert rep["kept"] == 2
    with pytest.raises(DomainError):
        rh_extrapolation_check(D, s, s, 2.0, 3.0, rho_samples=[np.zeros(D.n)])


def test_stability_helpers():
    m = main_stability(depths=range(8, 11))
    assert m["pass"] and len(m["ratios"]) == 3
    p = perez_stability(depths=range(8, 11))
    assert p["pass"] and set(p["per_profile"][0]) == {"smooth", "bump", "power"}


def test_report_serialisation():
    D, S, pair, one = ones_setup(4)
    rep = step1_check(D, S, pair, one, one, 2.0)
    rep["instance"] = 0
    line = reports_to_jsonl([rep])
    back = json.loads(line)
    assert back["pass"] is True and back["K_q_witness"] == [0, 0, 0]
    csv_text = reports_to_csv([rep])
    assert csv_text.splitlines()[0] == "instance,check,family,ratio,constant,pass"
