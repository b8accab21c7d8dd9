import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from doublephase.exponents import ExponentSet
from doublephase.gaps import (
    BRANCH_ALPHA, BRANCH_GENERAL, BRANCH_S, REGIMES, blowup_exponent, check_gap, gap_bounded, gap_general, gap_s,
)


def test_general_bound_and_tie_at_boundary():
    v = gap_general(ExponentSet(2, 2.0, 2.5, 1.0))
    assert v.bound == 2.5 and v.margin == 0.0 and v.satisfied
    assert blowup_exponent("general", ExponentSet(2, 2.0, 2.5, 1.0)) == 0.0
    assert not gap_general(ExponentSet(2, 2.0, 2.5000001, 1.0)).satisfied


def test_bounded_branch_selection():
    low_p = gap_bounded(ExponentSet(1, 2.0, 2.5, 1.0))
    assert low_p.active_branch == BRANCH_ALPHA and low_p.bound == 3.0
    high_p = gap_bounded(ExponentSet(1, 6.0, 7.5, 1.0))
    assert high_p.active_branch == BRANCH_GENERAL and high_p.bound == 8.0
    tie = gap_bounded(ExponentSet(2, 4.0, 4.5, 1.0))
    assert tie.tie and tie.active_branch == BRANCH_ALPHA


def test_s_regime_crossover_and_infinite_s():
    v = gap_s(ExponentSet(2, 2.0, 2.6, 1.0, s=6.0))
    assert v.active_branch == BRANCH_S and v.bound == 2.75
    assert v.crossover_s == pytest.approx(2 * 2 / (2 - 2 + 2))
    below = gap_s(ExponentSet(2, 2.0, 2.4, 1.0, s=2.0))
    assert below.tie and below.active_branch == BRANCH_S
    inf = gap_s(ExponentSet(1, 2.0, 2.9, 1.0, s=math.inf))
    assert inf.bound == gap_bounded(ExponentSet(1, 2.0, 2.9, 1.0)).bound
    assert gap_s(ExponentSet(1, 4.0, 4.1, 1.0, s=3.0)).crossover_s is None
    with pytest.raises(ValueError):
        gap_s(ExponentSet(1, 2.0, 2.5, 1.0))


def test_exponent_validation_and_serialization():
    for bad in [dict(n=0, p=2, q=3, alpha=1), dict(n=1, p=1.5, q=3, alpha=1), dict(n=1, p=2, q=2, alpha=1),
                dict(n=1, p=2, q=3, alpha=0), dict(n=1, p=2, q=3, alpha=1, s=1.0)]:
        with pytest.raises(ValueError):
            ExponentSet(**bad)
    e = ExponentSet(1, 2.0, 3.0, 0.5, s=math.inf)
    assert e.to_dict()["s"] == "inf"
    assert ExponentSet.from_dict(json.loads(json.dumps(e.to_dict()))) == e
    v = check_gap("bounded", e)
    assert json.loads(v.to_json())["regime"] == "bounded"
    with pytest.raises(ValueError):
        check_gap("unknown", e)
    with pytest.raises(ValueError):
        blowup_exponent("unknown", e)


exps_strategy = st.builds(
    lambda n, p, dq, a, s: ExponentSet(n, p, p + dq, a, s),
    st.integers(1, 6), st.floats(2.0, 8.0), st.floats(1e-6, 3.0), st.floats(1e-3, 1.0),
    st.one_of(st.floats(2.0, 100.0), st.just(math.inf)),
)


@settings(max_examples=300)
@given(exps=exps_strategy, regime=st.sampled_from(REGIMES))
def test_verdict_agrees_with_exponent_sign(exps, regime):
    assert check_gap(regime, exps).satisfied == (blowup_exponent(regime, exps) >= 0)


@settings(max_examples=200)
@given(exps=exps_strategy)
def test_regimes_are_nested(exps):
    # more information about w can only relax the condition
    g, b, s = gap_general(exps), gap_bounded(exps), gap_s(exps)
    assert g.bound <= b.bound
    assert g.bound <= s.bound <= b.bound + 1e-12


@settings(max_examples=200)
@given(exps=exps_strategy)
def test_margin_is_exact_difference(exps):
    v = gap_general(exps)
    exact = Fraction(exps.p) + Fraction(exps.p) * Fraction(exps.alpha) / (exps.n + 2) - Fraction(exps.q)
    assert v.margin == float(exact)
