"""Transcendence degrees; loci over P with their canonical bases."""
import random

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from pairrank import settings
from pairrank.errors import ResourceLimit
from pairrank.tdeg import (FieldDesc, canonical_base, canonical_base_td, independent, locus_over_P, td,
                           td_elim, td_jacobian)

from strategies import BIG, CTX, SMALL, random_tuple

s1, s2, t1, t2, t3 = (CTX.var(n) for n in ("s1", "s2", "t1", "t2", "t3"))
P = FieldDesc.small()
ORACLES = [td_jacobian, td_elim]


@pytest.mark.parametrize("oracle", ORACLES)
def test_symmetric_functions_have_degree_two(oracle):
    assert oracle([t1 + t2, t1 * t2, t1 ** 2 + t2 ** 2]) == 2


@pytest.mark.parametrize("oracle", ORACLES)
def test_single_element_over_P(oracle):
    assert oracle([s1 * t1], P) == 1


@pytest.mark.parametrize("oracle", ORACLES)
def test_empty_tuple(oracle):
    assert oracle([], P) == 0
    assert oracle([], FieldDesc((t1,))) == 0


@pytest.mark.parametrize("oracle", ORACLES)
def test_algebraic_dependence(oracle):
    assert oracle([t1, t1 ** 2]) == 1


@pytest.mark.parametrize("oracle", ORACLES)
def test_over_sum(oracle):
    assert oracle([t1, t2], FieldDesc((t1 + t2,))) == 1


@pytest.mark.parametrize("oracle", ORACLES)
def test_rational_inputs(oracle):
    assert oracle([t1 / (t1 + 1), 1 / t1]) == 1
    assert oracle([t1 / t2, t2 / (s1 + t1)], P) == 2


def test_locus_of_line():
    L = locus_over_P((t1, s1 * t1))
    assert [str(g) for g in L.generators] == ["_x2 - s1*_x1"]


def test_locus_of_generic_point_is_empty():
    assert locus_over_P((t1,)).generators == ()


def test_locus_of_small_point():
    assert [str(g) for g in locus_over_P((s1,)).generators] == ["_x1 - s1"]


def test_canonical_base_examples():
    assert canonical_base_td((t1, s1 * t1)) == 1
    assert canonical_base((t1, s1 * t1)).coefficients == (-s1,)
    assert canonical_base_td((t1,)) == 0
    assert canonical_base_td((t1, t2, s1 * t1 + s2 * t2)) == 2


def test_canonical_base_over_P_is_zero():
    assert canonical_base_td((t1, s1 * t1 + s2), P) == 0


def test_independent_examples():
    assert independent([t1], [t2])
    assert not independent([t1], [t1 ** 2])
    assert not independent([t1], [s1 * t1 + s2], P)


def test_elimination_budget():
    with settings.use(budget=3):
        with pytest.raises(ResourceLimit):
            td_elim([t1 + t2 + t3, t1 * t2 + t2 * t3 + t1 * t3, t1 * t2 * t3, t1 ** 3 + t2 ** 3])


def test_both_oracle_mode_matches():
    with settings.use(oracle="both"):
        assert td([t1 + t2, t1 * t2, t1 ** 2 + t2 ** 2]) == 2


# -- properties ----------------------------------------------------------------------------

def tuples(size=None):
    return st.integers(0, 10**6).map(lambda seed: random_tuple(random.Random(seed), size))


def bases():
    return st.tuples(st.integers(0, 10**6), st.booleans()).map(
        lambda p: FieldDesc(tuple(random_tuple(random.Random(p[0]), random.Random(p[0]).randint(0, 2))), p[1]))


@hsettings(max_examples=40, deadline=None)
@given(tuples(), bases())
def test_oracles_agree(A, C):
    try:
        e = td_elim(A, C)
    except ResourceLimit:
        return
    assert td_jacobian(A, C) == e


@hsettings(max_examples=40, deadline=None)
@given(tuples(), tuples(), bases())
def test_additivity(A, B, C):
    assert td(A + B, C) == td(A, C.adjoin(*B)) + td(B, C)


@hsettings(max_examples=40, deadline=None)
@given(tuples(), tuples(), bases())
def test_base_monotonicity(A, B, C):
    assert td(A, C.adjoin(*B)) <= td(A, C)


@hsettings(max_examples=40, deadline=None)
@given(tuples(), bases())
def test_bound(A, C):
    assert td(A, C) <= min(len(A), len(SMALL) + len(BIG))


@hsettings(max_examples=40, deadline=None)
@given(tuples(), tuples(), bases())
def test_independence_symmetric(A, B, C):
    assert independent(A, B, C) == independent(B, A, C)


@hsettings(max_examples=25, deadline=None)
@given(tuples())
def test_locus_vanishes_at_witness(a):
    try:
        L = locus_over_P(a)
    except ResourceLimit:
        return
    assert all(v.is_zero() for v in L.evaluate(a))
    assert len(a) - len(L.point_vars) == 0
    assert td(a, P) <= len(a) - (1 if L.generators else 0)
