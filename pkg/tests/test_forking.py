"""Forking: the three-condition criterion against rank drops, and real ranks."""
import random

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from pairrank.errors import UnknownConnectedness
from pairrank.forking import (grank_over_finite_set, grank_over_subsets, independent, rank_drop, star_conditions,
                              su_real, theoremB_check)
from pairrank.galgebra import LatticeSubgroup, Torus
from pairrank.imaginaries import (ZERO, GeomRank, PillayImaginary, as_imaginary, combine, coset_add,
                                  coset_mul, empty_imaginary, grank, relative_rank)
from pairrank.tdeg import FieldDesc

from strategies import CTX, SMALL, random_catalog_imaginary, random_triple, random_tuple

s1, s2, t1, t2 = (CTX.var(n) for n in ("s1", "s2", "t1", "t2"))
E1, E2, E3 = coset_add((t1,)), coset_mul((t1,)), coset_add((s1 * t1,))
EMPTY = empty_imaginary()


def test_worked_example_conditions():
    star = star_conditions(E1, E2, E3)
    assert (star.cond_a, star.cond_b, star.cond_c) == (True, True, True)
    assert star.J == 0 and star.dimK == star.dimG2 == 1
    assert independent(E1, E2, E3)
    assert rank_drop(E1, E2, E3) == ZERO
    rep = theoremB_check(E1, E2, E3)
    assert rep.agree and rep.indep and rep.drop == ZERO


def test_repeated_element_forks():
    rep = theoremB_check(E1, EMPTY, E1)
    assert rep.drop == GeomRank(1, -1)
    assert not rep.indep and rep.agree
    assert not rep.star.cond_a


def test_independent_generics():
    a, b = as_imaginary((t1,)), as_imaginary((t2,))
    rep = theoremB_check(a, EMPTY, b)
    assert rep.indep and rep.drop == ZERO and rep.agree


def test_algebraic_dependence_breaks_condition_a():
    assert not star_conditions(as_imaginary((t1,)), EMPTY, as_imaginary((t1 * t1,))).cond_a


def test_repeated_outer_element_fails_condition_c():
    rep = theoremB_check(E1, E2, E1)
    assert rep.drop == GeomRank(0, 1)
    assert rep.star.cond_a and rep.star.cond_b and not rep.star.cond_c
    assert rep.agree


def test_middle_must_be_connected():
    mid = PillayImaginary(LatticeSubgroup(Torus(1), [[2]]), (t1,))
    with pytest.raises(UnknownConnectedness):
        star_conditions(E1, mid, E3)


def test_middle_must_be_single():
    with pytest.raises(ValueError):
        star_conditions(E1, combine(E2, E3), E3)


def test_su_real_examples():
    assert su_real((t1,)) == GeomRank(1, 0)
    assert su_real((t1, s1 * t1)) == GeomRank(1, 1)
    assert su_real((s1,)) == GeomRank(0, 1)


def test_rank_over_finite_sets():
    assert grank_over_finite_set(E1, []) == grank(E1) == GeomRank(1, -1)
    assert grank_over_finite_set(E1, [E1]) == ZERO
    assert grank_over_finite_set(E1, [E2, E3]) == GeomRank(0, 1)
    assert grank_over_subsets(E1, [E2, E3]) == GeomRank(0, 1)


def test_algebraic_data_has_rank_zero():
    assert grank_over_finite_set(coset_add((t1 * t1,)), [as_imaginary((t1,))]) == ZERO


# -- properties ----------------------------------------------------------------------------

triples = st.integers(0, 10**6).map(lambda s: random_triple(random.Random(s)))


@hsettings(max_examples=15, deadline=None)
@given(triples)
def test_zero_drop_iff_independent(t):
    rep = theoremB_check(*t)
    assert rep.agree
    assert rep.star.cond_b == (rep.star.J == 0) and rep.star.J >= 0
    assert rep.star.cond_c == (rep.star.dimK == rep.star.dimG2)


@hsettings(max_examples=15, deadline=None)
@given(triples)
def test_symmetry(t):
    e1, e2, e3 = t
    assert independent(e1, e2, e3) == independent(e3, e2, e1)


@hsettings(max_examples=15, deadline=None)
@given(triples)
def test_monotonicity(t):
    e, b, c = t
    assert grank_over_finite_set(e, [b, c]) <= grank_over_finite_set(e, [b]) <= grank_over_finite_set(e, [])
    assert grank_over_finite_set(e, [b, c]) == grank_over_subsets(e, [b, c])


@hsettings(max_examples=15, deadline=None)
@given(triples)
def test_additivity(t):
    a, b, B = t
    lhs = grank_over_finite_set(combine(a, b), [B])
    assert lhs == relative_rank(a, combine(b, B)) + grank_over_finite_set(b, [B])


@hsettings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_anti_reflexivity(seed):
    e = random_catalog_imaginary(random.Random(seed))
    assert grank_over_finite_set(e, [e]) == ZERO


@hsettings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 3))
def test_compatibility_with_real_rank(seed, k):
    rng = random.Random(seed)
    a = random_tuple(rng)
    C = tuple(CTX.var(v) for v in rng.sample(SMALL, k))
    assert grank(as_imaginary(a)) == su_real(a)
    if C:
        assert grank_over_finite_set(as_imaginary(a), [as_imaginary(C)]) == su_real(a, FieldDesc(C))
