"""Group presentations: dimensions, connectedness, stabilizers, double cosets, homogenies."""
import random

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from pairrank.errors import UnknownConnectedness, UnsupportedClass, VerificationFailed
from pairrank.exactfield import TowerContext
from pairrank.galgebra import (DoubleCosetSpec, ExplicitGroup, Homogeny, LatticeSubgroup, LinearSubgroup,
                               OrbitSubset, Product, Torus, VectorGroup, bounded_homogeny_search, connected,
                               contains, dim_group, double_coset_dim, generic_point, homogeny_check, identity,
                               inv, isogenous_catalog, lattice_homogeny, mul, stabilizer_subgroup, trivial_group)
from pairrank.linalg import int_rank, smith_normal_form
from pairrank.tdeg import FieldDesc

from strategies import CTX

s1, t1, t2 = CTX.var("s1"), CTX.var("t1"), CTX.var("t2")
COORDS = ("x", "y")
CIRCLE_CTX = TowerContext(("s1",), COORDS + ("l_x", "l_y", "r_x", "r_y", "u"))


def circle(with_param=True):
    v = CIRCLE_CTX.var
    x, y, lx, ly, rx, ry, u = (v(n) for n in ("x", "y", "l_x", "l_y", "r_x", "r_y", "u"))
    one = CIRCLE_CTX.one()
    param = ((1 - u ** 2) / (1 + u ** 2), 2 * u / (1 + u ** 2)) if with_param else None
    return ExplicitGroup(CIRCLE_CTX, COORDS, (x ** 2 + y ** 2 - 1,), (one, 0 * one),
                         (lx * rx - ly * ry, lx * ry + ly * rx), (x, -y),
                         ("u",) if with_param else (), param)


def test_dimensions():
    assert dim_group(Torus(2)) == 2
    assert dim_group(LatticeSubgroup(Torus(2), [[1, -1]])) == 1
    assert dim_group(Product((VectorGroup(2), Torus(1)))) == 3
    assert dim_group(circle()) == 1
    assert dim_group(circle(with_param=False)) == 1
    assert dim_group(trivial_group(2)) == 0


def test_connectedness():
    assert connected(Torus(1)) is True
    assert connected(LatticeSubgroup(Torus(1), [[2]])) is False
    assert connected(LatticeSubgroup(Torus(2), [[2, -2]])) is False
    assert connected(LatticeSubgroup(Torus(2), [[1, -1]])) is True
    assert connected(circle(with_param=False)) is None
    assert connected(circle()) is True


def test_explicit_group_laws():
    G = circle()
    p, _ = generic_point(G, CTX, "w", small=False)
    assert contains(G, p)
    assert mul(G, identity(G), p) == p
    assert mul(G, p, inv(G, p)) == identity(G)


def test_explicit_group_rejects_bad_identity():
    v = CIRCLE_CTX.var
    one = CIRCLE_CTX.one()
    with pytest.raises((VerificationFailed, ValueError)):
        ExplicitGroup(CIRCLE_CTX, COORDS, (v("x") ** 2 + v("y") ** 2 - 1,), (0 * one, one),
                      (v("l_x") * v("r_x") - v("l_y") * v("r_y"), v("l_x") * v("r_y") + v("l_y") * v("r_x")),
                      (v("x"), -v("y")))


def test_lattice_rows_are_checked():
    with pytest.raises(ValueError):
        LatticeSubgroup(Torus(2), [[1, 0, 1]])
    with pytest.raises(ValueError):
        LatticeSubgroup(Product((VectorGroup(1), Torus(1))), [[1, 1]])


def test_linear_subgroup_needs_small_coefficients():
    with pytest.raises(ValueError):
        LinearSubgroup(VectorGroup(2), [[t1, CTX.one()]])
    assert dim_group(LinearSubgroup(VectorGroup(2), [[s1, CTX.one()]])) == 1


def test_stabilizer_vector_line():
    H = stabilizer_subgroup(OrbitSubset(VectorGroup(2), (t1, t1)))
    assert dim_group(H) == 1
    assert contains(H, (s1, s1)) and not contains(H, (s1, 2 * s1))


def test_stabilizer_torus_ratio():
    H = stabilizer_subgroup(OrbitSubset(Torus(2), (t1, s1 * t1)))
    assert dim_group(H) == 1
    assert contains(H, (s1, s1)) and not contains(H, (s1, s1 ** 2))


def test_stabilizer_whole_orbit():
    assert dim_group(stabilizer_subgroup(OrbitSubset(Torus(2), (t1, t2)))) == 2
    assert dim_group(stabilizer_subgroup(OrbitSubset(VectorGroup(1), (t1,)))) == 1


def test_stabilizer_of_small_point_is_trivial():
    assert dim_group(stabilizer_subgroup(OrbitSubset(VectorGroup(1), (s1,)))) == 0


def test_stabilizer_rejects_explicit():
    with pytest.raises(UnsupportedClass):
        stabilizer_subgroup(OrbitSubset(circle(), (t1, t2)))


def test_double_coset_examples():
    G2 = Torus(2)
    one = CTX.one()
    triv = trivial_group(2)
    assert double_coset_dim(DoubleCosetSpec(VectorGroup(2), triv, triv, (0 * one, 0 * one))) == 0
    assert double_coset_dim(DoubleCosetSpec(G2, G2, G2, (one, one))) == 2
    H1 = LatticeSubgroup(G2, [[1, -1]])
    H3 = LatticeSubgroup(G2, [[0, 1]])
    assert double_coset_dim(DoubleCosetSpec(G2, H1, H3, (t1, t2)), FieldDesc((t1, t2))) == 2


def test_double_coset_rejects_point_outside():
    with pytest.raises(VerificationFailed):
        DoubleCosetSpec(LatticeSubgroup(Torus(2), [[1, -1]]), Torus(2), Torus(2), (t1, t2))


def test_homogeny_examples():
    T = Torus(1)
    square = homogeny_check(lattice_homogeny(T, T, [[2]]))
    assert (square.is_homogeny, square.is_isogeny) == (True, True)
    assert homogeny_check(Homogeny(LatticeSubgroup(Product((T, T)), [[1, 0]]), T, T)).is_homogeny is False
    zero_map = homogeny_check(lattice_homogeny(T, T, [[0]]))
    assert (zero_map.is_homogeny, zero_map.is_isogeny) == (True, False)


def test_homogeny_refuses_disconnected():
    mu2 = LatticeSubgroup(Torus(1), [[2]])
    with pytest.raises(UnknownConnectedness):
        homogeny_check(lattice_homogeny(mu2, Torus(1), [[1]]))


def test_isogeny_catalog_examples():
    assert isogenous_catalog(VectorGroup(1), Torus(1)) is False
    assert isogenous_catalog(Torus(2), Torus(2)) is True
    assert isogenous_catalog(VectorGroup(2), Torus(2)) is False
    assert isogenous_catalog(circle(), Torus(1)) is None
    assert not bounded_homogeny_search(VectorGroup(2), Torus(2))
    subtorus = LatticeSubgroup(Torus(3), [[1, 1, -1]])
    assert bounded_homogeny_search(Torus(2), subtorus, height=1)
    assert isogenous_catalog(Torus(2), subtorus) is True


# -- properties ----------------------------------------------------------------------------------

def catalog_group(rng: random.Random):
    kind = rng.choice(["ga", "gm", "prod", "lat"])
    if kind == "ga":
        return VectorGroup(rng.randint(0, 2))
    if kind == "gm":
        return Torus(rng.randint(1, 2))
    if kind == "prod":
        return Product((VectorGroup(rng.randint(1, 2)), Torus(rng.randint(1, 2))))
    n = rng.randint(2, 3)
    rows = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(rng.randint(1, 2))]
    return LatticeSubgroup(Torus(n), rows)


groups = st.integers(0, 10**6).map(lambda s: catalog_group(random.Random(s)))


@hsettings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=1, max_size=3))
def test_lattice_dimension_matches_smith_form(rows):
    G = LatticeSubgroup(Torus(3), rows)
    assert dim_group(G) == 3 - len(smith_normal_form(rows)) == 3 - int_rank(rows)
    assert connected(G) == all(d == 1 for d in smith_normal_form(rows))


@hsettings(max_examples=25, deadline=None)
@given(groups)
def test_diagonal_is_isogeny(G):
    if not connected(G):
        return
    n = len(identity(G))
    rep = homogeny_check(lattice_homogeny(G, G, [[int(i == j) for i in range(n)] for j in range(n)]))
    assert rep.is_homogeny and rep.is_isogeny


@hsettings(max_examples=40, deadline=None)
@given(groups, groups, groups)
def test_isogeny_is_equivalence(G, H, K):
    assert isogenous_catalog(G, G)
    assert isogenous_catalog(G, H) == isogenous_catalog(H, G)
    if isogenous_catalog(G, H) and isogenous_catalog(H, K):
        assert isogenous_catalog(G, K)
    if isogenous_catalog(G, H):
        assert dim_group(G) == dim_group(H)


@hsettings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_double_coset_bounds_at_identity(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    G2 = Torus(n)
    sub = lambda: LatticeSubgroup(G2, [[rng.randint(-1, 1) for _ in range(n)] for _ in range(rng.randint(0, n))]) \
        if rng.random() < 0.8 else G2
    H1, H3 = sub(), sub()
    d = double_coset_dim(DoubleCosetSpec(G2, H1, H3, identity(G2)))
    assert max(dim_group(H1), dim_group(H3)) <= d <= dim_group(H1) + dim_group(H3)
