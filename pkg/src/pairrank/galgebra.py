"""Algebraic groups as data: catalog groups (vector groups, split tori, products,
subgroups cut out by integer or P-linear relations) and explicit presentations.

Catalog groups are commutative, so every computation reduces to linear algebra
over Q(s) for the additive coordinates and to integer lattices for the
multiplicative ones.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence, Union

from sympy.polys.rings import PolyRing

from .errors import (MissingParametrization, UnknownConnectedness, UnsupportedClass,
                     VerificationFailed)
from .exactfield import RatExpr, TowerContext, common_context
from .groebner import groebner_basis, krull_dimension, reduce_by
from .linalg import int_kernel, int_rank, is_saturated, matrix_rank, nullspace, rref
from .tdeg import FieldDesc, LocusIdeal, _coefficient_domain, _convert, locus_over_P, td

ADD, MUL = "a", "m"
_EMPTY = TowerContext()


# -- presentations ------------------------------------------------------------------

@dataclass(frozen=True)
class VectorGroup:
    """(P, +)^n."""

    n: int

    def __str__(self) -> str:
        return f"Ga({self.n})"


@dataclass(frozen=True)
class Torus:
    """(P^x, x)^n."""

    n: int

    def __str__(self) -> str:
        return f"Gm({self.n})"


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(self.factors))

    def __str__(self) -> str:
        return "product(" + ", ".join(map(str, self.factors)) + ")"


@dataclass(frozen=True)
class LatticeSubgroup:
    """Subgroup of a catalog group cut out by integer relations.

    A row r reads sum r_i x_i = 0 on additive coordinates and prod x_i^r_i = 1 on
    multiplicative ones; a row may not mix the two kinds.
    """

    parent: "Group"
    relations: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(x) for x in r) for r in self.relations)
        object.__setattr__(self, "relations", rows)
        kinds = catalog_form(self.parent).kinds
        for r in rows:
            if len(r) != len(kinds):
                raise ValueError(f"relation {list(r)} has length {len(r)}, expected {len(kinds)}")
            used = {kinds[i] for i, x in enumerate(r) if x}
            if len(used) > 1:
                raise ValueError(f"relation {list(r)} mixes additive and multiplicative coordinates")

    def __str__(self) -> str:
        return f"lattice({self.parent}, {[list(r) for r in self.relations]})"


@dataclass(frozen=True)
class LinearSubgroup:
    """Subgroup of a catalog group cut out by P-linear equations on additive coordinates."""

    parent: "Group"
    equations: tuple[tuple[RatExpr, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(r) for r in self.equations)
        object.__setattr__(self, "equations", rows)
        kinds = catalog_form(self.parent).kinds
        for r in rows:
            if len(r) != len(kinds):
                raise ValueError("equation length does not match the group")
            for k, c in zip(kinds, r):
                if not c.is_small():
                    raise ValueError(f"coefficient {c} is not in P")
                if k == MUL and not c.is_zero():
                    raise ValueError("linear equations may only involve additive coordinates")

    def __str__(self) -> str:
        return f"linear({self.parent}, {[[str(c) for c in r] for r in self.equations]})"


@dataclass(frozen=True)
class ExplicitGroup:
    """A group given by equations and rational group laws.

    Expressions live in ``ctx``: coordinates ``coords`` and their copies
    ``l_<c>``/``r_<c>`` (left and right factor of ``mul``) are big variables,
    group parameters are small variables, and ``param`` (optional) writes a
    generic point in the big variables ``param_vars``.
    """

    ctx: TowerContext
    coords: tuple[str, ...]
    equations: tuple[RatExpr, ...]
    identity: tuple[RatExpr, ...]
    mul: tuple[RatExpr, ...]
    inv: tuple[RatExpr, ...]
    param_vars: tuple[str, ...] = ()
    param: tuple[RatExpr, ...] | None = None
    verify: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        for name in ("coords", "equations", "identity", "mul", "inv", "param_vars"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.param is not None:
            object.__setattr__(self, "param", tuple(self.param))
        n = len(self.coords)
        if not (len(self.identity) == len(self.mul) == len(self.inv) == n):
            raise ValueError("identity, mul and inv must have one entry per coordinate")
        if self.param is not None and len(self.param) != n:
            raise ValueError("parametrization must have one entry per coordinate")
        if self.verify:
            _verify_explicit(self)

    def __str__(self) -> str:
        return f"explicit({', '.join(self.coords)})"


Group = Union[VectorGroup, Torus, Product, LatticeSubgroup, LinearSubgroup, ExplicitGroup]
CATALOG = (VectorGroup, Torus, Product, LatticeSubgroup, LinearSubgroup)


def trivial_group(n: int) -> Group:
    """The trivial subgroup of Ga(n), acting on n coordinates."""
    if n == 0:
        return VectorGroup(0)
    return LatticeSubgroup(VectorGroup(n), tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))


def is_catalog(G: Group) -> bool:
    return isinstance(G, CATALOG)


# -- catalog normal form ---------------------------------------------------------------

@dataclass(frozen=True)
class CatalogForm:
    """Coordinate kinds plus P-linear rows (additive part) and integer rows (toric part)."""

    kinds: tuple[str, ...]
    lin: tuple[tuple[RatExpr, ...], ...] = ()
    lat: tuple[tuple[int, ...], ...] = ()

    @property
    def add_index(self) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k == ADD]

    @property
    def mul_index(self) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k == MUL]

    def lin_rank(self) -> int:
        idx = self.add_index
        rows = [[r[i] for i in idx] for r in self.lin]
        return matrix_rank(rows) if rows and idx else 0

    def lat_rank(self) -> int:
        idx = self.mul_index
        return int_rank([[r[i] for i in idx] for r in self.lat]) if self.lat and idx else 0

    def vector_dim(self) -> int:
        return len(self.add_index) - self.lin_rank()

    def torus_dim(self) -> int:
        return len(self.mul_index) - self.lat_rank()


def catalog_form(G: Group) -> CatalogForm:
    if isinstance(G, VectorGroup):
        return CatalogForm((ADD,) * G.n)
    if isinstance(G, Torus):
        return CatalogForm((MUL,) * G.n)
    if isinstance(G, Product):
        forms = [catalog_form(f) for f in G.factors]
        kinds = tuple(k for f in forms for k in f.kinds)
        lin, lat, off = [], [], 0
        zero = _EMPTY.zero()
        for f in forms:
            n = len(f.kinds)
            pad_l, pad_r = off, len(kinds) - off - n
            lin += [(zero,) * pad_l + tuple(r) + (zero,) * pad_r for r in f.lin]
            lat += [(0,) * pad_l + tuple(r) + (0,) * pad_r for r in f.lat]
            off += n
        return CatalogForm(kinds, tuple(lin), tuple(lat))
    if isinstance(G, LatticeSubgroup):
        base = catalog_form(G.parent)
        lin, lat = list(base.lin), list(base.lat)
        for r in G.relations:
            if any(x and base.kinds[i] == ADD for i, x in enumerate(r)):
                lin.append(tuple(_EMPTY.const(x) for x in r))
            elif any(r):
                lat.append(r)
        return CatalogForm(base.kinds, tuple(lin), tuple(lat))
    if isinstance(G, LinearSubgroup):
        base = catalog_form(G.parent)
        return CatalogForm(base.kinds, base.lin + G.equations, base.lat)
    raise UnsupportedClass(f"{G} is not a catalog group")


def from_form(form: CatalogForm) -> Group:
    """A presentation realizing a catalog normal form."""
    factors = [VectorGroup(1) if k == ADD else Torus(1) for k in form.kinds]
    if all(k == ADD for k in form.kinds):
        G: Group = VectorGroup(len(form.kinds))
    elif all(k == MUL for k in form.kinds):
        G = Torus(len(form.kinds))
    else:
        G = Product(tuple(factors))
    if form.lat:
        G = LatticeSubgroup(G, form.lat)
    if form.lin:
        G = LinearSubgroup(G, form.lin)
    return G


# -- group law ------------------------------------------------------------------------

def ambient_dim(G: Group) -> int:
    if isinstance(G, ExplicitGroup):
        return len(G.coords)
    return len(catalog_form(G).kinds)


def identity(G: Group) -> tuple[RatExpr, ...]:
    if isinstance(G, ExplicitGroup):
        return G.identity
    return tuple(_EMPTY.zero() if k == ADD else _EMPTY.one() for k in catalog_form(G).kinds)


def _subs(G: ExplicitGroup, exprs: Sequence[RatExpr], mapping: dict[str, RatExpr]) -> tuple[RatExpr, ...]:
    target = common_context(mapping.values(), TowerContext(G.ctx.small_vars))
    return tuple(e.subs(mapping, target) for e in exprs)


def mul(G: Group, x: Sequence[RatExpr], y: Sequence[RatExpr]) -> tuple[RatExpr, ...]:
    if isinstance(G, ExplicitGroup):
        mapping = {f"l_{c}": a for c, a in zip(G.coords, x)}
        mapping.update({f"r_{c}": b for c, b in zip(G.coords, y)})
        return _subs(G, G.mul, mapping)
    return tuple(a + b if k == ADD else a * b for k, a, b in zip(catalog_form(G).kinds, x, y))


def inv(G: Group, x: Sequence[RatExpr]) -> tuple[RatExpr, ...]:
    if isinstance(G, ExplicitGroup):
        return _subs(G, G.inv, dict(zip(G.coords, x)))
    return tuple(-a if k == ADD else 1 / a for k, a in zip(catalog_form(G).kinds, x))


def contains(G: Group, x: Sequence[RatExpr]) -> bool:
    """Whether a point satisfies the defining equations."""
    if isinstance(G, ExplicitGroup):
        return all(e.is_zero() for e in _subs(G, G.equations, dict(zip(G.coords, x))))
    form = catalog_form(G)
    for r in form.lin:
        if not sum((c * a for c, a in zip(r, x)), _EMPTY.zero()).is_zero():
            return False
    for r in form.lat:
        v = _EMPTY.one()
        for e, a in zip(r, x):
            if e:
                v = v * a ** e
        if v != 1:
            return False
    return all(not a.is_zero() for k, a in zip(form.kinds, x) if k == MUL)


# -- parametrizations -------------------------------------------------------------------

def _add_basis(form: CatalogForm) -> list[list[RatExpr]]:
    """Basis over Q(s) of the additive solution space (vectors on additive coordinates)."""
    idx = form.add_index
    if not idx:
        return []
    rows = [[r[i] for i in idx] for r in form.lin]
    ctx = common_context([c for r in rows for c in r])
    if not rows:
        return [[ctx.one() if i == j else ctx.zero() for i in range(len(idx))] for j in range(len(idx))]
    return nullspace(rows, len(idx), ctx)


def _mul_basis(form: CatalogForm) -> list[list[int]]:
    """Cocharacters spanning the identity component of the toric part."""
    idx = form.mul_index
    if not idx:
        return []
    rows = [[r[i] for i in idx] for r in form.lat]
    if not rows:
        return [[1 if i == j else 0 for i in range(len(idx))] for j in range(len(idx))]
    return int_kernel(rows, len(idx))


def parametrize(G: Group, params: Sequence[RatExpr]) -> tuple[RatExpr, ...]:
    """Point of the identity component of G at the given parameter values.

    ``params`` must have length dim G; generic parameters give a generic point.
    """
    params = list(params)
    if isinstance(G, ExplicitGroup):
        if G.param is None:
            raise MissingParametrization(f"{G} has no parametrization")
        return _subs(G, G.param, dict(zip(G.param_vars, params)))
    form = catalog_form(G)
    adds, muls = _add_basis(form), _mul_basis(form)
    if len(params) != len(adds) + len(muls):
        raise ValueError(f"expected {len(adds) + len(muls)} parameters, got {len(params)}")
    out: list[RatExpr] = list(identity(G))
    for j, i in enumerate(form.add_index):
        out[i] = sum((p * v[j] for p, v in zip(params, adds)), _EMPTY.zero())
    tparams = params[len(adds):]
    for j, i in enumerate(form.mul_index):
        v = _EMPTY.one()
        for p, col in zip(tparams, muls):
            if col[j]:
                v = v * p ** col[j]
        out[i] = v
    return tuple(out)


def param_count(G: Group) -> int:
    if isinstance(G, ExplicitGroup):
        if G.param is None:
            raise MissingParametrization(f"{G} has no parametrization")
        return len(G.param_vars)
    form = catalog_form(G)
    return len(_add_basis(form)) + len(_mul_basis(form))


def generic_point(G: Group, avoid: TowerContext, prefix: str = "w", small: bool = True
                  ) -> tuple[tuple[RatExpr, ...], tuple[str, ...]]:
    """Generic point of the identity component in fresh parameters.

    The parameters are new small variables (points of G(P)) unless ``small`` is
    false. Returns the point and the parameter names.
    """
    n = param_count(G)
    taken = set(avoid.variables) | _group_vars(G)
    names = tuple(avoid.fresh(prefix, n, taken))
    ctx = TowerContext(names, ()) if small else TowerContext((), names)
    return parametrize(G, [ctx.var(v) for v in names]), names


def _group_vars(G: Group) -> set[str]:
    if isinstance(G, ExplicitGroup):
        return set(G.ctx.variables)
    out: set[str] = set()
    for r in catalog_form(G).lin:
        for c in r:
            out |= c.variables()
    return out


def group_small_vars(G: Group) -> tuple[str, ...]:
    """Small-field parameters the presentation depends on."""
    if isinstance(G, ExplicitGroup):
        return G.ctx.small_vars
    return tuple(sorted(_group_vars(G)))


# -- explicit group verification ------------------------------------------------------------

def _numerators_in_ideal(exprs: Sequence[RatExpr], equations: Sequence[RatExpr],
                         coords: Sequence[str]) -> bool:
    """Whether every expression vanishes on the variety of ``equations`` (as numerators)."""
    ctx = common_context(list(exprs) + list(equations))
    coeff = tuple(v for v in ctx.variables if v not in coords)
    ring = PolyRing(tuple(coords) or ("_one",), _coefficient_domain(coeff), "grevlex")
    basis = groebner_basis([_convert(e.lift(ctx).num, ctx, ring, coeff) for e in equations], ring)
    for e in exprs:
        e = e.lift(ctx)
        if e.is_zero():
            continue
        if not basis or reduce_by(_convert(e.num, ctx, ring, coeff), basis):
            return False
    return True


def _verify_explicit(G: ExplicitGroup) -> None:
    if not contains(G, G.identity):
        raise VerificationFailed("identity", "identity does not satisfy the group equations")
    if G.param is not None:
        x = G.param
        if not contains(G, x):
            raise VerificationFailed("parametrization", "parametrized point violates the equations")
        checks = [(mul(G, G.identity, x), x, "mul(identity, x) = x"),
                  (mul(G, x, inv(G, x)), G.identity, "mul(x, inv(x)) = identity")]
        for got, want, name in checks:
            if any(a != b for a, b in zip(got, want)):
                raise VerificationFailed("group_axioms", name)
        return
    x = tuple(G.ctx.var(c) for c in G.coords)
    diffs = [a - b for a, b in zip(mul(G, G.identity, x), x)]
    diffs += [a - b for a, b in zip(mul(G, x, inv(G, x)), G.identity)]
    if not _numerators_in_ideal(diffs, G.equations, G.coords):
        raise VerificationFailed("group_axioms", "group laws fail on a generic point of the equations")


# -- dimension and connectedness ----------------------------------------------------------

def dim_group(G: Group) -> int:
    """Dimension of G (of its identity component for disconnected catalog groups)."""
    if isinstance(G, ExplicitGroup):
        if G.param is not None:
            return td(G.param, FieldDesc.small())
        if not G.equations:
            return len(G.coords)
        ctx = G.ctx
        coeff = tuple(v for v in ctx.variables if v not in G.coords)
        ring = PolyRing(G.coords, _coefficient_domain(coeff), "grevlex")
        gb = groebner_basis([_convert(e.num, ctx, ring, coeff) for e in G.equations], ring)
        d = krull_dimension(gb, range(len(G.coords)))
        if d < 0:
            raise MissingParametrization("group equations define the empty set")
        return d
    form = catalog_form(G)
    return form.vector_dim() + form.torus_dim()


def connected(G: Group) -> bool | None:
    """True/False when certified, None when unknown."""
    if isinstance(G, ExplicitGroup):
        return True if G.param is not None else None
    form = catalog_form(G)
    idx = form.mul_index
    rows = [[r[i] for i in idx] for r in form.lat]
    return is_saturated(rows) if rows else True


def isogenous_catalog(G: Group, H: Group) -> bool | None:
    """Catalog decision: isogenous iff vector parts and toric parts have equal dimensions."""
    if not (is_catalog(G) and is_catalog(H)):
        return None
    f, g = catalog_form(G), catalog_form(H)
    return f.vector_dim() == g.vector_dim() and f.torus_dim() == g.torus_dim()


# -- subgroups from orbits ----------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitSubset:
    """Y = (G(P)-orbit of ``witness``) ∩ V, with V = Loc(witness/P) unless given."""

    group: Group
    witness: tuple[RatExpr, ...]
    locus: LocusIdeal | None = None


def _eval_poly(p, point: Sequence[RatExpr], locus: LocusIdeal) -> RatExpr:
    single = LocusIdeal(locus.ctx, locus.point_vars, locus.coefficient_vars, (p,))
    return single.evaluate(point)[0]


def _t_coefficient_rows(row: Sequence[RatExpr]) -> list[list[RatExpr]]:
    """Split a linear form with Q(s, t) coefficients into forms over Q(s), one per t-monomial."""
    ctx = common_context(row)
    row = [c.lift(ctx) for c in row]
    den = ctx.ring.one
    for c in row:
        if c.den != ctx.ring.one:
            den = den.lcm(c.den)
    nums = [c.num * den.exquo(c.den) for c in row]
    big = [i for i, v in enumerate(ctx.variables) if not ctx.is_small(v)]
    groups: dict[tuple, list] = {}
    for j, p in enumerate(nums):
        for m, coef in p.iterterms():
            tm = tuple(m[i] for i in big)
            sm = tuple(0 if i in big else e for i, e in enumerate(m))
            groups.setdefault(tm, [ctx.ring.zero for _ in row])[j] += ctx.ring({sm: coef})
    out = []
    for polys in groups.values():
        out.append([RatExpr(ctx, p, ctx.ring.one) for p in polys])
    return out


def stabilizer_subgroup(Y: OrbitSubset) -> Group:
    """Connected stabilizer H = {g : g*Y = Y} of a catalog orbit subset, from its Lie algebra.

    A vector (v, lam) lies in Lie(H) iff the vector field sum v_i d_i + sum lam_j x_j d_j
    kills every generator of the locus at the witness. The additive and toric
    parts separate; the toric part must be rational, and its annihilator lattice
    (saturated) cuts out the subtorus.
    """
    G = Y.group
    if not is_catalog(G):
        raise UnsupportedClass("stabilizers are computed for catalog groups only; supply the subgroup")
    form = catalog_form(G)
    a = tuple(Y.witness)
    n = len(form.kinds)
    if len(a) != n:
        raise ValueError("witness length does not match the group")
    locus = Y.locus or locus_over_P(a)
    ring_vars = locus.point_vars
    raw_rows: list[list[RatExpr]] = []
    for f in locus.polys:
        grads = []
        for i in range(n):
            # point variables are declared in reverse order
            g = f.diff(f.ring.gens[len(ring_vars) - 1 - i])
            val = _eval_poly(g, a, locus) if g else _EMPTY.zero()
            grads.append(val * a[i] if form.kinds[i] == MUL else val)
        raw_rows.append(grads)
    rows: list[list[RatExpr]] = []
    for r in raw_rows:
        rows += _t_coefficient_rows(r)
    # stay inside Lie(G)
    rows += [list(r) for r in form.lin]
    rows += [[_EMPTY.const(x) for x in r] for r in form.lat]
    ctx = common_context([c for r in rows for c in r]) if rows else _EMPTY
    add_idx, mul_idx = form.add_index, form.mul_index
    full = nullspace(rows, n, ctx) if rows else [[ctx.one() if i == j else ctx.zero() for i in range(n)]
                                                 for j in range(n)]
    add_rows = [[r[i] for i in add_idx] for r in rows]
    mul_rows = [[r[i] for i in mul_idx] for r in rows]
    h_add = _solution_rank(add_rows, len(add_idx))
    red_mul, piv = rref(mul_rows, ctx) if mul_rows and mul_idx else ([], [])
    h_mul = len(mul_idx) - len(piv)
    if len(full) != h_add + h_mul:
        raise UnsupportedClass("stabilizer Lie algebra does not split into vector and toric parts")
    lat: list[tuple[int, ...]] = []
    if mul_idx and h_mul < len(mul_idx):
        if any(not c.is_constant() for r in red_mul for c in r):
            raise UnsupportedClass("toric stabilizer is not defined over Q")
        basis = nullspace(red_mul, len(mul_idx), ctx)
        ints = [_integral(v) for v in basis]
        chars = int_kernel(ints, len(mul_idx)) if ints else [
            [1 if i == j else 0 for i in range(len(mul_idx))] for j in range(len(mul_idx))]
        for ch in chars:
            row = [0] * n
            for j, i in enumerate(mul_idx):
                row[i] = ch[j]
            lat.append(tuple(row))
    lin: list[tuple[RatExpr, ...]] = []
    if add_idx:
        red_add, _ = rref(add_rows, ctx) if add_rows else ([], [])
        for r in red_add:
            row = [ctx.zero()] * n
            for j, i in enumerate(add_idx):
                row[i] = r[j]
            lin.append(tuple(row))
    parent = G
    H: Group = parent
    if lat:
        H = LatticeSubgroup(H, tuple(lat))
    if lin:
        H = LinearSubgroup(H, tuple(lin))
    return H


def _solution_rank(rows: list[list[RatExpr]], n: int) -> int:
    if not n:
        return 0
    return n - (matrix_rank(rows) if rows else 0)


def _integral(v: Sequence[RatExpr]) -> list[int]:
    from math import lcm

    fr = [c.constant_value() for c in v]
    d = lcm(*[f.denominator for f in fr]) if fr else 1
    return [int(f * d) for f in fr]


# -- projections and intersections of catalog subgroups ----------------------------------------

def project(G: Group, coords: Sequence[int]) -> Group:
    """Image of the identity component of a catalog group under a coordinate projection."""
    form = catalog_form(G)
    coords = list(coords)
    kinds = tuple(form.kinds[i] for i in coords)
    sub_add = [k for k, i in enumerate(coords) if form.kinds[i] == ADD]
    sub_mul = [k for k, i in enumerate(coords) if form.kinds[i] == MUL]
    lin: list[tuple[RatExpr, ...]] = []
    lat: list[tuple[int, ...]] = []
    add_pos = {i: j for j, i in enumerate(form.add_index)}
    mul_pos = {i: j for j, i in enumerate(form.mul_index)}
    adds = _add_basis(form)
    if sub_add:
        vecs = [[v[add_pos[coords[k]]] for k in sub_add] for v in adds]
        ctx = common_context([c for v in vecs for c in v]) if vecs else _EMPTY
        eqs = nullspace(vecs, len(sub_add), ctx) if vecs else [
            [ctx.one() if a == b else ctx.zero() for a in range(len(sub_add))] for b in range(len(sub_add))]
        for e in eqs:
            row = [_EMPTY.zero()] * len(coords)
            for j, k in enumerate(sub_add):
                row[k] = e[j]
            lin.append(tuple(row))
    muls = _mul_basis(form)
    if sub_mul:
        cols = [[v[mul_pos[coords[k]]] for k in sub_mul] for v in muls]
        chars = int_kernel(cols, len(sub_mul)) if cols else [
            [1 if a == b else 0 for a in range(len(sub_mul))] for b in range(len(sub_mul))]
        for ch in chars:
            row = [0] * len(coords)
            for j, k in enumerate(sub_mul):
                row[k] = ch[j]
            lat.append(tuple(row))
    return from_form(CatalogForm(kinds, tuple(lin), tuple(lat)))


def intersect(G: Group, H: Group) -> Group:
    """Intersection of two catalog subgroups of the same ambient group."""
    f, g = catalog_form(G), catalog_form(H)
    if f.kinds != g.kinds:
        raise ValueError("subgroups of different ambient groups")
    return from_form(CatalogForm(f.kinds, f.lin + g.lin, f.lat + g.lat))


def fibre_product(G12: Group, G23: Group, middle: int) -> Group:
    """{(g1, g2, g3) : (g1, g2) in G12, (g2, g3) in G23}, where g2 has ``middle`` coordinates."""
    f, g = catalog_form(G12), catalog_form(G23)
    n1 = len(f.kinds) - middle
    n3 = len(g.kinds) - middle
    if f.kinds[n1:] != g.kinds[:middle]:
        raise ValueError("middle coordinates do not match")
    kinds = f.kinds + g.kinds[middle:]
    zero = _EMPTY.zero()
    lin = [tuple(r) + (zero,) * n3 for r in f.lin] + [(zero,) * n1 + tuple(r) for r in g.lin]
    lat = [tuple(r) + (0,) * n3 for r in f.lat] + [(0,) * n1 + tuple(r) for r in g.lat]
    return from_form(CatalogForm(kinds, tuple(lin), tuple(lat)))


# -- double cosets ------------------------------------------------------------------------------

@dataclass(frozen=True)
class DoubleCosetSpec:
    """K = H3 * g0 * H1 inside the ambient group G2."""

    ambient: Group
    H1: Group
    H3: Group
    g0: tuple[RatExpr, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "g0", tuple(self.g0))
        if not contains(self.ambient, self.g0):
            raise VerificationFailed("g0", "connector point is not in the ambient group")


def double_coset_dim(spec: DoubleCosetSpec, params: FieldDesc = FieldDesc()) -> int:
    """td over ``params`` of a generic product h3 * g0 * h1 with independent h1, h3."""
    G = spec.ambient
    base = common_context(list(spec.g0) + list(params.generators))
    h1, names1 = generic_point(spec.H1, base, "h", small=False)
    h3, _ = generic_point(spec.H3, base.extend(big=names1), "h", small=False)
    point = mul(G, h3, mul(G, spec.g0, h1))
    return td(point, params)


# -- homogenies ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class Homogeny:
    """A candidate subgroup S of G x H, written in the product's coordinates."""

    S: Group
    G: Group
    H: Group

    def __post_init__(self) -> None:
        if ambient_dim(self.S) != ambient_dim(self.G) + ambient_dim(self.H):
            raise ValueError("S must live in the coordinates of G x H")
        if is_catalog(self.S) and is_catalog(self.G) and is_catalog(self.H):
            kinds = catalog_form(self.G).kinds + catalog_form(self.H).kinds
            if catalog_form(self.S).kinds != kinds:
                raise VerificationFailed("subgroup", "S does not have the coordinate kinds of G x H")


@dataclass(frozen=True)
class HomogenyReport:
    is_homogeny: bool
    is_isogeny: bool
    dim_S: int
    dim_pi1: int
    dim_pi2: int
    dim_ker: int
    dim_coker: int


def homogeny_check(h: Homogeny) -> HomogenyReport:
    """Dimension test for homogenies and isogenies between connected groups.

    coker(S) = {y : (1, y) in S} has dimension dim S - dim pi1(S); ker(S) =
    {x : (x, 1) in S} has dimension dim S - dim pi2(S).
    """
    for name, grp in (("G", h.G), ("H", h.H)):
        c = connected(grp)
        if c is None:
            raise UnknownConnectedness(f"connectedness of {name} = {grp} cannot be certified")
        if not c:
            raise UnknownConnectedness(f"{name} = {grp} is not connected; the dimension test does not apply")
    if is_catalog(h.S) and is_catalog(h.G) and is_catalog(h.H):
        # S must satisfy the equations of G x H
        prod = catalog_form(Product((h.G, h.H)))
        point, _ = generic_point(h.S, _EMPTY, "p", small=False)
        if not contains(from_form(prod), point):
            raise VerificationFailed("subgroup", "S is not contained in G x H")
    point, _ = generic_point(h.S, _EMPTY, "p", small=False)
    n = ambient_dim(h.G)
    P = FieldDesc.small()
    dim_s = td(point, P)
    d1 = td(point[:n], P)
    d2 = td(point[n:], P)
    dg, dh = dim_group(h.G), dim_group(h.H)
    coker = dim_s - d1
    ker = dim_s - d2
    homog = d1 == dg and coker == 0
    iso = homog and d2 == dh and ker == 0
    return HomogenyReport(homog, iso, dim_s, d1, d2, ker, coker)


def lattice_homogeny(G: Group, H: Group, matrix: Sequence[Sequence[int]]) -> Homogeny:
    """Graph of the homomorphism x -> x^M between split tori (or x -> M x between vector groups)."""
    m, n = ambient_dim(G), ambient_dim(H)
    rows = []
    for j in range(n):
        row = [0] * (m + n)
        for i in range(m):
            row[i] = int(matrix[j][i])
        row[m + j] = -1
        rows.append(tuple(row))
    return Homogeny(LatticeSubgroup(Product((G, H)), tuple(rows)), G, H)


def bounded_homogeny_search(G: Group, H: Group, height: int = 2) -> bool:
    """Exhaustive search for an isogeny graph among integer maps of bounded height.

    Only maps between groups of the same kind are algebraic; mixed kinds admit
    only the zero map, which is never an isogeny in positive dimension.
    """
    fg, fh = catalog_form(G), catalog_form(H)
    if set(fg.kinds) != set(fh.kinds) or len(set(fg.kinds)) > 1:
        return dim_group(G) == dim_group(H) == 0
    m, n = len(fg.kinds), len(fh.kinds)
    for entries in itertools.product(range(-height, height + 1), repeat=m * n):
        M = [entries[j * m:(j + 1) * m] for j in range(n)]
        if homogeny_check(lattice_homogeny(G, H, M)).is_isogeny:
            return True
    return False


__all__ = [
    "VectorGroup", "Torus", "Product", "LatticeSubgroup", "LinearSubgroup", "ExplicitGroup",
    "CatalogForm", "catalog_form", "from_form", "dim_group", "connected", "isogenous_catalog",
    "OrbitSubset", "stabilizer_subgroup", "DoubleCosetSpec", "double_coset_dim", "Homogeny",
    "HomogenyReport", "homogeny_check", "identity", "mul", "inv", "contains", "parametrize",
    "generic_point", "project", "intersect", "fibre_product", "lattice_homogeny",
    "bounded_homogeny_search", "ambient_dim", "is_catalog", "trivial_group", "group_small_vars",
]
