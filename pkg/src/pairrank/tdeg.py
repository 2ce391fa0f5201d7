"""Transcendence degrees by two independent oracles; loci over P with their canonical bases.

The Jacobian oracle computes ranks of gradient matrices; the elimination oracle
computes the Krull dimension of the ideal of algebraic relations. Both answer
``td(base ∪ A / base)``.
"""
from __future__ import annotations

import re
from fractions import Fraction
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from sympy import Symbol
from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, PolyRing

from . import settings
from .errors import OracleDisagreement
from .exactfield import RatExpr, TowerContext, common_context, normalize, partial_derivative
from .groebner import block_order, groebner_basis, krull_dimension
from .linalg import matrix_rank


@dataclass(frozen=True)
class FieldDesc:
    """The field generated over Q by ``generators`` (and all of P when flagged)."""

    generators: tuple[RatExpr, ...] = ()
    include_small_field: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "generators", tuple(self.generators))

    @classmethod
    def prime(cls) -> "FieldDesc":
        return cls()

    @classmethod
    def small(cls, *generators: RatExpr) -> "FieldDesc":
        return cls(tuple(generators), True)

    def adjoin(self, *generators: RatExpr) -> "FieldDesc":
        return FieldDesc(self.generators + tuple(generators), self.include_small_field)

    def with_small_field(self) -> "FieldDesc":
        return FieldDesc(self.generators, True)


@dataclass(frozen=True)
class LocusIdeal:
    """Reduced Groebner basis of the relations of a tuple over a coefficient field.

    ``polys`` live in a ring whose ground domain is Q(coefficient variables)
    (or Q), in point variables ``_xn, ..., _x1`` (declared in that order, so
    grevlex ranks later coordinates higher); ``order_tag`` names the order.
    """

    ctx: TowerContext
    point_vars: tuple[str, ...]
    coefficient_vars: tuple[str, ...]
    polys: tuple[PolyElement, ...]
    order_tag: str = "grevlex(x_n > ... > x_1)"

    @property
    def generators(self) -> tuple[PolyElement, ...]:
        return self.polys

    def coefficients(self) -> list[RatExpr]:
        """All coefficients of the basis, as elements of the tower."""
        out = []
        for p in self.polys:
            for c in p.coeffs():
                out.append(_coeff_to_ratexpr(c, self.ctx, self.coefficient_vars))
        return out

    def evaluate(self, point: Sequence[RatExpr]) -> list[RatExpr]:
        """Substitute a tuple for the point variables in every generator."""
        ctx = common_context(point, self.ctx)
        values = [x.lift(ctx) for x in point][::-1]
        out = []
        for p in self.polys:
            total = ctx.zero()
            for m, c in p.iterterms():
                term = _coeff_to_ratexpr(c, ctx, self.coefficient_vars)
                for v, e in zip(values, m):
                    if e:
                        term = term * v ** e
                total = total + term
            out.append(total)
        return out

    def __str__(self) -> str:
        parts = [re.sub(r"_x(\d+)", r"x\1", str(p.as_expr()).replace("**", "^")) for p in self.polys]
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class CanonicalBase:
    coefficients: tuple[RatExpr, ...] = field(default_factory=tuple)


# -- conversion helpers ---------------------------------------------------------------

@lru_cache(maxsize=256)
def _coefficient_domain(coeff_vars: tuple[str, ...]):
    if not coeff_vars:
        return QQ
    return QQ.frac_field(*[Symbol(n) for n in coeff_vars])


@lru_cache(maxsize=256)
def _elim_ring(elim: tuple[str, ...], point: tuple[str, ...], coeff_vars: tuple[str, ...]) -> PolyRing:
    dom = _coefficient_domain(coeff_vars)
    sizes = [n for n in (len(elim), len(point)) if n]
    return PolyRing(elim + point, dom, block_order(sizes))


@lru_cache(maxsize=256)
def _block_ring(elim: tuple[str, ...], point: tuple[str, ...], coeff_vars: tuple[str, ...]) -> PolyRing:
    sizes = [n for n in (len(elim), len(point), len(coeff_vars)) if n]
    return PolyRing(elim + point + coeff_vars, QQ, block_order(sizes))


def _coeff_to_ratexpr(c, ctx: TowerContext, coeff_vars: tuple[str, ...]) -> RatExpr:
    if not coeff_vars:
        return ctx.const(0) + _qq_fraction(c)
    num = c.numer.set_ring(ctx.ring)
    den = c.denom.set_ring(ctx.ring)
    return normalize(num, den, ctx)


def _qq_fraction(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def _convert(p: PolyElement, ctx: TowerContext, ring: PolyRing, coeff_vars: tuple[str, ...]) -> PolyElement:
    """Map a polynomial of ``ctx.ring`` into ``ring``; coefficient variables go to the ground field."""
    names = ctx.variables
    target = {str(g): i for i, g in enumerate(ring.symbols)}
    cidx = [names.index(n) for n in coeff_vars]
    vmap = [(i, target[n]) for i, n in enumerate(names) if n in target]
    nt = ring.ngens
    if not coeff_vars:
        out = {}
        for m, c in p.iterterms():
            tm = [0] * nt
            for i, j in vmap:
                tm[j] = m[i]
            out[tuple(tm)] = c
        return ring.from_dict(out)
    dom = ring.domain
    cring = dom.field.ring
    grouped: dict[tuple, dict] = {}
    for m, c in p.iterterms():
        tm = [0] * nt
        for i, j in vmap:
            tm[j] = m[i]
        cm = tuple(m[i] for i in cidx)
        grouped.setdefault(tuple(tm), {})[cm] = c
    return ring.from_dict({tm: dom.field.new(cring.from_dict(cd), cring.one) for tm, cd in grouped.items()})


def _relation_ideal(gens: Sequence[RatExpr], coeff_vars: tuple[str, ...] | None, prefix: str = "_y",
                    coeff_block: bool = False):
    """Groebner basis of the relations among ``gens`` over Q(coeff_vars).

    Returns (basis, ring, point-variable indices, context, coefficient variables).
    Tower variables other than the coefficient variables are eliminated. With
    ``coeff_block`` the coefficient variables become a lowest block of ring
    variables over Q: the basis then generates the relations over Q[coeff_vars],
    which is far cheaper than arithmetic in the fraction field.
    """
    ctx = common_context(gens)
    gens = [g.lift(ctx) for g in gens]
    used = set()
    for g in gens:
        used |= g.variables()
    if coeff_vars is None:
        coeff_vars = ()
    coeff_vars = tuple(v for v in ctx.variables if v in coeff_vars and v in used)
    elim = tuple(v for v in ctx.variables if v in used and v not in coeff_vars)
    need_sat = any(not all(v in coeff_vars for v in _poly_vars(g.den, ctx)) for g in gens)
    elim_block = elim + (("_z",) if need_sat else ())
    # later point variables rank higher, so x2 - s1*x1 leads with x2
    point = tuple(f"{prefix}{i}" for i in range(len(gens), 0, -1))
    if coeff_block:
        ring = _block_ring(elim_block, point, coeff_vars)
        conv_coeff: tuple[str, ...] = ()
    else:
        ring = _elim_ring(elim_block, point, coeff_vars)
        conv_coeff = coeff_vars
    polys = []
    dens = ring.one
    for k, g in enumerate(gens):
        y = ring.gens[len(elim_block) + len(gens) - 1 - k]
        num = _convert(g.num, ctx, ring, conv_coeff)
        den = _convert(g.den, ctx, ring, conv_coeff)
        polys.append(y * den - num)
        if need_sat and not all(v in coeff_vars for v in _poly_vars(g.den, ctx)):
            dens = dens * den
    if need_sat:
        z = ring.gens[len(elim)]
        polys.append(z * dens - 1)
    gb = groebner_basis(polys, ring)
    pidx = list(range(len(elim_block), len(elim_block) + len(point)))
    return gb, ring, pidx, ctx, coeff_vars


def _poly_vars(p: PolyElement, ctx: TowerContext) -> set[str]:
    names = ctx.variables
    out = set()
    for m in p.itermonoms():
        out.update(names[i] for i, e in enumerate(m) if e)
    return out


# -- the two oracles -----------------------------------------------------------------

def _prepare(A: Iterable[RatExpr], base: FieldDesc) -> tuple[list[RatExpr], list[RatExpr], TowerContext]:
    A = list(A)
    ctx = common_context(list(A) + list(base.generators))
    return [a.lift(ctx) for a in A], [b.lift(ctx) for b in base.generators], ctx


def _gradient_vars(exprs: Sequence[RatExpr], ctx: TowerContext, include_small: bool) -> list[str]:
    used = set()
    for e in exprs:
        used |= e.variables()
    return [v for v in ctx.variables if v in used and not (include_small and ctx.is_small(v))]


def td_jacobian(A: Iterable[RatExpr], base: FieldDesc = FieldDesc()) -> int:
    """td(base ∪ A / base) as rank(J(base ∪ A)) − rank(J(base))."""
    A, B, ctx = _prepare(A, base)
    if not A:
        return 0
    variables = _gradient_vars(A + B, ctx, base.include_small_field)
    if not variables:
        return 0
    grad = {}

    def row(e: RatExpr) -> list[RatExpr]:
        if e not in grad:
            grad[e] = [partial_derivative(e, v) for v in variables]
        return grad[e]

    rows_b = [row(b) for b in B]
    rank_b = matrix_rank(rows_b) if rows_b else 0
    return matrix_rank(rows_b + [row(a) for a in A]) - rank_b


def _relation_dim(gens: Sequence[RatExpr], coeff_vars: tuple[str, ...] | None) -> int:
    if not gens:
        return 0
    gb, ring, pidx, _, _ = _relation_ideal(gens, coeff_vars)
    return krull_dimension(gb, pidx)


def _components(items: list[tuple[RatExpr, set[str]]]) -> list[list[RatExpr]]:
    parent: dict[str, str] = {}

    def find(v: str) -> str:
        while parent.setdefault(v, v) != v:
            v = parent[v]
        return v

    for _, vs in items:
        vs = sorted(vs)
        for v in vs[1:]:
            parent[find(v)] = find(vs[0])
    groups: dict[str, list[RatExpr]] = {}
    for g, vs in items:
        groups.setdefault(find(min(vs)), []).append(g)
    return list(groups.values())


def _elim_rank(gens: Sequence[RatExpr], coeff_vars: tuple[str, ...] | None) -> int:
    """td of ``gens`` over Q(coeff_vars), with exact reductions before elimination.

    Elements without free variables are algebraic over the coefficient field.
    An element owning a variable no other element uses is transcendental over
    the rest. Variable-disjoint groups contribute additively. What remains is
    decided greedily in the algebraic matroid, each step by the dimension of a
    saturated elimination ideal; the greedy set never outgrows the number of
    free variables.
    """
    coeff = set(coeff_vars or ())
    items = [(g, g.variables() - coeff) for g in gens]
    items = [(g, vs) for g, vs in items if vs]
    total = 0
    changed = True
    while changed:
        changed = False
        count: dict[str, int] = {}
        for _, vs in items:
            for v in vs:
                count[v] = count.get(v, 0) + 1
        for k, (_, vs) in enumerate(items):
            if any(count[v] == 1 for v in vs):
                del items[k]
                total += 1
                changed = True
                break
    for comp in _components(items):
        nvars = len(set().union(*(g.variables() - coeff for g in comp)))
        chosen: list[RatExpr] = []
        for f in comp:
            if len(chosen) == nvars:
                break
            if _relation_dim(chosen + [f], coeff_vars) == len(chosen) + 1:
                chosen.append(f)
        total += len(chosen)
    return total


def td_elim(A: Iterable[RatExpr], base: FieldDesc = FieldDesc()) -> int:
    """td(base ∪ A / base) from Krull dimensions of relation ideals."""
    A, B, ctx = _prepare(A, base)
    if not A:
        return 0
    if base.include_small_field:
        # td over Q(s) ∪ B equals td over Q of s ∪ B ∪ A minus that of s ∪ B;
        # this keeps every Groebner computation over Q instead of Q(s)
        used = set()
        for e in A + B:
            used |= e.variables()
        B = [ctx.var(v) for v in ctx.small_vars if v in used] + B
    return _elim_rank(B + A, None) - _elim_rank(B, None)


@lru_cache(maxsize=4096)
def _td_cached(A: tuple[RatExpr, ...], B: tuple[RatExpr, ...], flag: bool,
               smalls: frozenset, oracle: str) -> int:
    base = FieldDesc(B, flag)
    if oracle == "jacobian":
        return td_jacobian(A, base)
    if oracle == "elim":
        return td_elim(A, base)
    j, e = td_jacobian(A, base), td_elim(A, base)
    if j != e:
        raise OracleDisagreement(f"Jacobian oracle gives {j}, elimination oracle gives {e}")
    return j


def td(A: Iterable[RatExpr], base: FieldDesc = FieldDesc()) -> int:
    """Transcendence degree with the oracle selected in the current settings."""
    A = tuple(A)
    if not A:
        return 0
    ctx = common_context(A + base.generators)
    return _td_cached(A, base.generators, base.include_small_field, frozenset(ctx.small_vars),
                      settings.current().oracle)


# -- loci and canonical bases ----------------------------------------------------------

def locus_over(a: Sequence[RatExpr], coefficient_vars: Sequence[str]) -> LocusIdeal:
    """Locus of ``a`` over Q(coefficient_vars) as a reduced Groebner basis (grevlex)."""
    a = list(a)
    ctx = common_context(a)
    if not a:
        return LocusIdeal(ctx, (), (), ())
    gb, ring, pidx, ctx, coeff = _relation_ideal(a, tuple(coefficient_vars), prefix="_x", coeff_block=True)
    lo, hi = pidx[0], pidx[-1] + 1
    point_names = tuple(str(s) for s in ring.symbols[lo:hi])
    dom = _coefficient_domain(coeff)
    pring = PolyRing(point_names, dom, "grevlex")
    cring = dom.field.ring if coeff else None
    out = []
    for g in gb:
        if any(any(m[:lo]) for m in g.itermonoms()):
            continue
        terms: dict = {}
        for m, c in g.iterterms():
            if coeff:
                c = dom.field.new(cring({m[hi:]: c}), cring.one)
            terms[m[lo:hi]] = terms.get(m[lo:hi], dom.zero) + c
        out.append(pring.from_dict(terms))
    # a block-order basis over Q[coeff] is a basis over Q(coeff); reduce it
    out = groebner_basis(out, pring) if coeff else out
    out.sort(key=lambda p: pring.order(p.LM), reverse=True)
    return LocusIdeal(ctx, point_names, coeff, tuple(out))


def locus_over_P(a: Sequence[RatExpr]) -> LocusIdeal:
    """Loc(a/P): relations of ``a`` with coefficients in the small field."""
    ctx = common_context(a)
    return locus_over(a, ctx.small_vars)


def canonical_base(a: Sequence[RatExpr], locus: LocusIdeal | None = None) -> CanonicalBase:
    """Non-constant coefficients of the reduced basis of Loc(a/P)."""
    locus = locus or locus_over_P(a)
    seen: list[RatExpr] = []
    for c in locus.coefficients():
        if not c.is_constant() and c not in seen:
            seen.append(c)
    return CanonicalBase(tuple(seen))


def canonical_base_td(a: Sequence[RatExpr], over: FieldDesc = FieldDesc()) -> int:
    return td(canonical_base(a).coefficients, over)


def independent(A: Sequence[RatExpr], B: Sequence[RatExpr], over: FieldDesc = FieldDesc()) -> bool:
    """Algebraic independence of A and B over the field ``over``."""
    return td(A, over) == td(A, over.adjoin(*B))


__all__ = [
    "FieldDesc", "LocusIdeal", "CanonicalBase", "td", "td_jacobian", "td_elim", "locus_over",
    "locus_over_P", "canonical_base", "canonical_base_td", "independent",
]
