"""Exact arithmetic in the rational function field Q(s, t) of a field tower.

Small-field generators ``s`` generate P over the prime field, big-field
generators ``t`` generate M over P. Field elements are reduced fractions of
polynomials with rational coefficients, normalized so the denominator's leading
coefficient (graded reverse lex, small variables first) is 1.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from sympy.polys.domains import QQ
from sympy.polys.orderings import grevlex
from sympy.polys.rings import PolyElement, PolyRing

from . import settings
from .errors import PoleAtPoint, UnknownVariable, ZeroDenominator


@lru_cache(maxsize=None)
def poly_ring(names: tuple[str, ...]) -> PolyRing:
    # a zero-variable ring is not supported by sympy; a dummy generator stands in
    return PolyRing(names if names else ("_one",), QQ, grevlex)


@dataclass(frozen=True)
class TowerContext:
    small_vars: tuple[str, ...] = ()
    big_vars: tuple[str, ...] = ()
    char: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "small_vars", tuple(self.small_vars))
        object.__setattr__(self, "big_vars", tuple(self.big_vars))
        if self.char != 0:
            raise NotImplementedError("only characteristic 0 is supported")
        names = self.small_vars + self.big_vars
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        for n in names:
            if not n.isidentifier() or n.startswith("_"):
                raise ValueError(f"invalid variable name {n!r}")

    @property
    def variables(self) -> tuple[str, ...]:
        return self.small_vars + self.big_vars

    @property
    def ring(self) -> PolyRing:
        return poly_ring(self.variables)

    def is_small(self, name: str) -> bool:
        return name in self.small_vars

    def var(self, name: str) -> "RatExpr":
        if name not in self.variables:
            raise UnknownVariable(f"unknown variable {name!r}")
        gen = self.ring.gens[self.variables.index(name)]
        return RatExpr(self, gen, self.ring.one)

    def const(self, value) -> "RatExpr":
        q = QQ.convert(Fraction(value)) if not isinstance(value, int) else QQ(value)
        return RatExpr(self, self.ring.ground_new(q), self.ring.one)

    def zero(self) -> "RatExpr":
        return RatExpr(self, self.ring.zero, self.ring.one)

    def one(self) -> "RatExpr":
        return RatExpr(self, self.ring.one, self.ring.one)

    def extend(self, small: Iterable[str] = (), big: Iterable[str] = ()) -> "TowerContext":
        return TowerContext(self.small_vars + tuple(small), self.big_vars + tuple(big))

    def fresh(self, prefix: str, n: int, avoid: Iterable[str] = ()) -> list[str]:
        """``n`` new variable names starting with ``prefix`` not used in this context."""
        taken = set(self.variables) | set(avoid)
        out, i = [], 1
        while len(out) < n:
            name = f"{prefix}{i}"
            if name not in taken:
                out.append(name)
                taken.add(name)
            i += 1
        return out

    def merge(self, other: "TowerContext") -> "TowerContext":
        if other == self:
            return self
        for n in other.small_vars:
            if n in self.big_vars:
                raise ValueError(f"variable {n!r} is small in one context and big in another")
        for n in other.big_vars:
            if n in self.small_vars:
                raise ValueError(f"variable {n!r} is small in one context and big in another")
        small = self.small_vars + tuple(n for n in other.small_vars if n not in self.small_vars)
        big = self.big_vars + tuple(n for n in other.big_vars if n not in self.big_vars)
        return TowerContext(small, big)

    def __str__(self) -> str:
        return f"small({', '.join(self.small_vars)}) big({', '.join(self.big_vars)})"


def common_context(exprs: Iterable["RatExpr"], start: TowerContext | None = None) -> TowerContext:
    ctx = start
    for e in exprs:
        ctx = e.ctx if ctx is None else ctx.merge(e.ctx)
    return ctx if ctx is not None else TowerContext()


def _poly_of(value, ring: PolyRing) -> PolyElement:
    if isinstance(value, PolyElement):
        return value if value.ring == ring else value.set_ring(ring)
    if isinstance(value, Fraction):
        return ring.ground_new(QQ(value.numerator, value.denominator))
    return ring.ground_new(QQ.convert(value))


def normalize(num, den, ctx: TowerContext | None = None) -> "RatExpr":
    """The unique reduced representative of ``num / den``.

    ``num`` and ``den`` are polynomials of ``ctx.ring`` (or rational constants).
    """
    if ctx is None:
        for v in (num, den):
            if isinstance(v, PolyElement):
                ctx = TowerContext((), tuple(str(g) for g in v.ring.symbols if str(g) != "_one"))
                break
        else:
            ctx = TowerContext()
    ring = ctx.ring
    n, d = _poly_of(num, ring), _poly_of(den, ring)
    if not d:
        raise ZeroDenominator("denominator is the zero polynomial")
    if not n:
        return RatExpr(ctx, ring.zero, ring.one)
    if d.is_ground:
        c = d.LC
        return RatExpr(ctx, n.quo_ground(c), ring.one)
    _, n, d = n.cofactors(d)
    c = d.LC
    if c != 1:
        n, d = n.quo_ground(c), d.quo_ground(c)
    return RatExpr(ctx, n, d)


class RatExpr:
    """An element of Q(s, t); immutable, always in normal form."""

    __slots__ = ("ctx", "num", "den", "_hash")

    def __init__(self, ctx: TowerContext, num: PolyElement, den: PolyElement) -> None:
        # callers guarantee normal form; use normalize() otherwise
        self.ctx = ctx
        self.num = num
        self.den = den
        self._hash = None

    # -- context handling -------------------------------------------------
    def lift(self, ctx: TowerContext) -> "RatExpr":
        if ctx == self.ctx:
            return self
        missing = self.variables() - set(ctx.variables)
        if missing:
            raise UnknownVariable(f"variables {sorted(missing)} not in target context")
        ring = ctx.ring
        n, d = self.num.set_ring(ring), self.den.set_ring(ring)
        c = d.LC  # leading coefficient can move under a different variable order
        if c != 1:
            n, d = n.quo_ground(c), d.quo_ground(c)
        return RatExpr(ctx, n, d)

    def _coerce(self, other) -> tuple["RatExpr", "RatExpr"]:
        if isinstance(other, RatExpr):
            if other.ctx == self.ctx:
                return self, other
            ctx = self.ctx.merge(other.ctx)
            return self.lift(ctx), other.lift(ctx)
        if isinstance(other, (int, Fraction)):
            return self, self.ctx.const(other)
        return NotImplemented, NotImplemented

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        if a.den == b.den:
            return normalize(a.num + b.num, a.den, a.ctx)
        return normalize(a.num * b.den + b.num * a.den, a.den * b.den, a.ctx)

    __radd__ = __add__

    def __neg__(self):
        return RatExpr(self.ctx, -self.num, self.den)

    def __sub__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        return b + (-a)

    def __mul__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        return normalize(a.num * b.num, a.den * b.den, a.ctx)

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        if not b.num:
            raise ZeroDenominator("division by zero")
        return normalize(a.num * b.den, a.den * b.num, a.ctx)

    def __rtruediv__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        return b / a

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            if not self.num:
                raise ZeroDenominator("zero to a negative power")
            return normalize(self.den ** (-k), self.num ** (-k), self.ctx)
        return RatExpr(self.ctx, self.num ** k, self.den ** k)

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.ctx.const(other)
        if not isinstance(other, RatExpr):
            return NotImplemented
        if other.ctx != self.ctx:
            try:
                a, b = self._coerce(other)
            except ValueError:
                return False
            return a.num == b.num and a.den == b.den
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            # hash by named terms so equal elements of different contexts agree
            names = [str(g) for g in self.num.ring.symbols]

            def key(p):
                return frozenset(
                    (tuple((names[i], e) for i, e in enumerate(m) if e), c) for m, c in p.items()
                )

            self._hash = hash((key(self.num), key(self.den)))
        return self._hash

    # -- inspection -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        return self.num.is_ground and self.den.is_ground

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        q = self.num.LC if self.num else QQ(0)
        return Fraction(int(q.numerator), int(q.denominator))

    def variables(self) -> set[str]:
        names = self.ctx.variables
        out = set()
        for p in (self.num, self.den):
            for m in p.itermonoms():
                out.update(names[i] for i, e in enumerate(m) if e)
        return out

    def is_small(self) -> bool:
        """True when the element only involves small-field generators (lies in P)."""
        return all(self.ctx.is_small(v) for v in self.variables())

    def is_polynomial(self) -> bool:
        return self.den.is_ground

    def total_degree(self) -> int:
        return max(sum(m) for p in (self.num, self.den) for m in p.itermonoms()) if self.num else 0

    def degree_in(self, name: str) -> int:
        """Largest exponent of ``name`` in the numerator or denominator."""
        if name not in self.ctx.variables:
            return 0
        i = self.ctx.variables.index(name)
        return max((m[i] for p in (self.num, self.den) for m in p.itermonoms()), default=0)

    def __repr__(self) -> str:
        return f"RatExpr({self})"

    def __str__(self) -> str:
        n = _fmt_poly(self.num)
        if self.den == self.ctx.ring.one:
            return n
        d = _fmt_poly(self.den)
        if len(self.num) > 1:
            n = f"({n})"
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*(\^\d+)?|\d+", d):
            d = f"({d})"
        return f"{n}/{d}"

    # -- substitution ---------------------------------------------------------
    def subs(self, mapping: Mapping[str, "RatExpr"], ctx: TowerContext | None = None) -> "RatExpr":
        """Substitute variables by field elements (unmapped variables stay put)."""
        if ctx is None:
            ctx = common_context(mapping.values(), self.ctx)
        names = self.ctx.variables
        values = []
        for n in names:
            v = mapping.get(n)
            values.append(v.lift(ctx) if v is not None else ctx.var(n) if n in ctx.variables else None)
        n_num, n_den = eval_poly_fraction(self.num, values, ctx)
        d_num, d_den = eval_poly_fraction(self.den, values, ctx)
        return normalize(n_num * d_den, n_den * d_num, ctx)


def _fmt_poly(p: PolyElement) -> str:
    return str(p.as_expr()).replace("**", "^") if p else "0"


def eval_poly_fraction(p: PolyElement, values: Sequence[RatExpr | None], ctx: TowerContext,
                       coeff=None) -> tuple[PolyElement, PolyElement]:
    """Evaluate polynomial ``p`` at field elements; returns an unreduced (num, den) pair.

    ``coeff`` converts a coefficient of ``p`` into a RatExpr of ``ctx`` (defaults to
    rational constants). Variables whose value is None must not occur in ``p``.
    """
    ring = ctx.ring
    if not p:
        return ring.zero, ring.one
    nvars = len(values)
    maxdeg = [0] * nvars
    for m in p.itermonoms():
        for i, e in enumerate(m[:nvars]):
            if e > maxdeg[i]:
                maxdeg[i] = e
    for i, d in enumerate(maxdeg):
        if d and values[i] is None:
            raise UnknownVariable("polynomial uses a variable with no value")
    powers: dict[tuple[int, int], PolyElement] = {}

    def factor(i: int, e: int) -> PolyElement:
        key = (i, e)
        if key not in powers:
            v = values[i]
            f = v.num ** e
            if not v.den.is_ground and maxdeg[i] > e:
                f = f * v.den ** (maxdeg[i] - e)
            powers[key] = f
        return powers[key]

    common_den = ring.one
    for i, d in enumerate(maxdeg):
        if d and not values[i].den.is_ground:
            common_den *= values[i].den ** d
    terms = []
    for m, c in p.iterterms():
        t = ring.one
        for i, e in enumerate(m[:nvars]):
            if maxdeg[i] and (e or not values[i].den.is_ground):
                t = t * factor(i, e)
        if coeff is None:
            terms.append((t, ring.ground_new(c), ring.one))
        else:
            cv = coeff(c).lift(ctx)
            terms.append((t, cv.num, cv.den))
    lcm = ring.one
    for _, _, cd in terms:
        if cd != ring.one and cd != lcm:
            lcm = lcm.lcm(cd)
    total = ring.zero
    for t, cn, cd in terms:
        total += t * cn * (lcm if cd == ring.one else lcm.exquo(cd))
    return total, common_den * lcm


# -- public operations -------------------------------------------------------------

def partial_derivative(f: RatExpr, v: str) -> RatExpr:
    """Exact derivative of ``f`` with respect to the generator named ``v``."""
    ctx = f.ctx
    if v not in ctx.variables:
        raise UnknownVariable(f"unknown variable {v!r}")
    x = ctx.ring.gens[ctx.variables.index(v)]
    dn = f.num.diff(x)
    if f.den.is_ground:
        return normalize(dn, f.den, ctx)
    dd = f.den.diff(x)
    return normalize(dn * f.den - f.num * dd, f.den ** 2, ctx)


def _to_mpq(value):
    if isinstance(value, RatExpr):
        return QQ.convert(value.constant_value())
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, str):
        value = Fraction(value)
        return QQ(value.numerator, value.denominator)
    return QQ.convert(value)


def eval_poly_at(p: PolyElement, point: Sequence):
    """Evaluate a QQ polynomial at a point of exact rationals (gmpy mpq arithmetic)."""
    total = QQ(0)
    pows: dict[tuple[int, int], object] = {}
    for m, c in p.iterterms():
        t = c
        for i, e in enumerate(m):
            if e:
                key = (i, e)
                if key not in pows:
                    pows[key] = point[i] ** e
                t = t * pows[key]
        total += t
    return total


def specialize(f: RatExpr, assignment: Mapping[str, object] | None = None, seed: int | None = None) -> Fraction:
    """Exact value of ``f`` at a rational point.

    Variables of ``f`` missing from ``assignment`` are drawn uniformly from
    [-B, B] with a ``random.Random(seed)`` stream (B from the current settings);
    without a seed every occurring variable must be assigned.
    """
    assignment = dict(assignment or {})
    used = f.variables()
    names = f.ctx.variables
    missing = [n for n in names if n in used and n not in assignment]
    unknown = set(assignment) - set(names)
    if unknown:
        raise UnknownVariable(f"unknown variables {sorted(unknown)}")
    if missing:
        if seed is None:
            raise UnknownVariable(f"no value for {missing}")
        rng = random.Random(seed)
        bound = settings.current().sample_bound
        for n in missing:
            assignment[n] = rng.randint(-bound, bound)
    point = [_to_mpq(assignment.get(n, 0)) for n in names]
    if not names:
        point = [QQ(0)]
    d = eval_poly_at(f.den, point)
    if d == 0:
        raise PoleAtPoint(f"denominator of {f} vanishes at {assignment}")
    q = eval_poly_at(f.num, point) / d
    return Fraction(int(q.numerator), int(q.denominator))
