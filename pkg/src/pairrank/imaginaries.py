"""Imaginaries of Pillay form with their geometric ranks; combination of pairs and triples.

An imaginary is the code of an orbit G(P) * a. Its rank is computed from the
family of loci of the translates g * a: with g generic (fresh small parameters
w), the canonical base c(w) of Loc(g * a / P(w)) is a generic point of a
variety Z whose field of definition has the same transcendence degree as the
small-field trace of the imaginary. This gives

    gR = (td(a/P), td(c(w)) - dim G)

since td(k_Z) = td(c(w)) - dim Z and dim Z = dim G - dim Stab. A tuple of
imaginaries is handled the same way with the product group acting on the
joint witness, so no explicit code field is ever needed for ranks.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Sequence, Union

import sympy
from sympy.polys.domains import QQ
from sympy.polys.rings import PolyRing

from . import settings
from .errors import (MissingParametrization, NegativeRank, UnknownConnectedness, UnsupportedClass,
                     VerificationFailed, DimMismatch, ZeroDenominator)
from .exactfield import RatExpr, TowerContext, common_context, normalize
from .galgebra import (ADD, MUL, DoubleCosetSpec, ExplicitGroup, Group, Product, VectorGroup,
                       catalog_form, connected, contains, dim_group, double_coset_dim, fibre_product,
                       generic_point, identity, intersect, is_catalog, mul, parametrize, param_count, project,
                       stabilizer_subgroup, trivial_group, OrbitSubset)
from .groebner import groebner_basis, krull_dimension
from .linalg import matrix_rank
from .tdeg import (FieldDesc, LocusIdeal, _coeff_to_ratexpr, _coefficient_domain, canonical_base,
                   locus_over, locus_over_P, td)


# -- rank values --------------------------------------------------------------------------

@functools.total_ordering
@dataclass(frozen=True)
class GeomRank:
    """omega * n + z, ordered lexicographically."""

    omega: int = 0
    finite: int = 0

    def _key(self) -> tuple[int, int]:
        return (self.omega, self.finite)

    def __lt__(self, other: "GeomRank") -> bool:
        if not isinstance(other, GeomRank):
            return NotImplemented
        return self._key() < other._key()

    def __add__(self, other: "GeomRank") -> "GeomRank":
        return GeomRank(self.omega + other.omega, self.finite + other.finite)

    def __sub__(self, other: "GeomRank") -> "GeomRank":
        return GeomRank(self.omega - other.omega, self.finite - other.finite)

    def __neg__(self) -> "GeomRank":
        return GeomRank(-self.omega, -self.finite)

    def is_nonnegative(self) -> bool:
        return self >= ZERO

    def display(self) -> str:
        n, z = self.omega, self.finite
        if n == 0:
            return str(z)
        head = "ω" if n == 1 else "-ω" if n == -1 else f"ω·{n}"
        if z == 0:
            return head
        return f"{head}+{z}" if z > 0 else f"{head}-{-z}"

    def as_dict(self) -> dict:
        return {"omega": self.omega, "finite": self.finite, "display": self.display()}

    def __str__(self) -> str:
        return self.display()


ZERO = GeomRank(0, 0)


# -- imaginaries -----------------------------------------------------------------------------

@dataclass(frozen=True)
class ExplicitAction:
    """A rational action x -> mu(g, x) with its solver.

    ``action`` is written in the group coordinates and ``point_vars``;
    ``solver`` in ``src_<p>`` and ``dst_<p>`` and returns the group element
    carrying src to dst.
    """

    point_vars: tuple[str, ...]
    action: tuple[RatExpr, ...]
    solver: tuple[RatExpr, ...]

    def __post_init__(self) -> None:
        for name in ("point_vars", "action", "solver"):
            object.__setattr__(self, name, tuple(getattr(self, name)))


@dataclass(frozen=True)
class PillayImaginary:
    """The code of G(P) * witness.

    ``base`` is the small-field parameter tuple; ``None`` means it is computed
    canonically on demand (see :func:`orbit_base`). Catalog groups act
    coordinatewise (translation on additive, scaling on multiplicative
    coordinates) unless ``action`` is given.
    """

    group: Group
    witness: tuple[RatExpr, ...]
    base: tuple[RatExpr, ...] | None = None
    fiber: LocusIdeal | None = None
    action: ExplicitAction | None = None
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "witness", tuple(self.witness))
        if self.base is not None:
            object.__setattr__(self, "base", tuple(self.base))

    @property
    def parts(self) -> tuple["PillayImaginary", ...]:
        return (self,)

    def __str__(self) -> str:
        return self.label or f"[{self.group} * ({', '.join(map(str, self.witness))})]"


@dataclass(frozen=True)
class CombinedImaginary:
    """A tuple of Pillay imaginaries presented as one homogeneous torsor.

    ``group`` is the connected stabilizer inside the product of the part
    groups (G12 for pairs, G123 for triples) and ``witness`` the chosen
    joint representative. Triples also carry the connector ``g0`` and the
    dimension bookkeeping of the construction.
    """

    parts: tuple[PillayImaginary, ...]
    left: "Imaginary"
    right: "Imaginary"
    group: Group | None
    witness: tuple[RatExpr, ...]
    provenance: str = "catalog-derived"
    g0: tuple[RatExpr, ...] | None = None
    details: tuple = field(default=(), compare=False)

    def detail(self, key: str, default=None):
        return dict(self.details).get(key, default)

    def __str__(self) -> str:
        return "(" + ", ".join(map(str, self.parts)) + ")"


Imaginary = Union[PillayImaginary, CombinedImaginary]


def parts_of(e: Imaginary) -> tuple[PillayImaginary, ...]:
    return e.parts


def empty_imaginary() -> PillayImaginary:
    """The imaginary of the empty tuple."""
    return PillayImaginary(VectorGroup(0), (), (), label="()")


def coset_add(witness: Sequence[RatExpr], group: Group | None = None, label: str = "") -> PillayImaginary:
    """[a + H(P)] for a vector group H (the full vector group by default)."""
    witness = tuple(witness)
    return PillayImaginary(group or VectorGroup(len(witness)), witness, label=label)


def coset_mul(witness: Sequence[RatExpr], group: Group | None = None, label: str = "") -> PillayImaginary:
    """[a * T(P)] for a split torus T (the full torus by default)."""
    from .galgebra import Torus

    witness = tuple(witness)
    return PillayImaginary(group or Torus(len(witness)), witness, label=label)


def as_imaginary(a: Sequence[RatExpr], label: str = "") -> PillayImaginary:
    """A real tuple as an imaginary with trivial group; the base is its canonical base."""
    a = tuple(a)
    locus = locus_over_P(a)
    return PillayImaginary(trivial_group(len(a)), a, canonical_base(a, locus).coefficients, locus, label=label)


# -- group actions ------------------------------------------------------------------------------

def _kinds(e: PillayImaginary) -> tuple[str, ...] | None:
    if e.action is not None or not is_catalog(e.group):
        return None
    return catalog_form(e.group).kinds


def act(e: PillayImaginary, g: Sequence[RatExpr], x: Sequence[RatExpr]) -> tuple[RatExpr, ...]:
    kinds = _kinds(e)
    if kinds is not None:
        if len(x) and len(kinds) and len(kinds) != len(x):
            raise ValueError("point length does not match the group")
        return tuple(a + b if k == ADD else a * b for k, a, b in zip(kinds, g, x))
    if e.action is None:
        raise UnsupportedClass(f"explicit group {e.group} needs an explicit action")
    G = e.group
    mapping = dict(zip(group_coordinates(G), g))
    mapping.update(zip(e.action.point_vars, x))
    target = common_context(mapping.values())
    return tuple(f.subs(mapping, _target(f, target, mapping)) for f in e.action.action)


def group_coordinates(G: Group) -> tuple[str, ...]:
    """Names of group coordinates in explicit actions (g1, g2, ... for catalog groups)."""
    if isinstance(G, ExplicitGroup):
        return G.coords
    return tuple(f"g{i + 1}" for i in range(len(identity(G))))


def _target(f: RatExpr, base: TowerContext, mapping: dict) -> TowerContext:
    keep = [v for v in f.ctx.small_vars if v not in mapping]
    return base.merge(TowerContext(tuple(keep))) if keep else base


def solve_action(e: PillayImaginary, x: Sequence[RatExpr], y: Sequence[RatExpr]) -> tuple[RatExpr, ...]:
    """The group element g with g * x = y."""
    kinds = _kinds(e)
    if kinds is not None:
        return tuple(b - a if k == ADD else b / a for k, a, b in zip(kinds, x, y))
    if e.action is None:
        raise UnsupportedClass(f"explicit group {e.group} needs an explicit action")
    mapping = {f"src_{p}": a for p, a in zip(e.action.point_vars, x)}
    mapping.update({f"dst_{p}": b for p, b in zip(e.action.point_vars, y)})
    target = common_context(mapping.values())
    return tuple(f.subs(mapping, _target(f, target, mapping)) for f in e.action.solver)


def _param_identity(G: Group) -> list[int | None]:
    """Parameter values giving the identity (None when unknown)."""
    if isinstance(G, ExplicitGroup):
        return [None] * param_count(G)
    form = catalog_form(G)
    from .galgebra import _add_basis, _mul_basis

    return [0] * len(_add_basis(form)) + [1] * len(_mul_basis(form))


# -- joint torsor data ------------------------------------------------------------------------------

def _witness(parts: Sequence[PillayImaginary]) -> tuple[RatExpr, ...]:
    return tuple(x for p in parts for x in p.witness)


def _context(parts: Sequence[PillayImaginary]) -> TowerContext:
    exprs = list(_witness(parts))
    for p in parts:
        exprs += list(p.base or ())
    return common_context(exprs)


def _all_catalog(parts: Sequence[PillayImaginary]) -> bool:
    return all(_kinds(p) is not None for p in parts)


def _product_group(parts: Sequence[PillayImaginary]) -> Group:
    return Product(tuple(p.group for p in parts))


@dataclass(frozen=True)
class _Translate:
    """Group parameters for all parts: fresh small names with their context, plus the group point."""

    names: tuple[str, ...]
    ctx: TowerContext
    point: tuple[RatExpr, ...]  # concatenated group elements


def _generic_params(parts: Sequence[PillayImaginary], ctx: TowerContext, prefix: str = "w",
                    small: bool = True) -> _Translate:
    taken = set(ctx.variables)
    for p in parts:
        if isinstance(p.group, ExplicitGroup):
            taken |= set(p.group.ctx.variables)
    counts = [param_count(p.group) for p in parts]
    names = tuple(ctx.fresh(prefix, sum(counts), taken))
    wctx = ctx.extend(small=names) if small else ctx.extend(big=names)
    point, k = [], 0
    for p, c in zip(parts, counts):
        point += list(parametrize(p.group, [wctx.var(n) for n in names[k:k + c]]))
        k += c
    return _Translate(names, wctx, tuple(point))


def _act_parts(parts: Sequence[PillayImaginary], g: Sequence[RatExpr]) -> tuple[RatExpr, ...]:
    return tuple(_act_parts_on(parts, g, _witness(parts)))


def _ratexpr_to_domain(r: RatExpr, dom, coeff: tuple[str, ...]):
    if not coeff:
        return QQ.convert(r.constant_value())
    fld = dom.field
    ring = fld.ring
    idx = {n: i for i, n in enumerate(coeff)}
    names = r.ctx.variables

    def conv(p):
        out = {}
        for m, c in p.iterterms():
            tm = [0] * len(coeff)
            for i, e in enumerate(m):
                if e:
                    tm[idx[names[i]]] = e
            out[tuple(tm)] = c
        return ring.from_dict(out)

    return fld.new(conv(r.num), conv(r.den))


def _translated_basis(locus: LocusIdeal, kinds: Sequence[str], shift: Sequence[RatExpr],
                      ctx: TowerContext) -> tuple[list, TowerContext, tuple[str, ...]]:
    """Reduced basis of g * V for V = ``locus`` and g acting coordinatewise.

    Translation and scaling preserve leading terms under a degree-compatible
    order, so the shifted generators already form a basis; the Groebner
    routine only interreduces them.
    """
    coeff = tuple(ctx.small_vars)
    if not locus.polys:
        return [], ctx, coeff
    n = len(locus.point_vars)
    dom = _coefficient_domain(coeff)
    ring = PolyRing(locus.point_vars, dom, "grevlex")
    images = []
    for j in range(n):
        i = n - 1 - j  # point variables are declared in reverse order
        g = _ratexpr_to_domain(shift[i].lift(ctx), dom, coeff)
        x = ring.gens[j]
        images.append(x - ring.ground_new(g) if kinds[i] == ADD else x * ring.ground_new(dom.one / g))
    polys = []
    for f in locus.polys:
        acc = ring.zero
        for m, c in f.iterterms():
            term = ring.ground_new(_ratexpr_to_domain(_coeff_to_ratexpr(c, ctx, locus.coefficient_vars), dom, coeff))
            for x, e in zip(images, m):
                if e:
                    term = term * x ** e
            acc += term
        polys.append(acc)
    return groebner_basis(polys, ring), ctx, coeff


def _nonconstant_coefficients(basis, ctx: TowerContext, coeff: tuple[str, ...]) -> tuple[RatExpr, ...]:
    seen: list[RatExpr] = []
    for p in basis:
        for c in p.coeffs():
            r = _coeff_to_ratexpr(c, ctx, coeff)
            if not r.is_constant() and r not in seen:
                seen.append(r)
    return tuple(seen)


def _settings_key() -> tuple:
    s = settings.current()
    return (s.oracle, s.budget)


@functools.lru_cache(maxsize=512)
def _joint_locus(witness: tuple[RatExpr, ...]) -> LocusIdeal:
    return locus_over_P(witness)


def joint_locus(parts: Sequence[PillayImaginary]) -> LocusIdeal:
    return _joint_locus(_witness(parts))


@dataclass(frozen=True)
class OrbitCode:
    """Canonical-base data of the generic translate of a joint witness."""

    translate: _Translate
    code: tuple[RatExpr, ...]   # c(w)
    td_code: int                # td(c(w)) over Q
    dim_family: int             # dim Z = td(c(w) / Q(s))
    dim_group: int

    @property
    def td_base(self) -> int:
        """td of the small-field trace of the orbit's code."""
        return self.td_code - self.dim_family


def _code_at(parts: Sequence[PillayImaginary], g: Sequence[RatExpr], ctx: TowerContext) -> tuple[RatExpr, ...]:
    """Canonical-base coefficients of Loc(g * a / P) for the joint witness a."""
    if _all_catalog(parts):
        kinds = tuple(k for p in parts for k in _kinds(p))
        basis, c, coeff = _translated_basis(joint_locus(parts), kinds, g, ctx)
        return _nonconstant_coefficients(basis, c, coeff)
    point = _act_parts(parts, g)
    locus = locus_over(point, ctx.small_vars)
    return canonical_base(point, locus).coefficients


@functools.lru_cache(maxsize=512)
def _orbit_code(parts: tuple[PillayImaginary, ...], key: tuple) -> OrbitCode:
    ctx = _context(parts)
    tr = _generic_params(parts, ctx)
    code = _code_at(parts, tr.point, tr.ctx)
    smalls = FieldDesc(tuple(tr.ctx.var(v) for v in ctx.small_vars))
    td_code = td(code)
    dim_fam = td(code, smalls) if code else 0
    dim_g = sum(dim_group(p.group) for p in parts)
    return OrbitCode(tr, code, td_code, dim_fam, dim_g)


def orbit_code(parts: Sequence[PillayImaginary]) -> OrbitCode:
    return _orbit_code(tuple(parts), _settings_key())


# -- validation ---------------------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[tuple[str, bool, str], ...]

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self) -> list[str]:
        return [name for name, passed, _ in self.checks if not passed]

    def as_dict(self) -> dict:
        return {"ok": self.ok, "checks": [{"check": n, "passed": p, "detail": d} for n, p, d in self.checks]}


def _check(checks: list, name: str, fn) -> None:
    try:
        ok, detail = fn()
    except (UnsupportedClass, MissingParametrization, ZeroDenominator, VerificationFailed) as exc:
        ok, detail = False, str(exc)
    checks.append((name, bool(ok), detail))


def validate_pillay(e: PillayImaginary, require_connected: bool = True) -> ValidationReport:
    """Pass/fail for each defining property of a Pillay-form imaginary."""
    checks: list[tuple[str, bool, str]] = []
    a = e.witness
    G = e.group

    def shape():
        kinds = _kinds(e)
        if kinds is not None:
            if len(kinds) != len(a):
                return False, f"group acts on {len(kinds)} coordinates, witness has {len(a)}"
            zero = [i for i, (k, x) in enumerate(zip(kinds, a)) if k == MUL and x.is_zero()]
            if zero:
                return False, f"multiplicative coordinates {zero} of the witness vanish"
        return True, ""

    _check(checks, "shape", shape)

    def fiber():
        if e.fiber is None:
            return True, "no fiber supplied; Loc(a/P) is used"
        bad = [str(v) for v in e.fiber.evaluate(a) if not v.is_zero()]
        return not bad, "" if not bad else f"witness violates fiber relations: {bad}"

    _check(checks, "fiber", fiber)

    def conn():
        c = connected(G) if is_catalog(G) or isinstance(G, ExplicitGroup) else None
        if c is None:
            return not require_connected, "connectedness cannot be certified"
        return c or not require_connected, "" if c else "group is not connected"

    _check(checks, "connected", conn)
    if not checks[0][1]:
        return ValidationReport(tuple(checks))

    ctx = _context((e,))

    def axioms():
        t1 = _generic_params((e,), ctx, "u")
        t2 = _generic_params((e,), t1.ctx, "v")
        lhs = act(e, t1.point, act(e, t2.point, a))
        rhs = act(e, mul(G, t1.point, t2.point), a)
        if any(x != y for x, y in zip(lhs, rhs)):
            return False, "mu(g1, mu(g2, a)) differs from mu(g1 g2, a)"
        if any(x != y for x, y in zip(act(e, identity(G), a), a)):
            return False, "mu(identity, a) differs from a"
        return True, ""

    _check(checks, "action_axioms", axioms)

    def solver():
        t = _generic_params((e,), ctx, "u")
        y = act(e, t.point, a)
        g = solve_action(e, a, y)
        if any(p != q for p, q in zip(act(e, g, a), y)):
            return False, "solver does not invert the action"
        return True, ""

    _check(checks, "solver", solver)

    def free():
        t = _generic_params((e,), ctx, "u", small=False)
        orbit = act(e, t.point, a)
        d = td(orbit, FieldDesc(a, True))
        dg = dim_group(G)
        return d == dg, f"orbit dimension {d}, group dimension {dg}"

    _check(checks, "generically_free", free)

    def invariant():
        # G(P) must act on V = Loc(a/P): a generic translate stays in V
        t = _generic_params((e,), ctx, "u")
        moved = act(e, t.point, a)
        bad = [str(v) for v in joint_locus((e,)).evaluate(moved) if not v.is_zero()]
        return not bad, "" if not bad else "Loc(a/P) is not invariant under the group"

    _check(checks, "invariant_locus", invariant)

    def base():
        oc = orbit_code((e,))
        if e.base is None:
            return True, f"computed canonically (td {oc.td_base})"
        if not all(b.is_small() for b in e.base):
            return False, "base parameters must lie in P"
        tb = td(e.base)
        if tb != oc.td_base:
            return False, f"td(b) = {tb}, canonical td = {oc.td_base}"
        if td(tuple(e.base) + oc.code) != oc.td_code:
            return False, "b is not algebraic over the canonical data of the orbit"
        return True, f"td(b) = {tb}"

    _check(checks, "canonical_base", base)

    def fiber_dim():
        if e.fiber is None:
            return True, ""
        f = e.fiber
        if not f.polys:
            d = len(f.point_vars)
        else:
            d = krull_dimension(f.polys, range(len(f.point_vars)))
        ta = td(a, FieldDesc.small())
        return d == ta, f"fiber dimension {d}, td(a/P) = {ta}"

    _check(checks, "fiber_dimension", fiber_dim)
    return ValidationReport(tuple(checks))


@functools.lru_cache(maxsize=512)
def _validated(e: PillayImaginary, require_connected: bool, key: tuple) -> None:
    rep = validate_pillay(e, require_connected)
    if not rep.ok:
        name = rep.failures()[0]
        detail = next(d for n, p, d in rep.checks if n == name)
        raise VerificationFailed(name, detail)


def ensure_valid(e: Imaginary, require_connected: bool = True) -> None:
    for p in e.parts:
        _validated(p, require_connected, _settings_key())


# -- ranks -------------------------------------------------------------------------------------------

def _joint_rank(parts: tuple[PillayImaginary, ...]) -> GeomRank:
    oc = orbit_code(parts)
    n = td(_witness(parts), FieldDesc.small())
    return GeomRank(n, oc.td_code - oc.dim_group)


def grank(e: Imaginary) -> GeomRank:
    """(td(a/P), td(B_e) - dim G) for an imaginary or a tuple of imaginaries."""
    ensure_valid(e)
    return _joint_rank(e.parts)


def grank_torsor(group: Group, witness: Sequence[RatExpr], base: Sequence[RatExpr] | None = None,
                 action: ExplicitAction | None = None) -> GeomRank:
    """Rank of the code of a torsor; disconnected catalog groups use their identity component."""
    e = PillayImaginary(group, tuple(witness), None if base is None else tuple(base), action=action)
    ensure_valid(e, require_connected=False)
    n = td(e.witness, FieldDesc.small())
    dg = dim_group(group)
    if base is not None:
        return GeomRank(n, td(tuple(base)) - dg)
    oc = orbit_code((e,))
    return GeomRank(n, oc.td_code - dg)


# -- minimal representatives ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Representative:
    """A translate g * a whose canonical base is algebraic over the code's small-field trace."""

    params: tuple[RatExpr, ...]
    group_point: tuple[RatExpr, ...]
    witness: tuple[RatExpr, ...]
    base: tuple[RatExpr, ...]


_TARGETS = (1, 2, -1, 3, -2, 5)
_MAX_MINORS = 6


def _to_sympy(r: RatExpr):
    return r.num.as_expr() / r.den.as_expr()


def _from_sympy(expr, ctx: TowerContext) -> RatExpr:
    num, den = sympy.fraction(sympy.together(expr))
    ring = ctx.ring
    return normalize(ring.from_expr(num), ring.from_expr(den), ctx)


def _choose_coordinates(code: Sequence[RatExpr], wnames: Sequence[str], delta: int):
    """Pairs (rows, cols): ``delta`` code entries and ``delta`` parameters with an invertible Jacobian minor.

    Pairs are tried by increasing total degree of the chosen rows in the chosen
    parameters, so that linear solves come first.
    """
    from .exactfield import partial_derivative

    jac = [[partial_derivative(c, w) for w in wnames] for c in code]
    deg = [[c.degree_in(w) for w in wnames] for c in code]
    live = [i for i in range(len(code)) if any(not x.is_zero() for x in jac[i])]
    pairs = []
    for rows in itertools.combinations(live, delta):
        for cols in itertools.combinations(range(len(wnames)), delta):
            weight = sum(deg[r][c] for r in rows for c in cols)
            pairs.append((weight, rows, cols))
    pairs.sort()
    for _, rows, cols in pairs:
        if matrix_rank([[jac[r][c] for c in cols] for r in rows]) == delta:
            yield list(rows), list(cols)


def _solve_params(parts, oc: OrbitCode, rows, cols, targets, ctx: TowerContext):
    tr = oc.translate
    idents: list = []
    for p in parts:
        idents += _param_identity(p.group)
    fixed = {tr.names[j]: (idents[j] if idents[j] is not None else 0)
             for j in range(len(tr.names)) if j not in cols}
    unknowns = [sympy.Symbol(tr.names[j]) for j in cols]
    eqs = []
    for r, target in zip(rows, targets):
        expr = _to_sympy(oc.code[r]).subs({sympy.Symbol(k): v for k, v in fixed.items()})
        eqs.append(sympy.numer(sympy.together(expr - target)))
    sols = sympy.solve(eqs, unknowns, dict=True) if unknowns else [{}]
    svars = [sympy.Symbol(v) for v in ctx.small_vars]
    out = []
    for sol in sols:
        if any(u not in sol for u in unknowns):
            continue
        vals = {}
        ok = True
        for u in unknowns:
            v = sympy.simplify(sol[u])
            if (v.has(sympy.I) or not v.free_symbols <= set(svars) or not v.is_rational_function(*svars)
                    or any(not x.is_Rational for x in v.atoms(sympy.Number))
                    or any(not q.exp.is_Integer for q in v.atoms(sympy.Pow))):
                ok = False
                break
            vals[str(u)] = v
        if ok:
            out.append({**{k: sympy.Integer(v) for k, v in fixed.items()}, **vals})
    return out


def _monomial_split(expr, wsyms):
    """(exponents, rest) with expr = rest * prod w^e and rest free of w, or None."""
    exps = []
    for w in wsyms:
        e = sympy.cancel(w * sympy.diff(expr, w) / expr)
        if not e.is_Integer:
            return None
        exps.append(int(e))
    rest = sympy.cancel(expr / sympy.Mul(*[w ** e for w, e in zip(wsyms, exps)]))
    return None if rest.free_symbols & set(wsyms) else (exps, rest)


def _monomial_candidates(parts, oc: OrbitCode):
    """Solutions through w = u^R when the code rows are monomials in the parameters.

    With E the exponent matrix of ``delta`` rows and R an integral right inverse
    (it exists when the invariant factors of E are units), each row becomes
    rest * u_i, which is solved without roots.
    """
    from sympy.matrices.normalforms import smith_normal_decomp

    tr = oc.translate
    delta = oc.dim_family
    wsyms = [sympy.Symbol(n) for n in tr.names]
    split = [_monomial_split(_to_sympy(c), wsyms) for c in oc.code]
    usable = [i for i, s in enumerate(split) if s is not None and any(s[0])]
    idents: list = []
    for p in parts:
        idents += _param_identity(p.group)
    for rows in itertools.islice(itertools.combinations(usable, delta), _MAX_MINORS):
        E = sympy.Matrix([split[r][0] for r in rows])
        if E.rank() < delta:
            continue
        A, S, T = smith_normal_decomp(E, domain=sympy.ZZ)
        if any(abs(A[i, i]) != 1 for i in range(delta)):
            continue
        Aplus = sympy.zeros(len(wsyms), delta)
        for i in range(delta):
            Aplus[i, i] = A[i, i]
        R = T * Aplus * S
        for shift in range(len(_TARGETS)):
            us = [sympy.Integer(_TARGETS[(i + shift) % len(_TARGETS)]) / split[r][1] for i, r in enumerate(rows)]
            cand = {}
            for j, name in enumerate(tr.names):
                if all(R[j, i] == 0 for i in range(delta)):
                    cand[name] = sympy.Integer(idents[j] if idents[j] is not None else 0)
                else:
                    cand[name] = sympy.cancel(sympy.Mul(*[u ** R[j, i] for i, u in enumerate(us)]))
            yield cand


def _candidates(parts, oc: OrbitCode, ctx: TowerContext):
    """Parameter assignments to try, in a fixed order."""
    tr = oc.translate
    delta = oc.dim_family
    if delta == 0:
        idents: list = []
        for p in parts:
            idents += _param_identity(p.group)
        yield {n: sympy.Integer(v if v is not None else 0) for n, v in zip(tr.names, idents)}
        return
    for rows, cols in itertools.islice(_choose_coordinates(oc.code, tr.names, delta), _MAX_MINORS):
        for shift in range(len(_TARGETS)):
            targets = [_TARGETS[(i + shift) % len(_TARGETS)] for i in range(delta)]
            yield from _solve_params(parts, oc, rows, cols, targets, ctx)
    yield from _monomial_candidates(parts, oc)
    idents = [v for p in parts for v in _param_identity(p.group)]
    yield {n: sympy.Integer(v if v is not None else 0) for n, v in zip(tr.names, idents)}


def _representative(parts: tuple[PillayImaginary, ...], key: tuple) -> Representative:
    oc = orbit_code(parts)
    ctx = _context(parts)
    tr = oc.translate
    for cand in _candidates(parts, oc, ctx):
        try:
            params = tuple(_from_sympy(cand[n], ctx) for n in tr.names)
            g, k = [], 0
            for p in parts:
                c = param_count(p.group)
                g += list(parametrize(p.group, params[k:k + c]))
                k += c
            g = tuple(x.lift(ctx) if x.variables() <= set(ctx.variables) else x for x in g)
            witness = _act_parts(parts, g)
            if any(_kinds(p) is not None and MUL in _kinds(p) for p in parts):
                kinds = [k for p in parts for k in (_kinds(p) or ())]
                if any(k == MUL and x.is_zero() for k, x in zip(kinds, g)):
                    continue
            base = _code_at(parts, g, ctx)
        except (ZeroDenominator, ZeroDivisionError, ValueError):
            continue
        if td(base) == oc.td_base and td(base + oc.code) == oc.td_code:
            return Representative(params, tuple(g), witness, base)
    raise UnsupportedClass("no rational representative with canonical base over the code was found")


_rep_cache = functools.lru_cache(maxsize=512)(_representative)


def representative(e: Imaginary) -> Representative:
    """A deterministic representative of minimal rank (rational group element, rational witness)."""
    ensure_valid(e)
    return _rep_cache(tuple(e.parts), _settings_key())


def canonicalize(e: Imaginary) -> tuple[RatExpr, ...]:
    return representative(e).witness


def orbit_base(e: Imaginary) -> tuple[RatExpr, ...]:
    """Small-field parameters generating the trace of the code, up to algebraic closure."""
    if isinstance(e, PillayImaginary) and e.base is not None:
        return e.base
    return representative(e).base


# -- combination -------------------------------------------------------------------------------------

def _stabilizer(parts: tuple[PillayImaginary, ...]) -> Group:
    if not _all_catalog(parts):
        raise UnsupportedClass("stabilizers are computed in the catalog only; supply (G12, witness)")
    G = _product_group(parts)
    return stabilizer_subgroup(OrbitSubset(G, _witness(parts), joint_locus(parts)))


_stab_cache = functools.lru_cache(maxsize=512)(_stabilizer)


def _verify_candidate(parts, G12: Group, witness: tuple[RatExpr, ...]) -> None:
    from .galgebra import inv

    G = _product_group(parts)
    a = _witness(parts)
    if len(witness) != len(a):
        raise VerificationFailed("candidate_witness", "witness length does not match")
    g = solve_action_parts(parts, a, witness)
    if not all(x.is_small() for x in g) or not contains(G, g):
        raise VerificationFailed("candidate_witness", "witness is not a P-translate of the joint witness")
    ctx = common_context(witness)
    pt, names = generic_point(G12, ctx, "h")
    pt2, _ = generic_point(G12, ctx.extend(small=names), "h")
    if not contains(G, pt):
        raise VerificationFailed("subgroup", "candidate group is not inside the product group")
    if not contains(G12, mul(G, pt, pt2)) or not contains(G12, inv(G, pt)):
        raise VerificationFailed("subgroup", "candidate is not closed under the group law")
    moved = _act_parts_on(parts, pt, witness)
    if any(not v.is_zero() for v in locus_over_P(witness).evaluate(moved)):
        raise VerificationFailed("homogeneity", "candidate moves the witness off its locus over P")
    oc = orbit_code(parts)
    if dim_group(G12) != oc.dim_group - oc.dim_family:
        raise VerificationFailed("homogeneity", "candidate is smaller than the stabilizer of the locus")


def _act_parts_on(parts, g, x) -> list[RatExpr]:
    out: list[RatExpr] = []
    gi = xi = 0
    for p in parts:
        n = len(p.witness)
        m = len(identity(p.group))
        out += list(act(p, g[gi:gi + m], x[xi:xi + n]))
        gi += m
        xi += n
    return out


def solve_action_parts(parts, x, y) -> tuple[RatExpr, ...]:
    out: list[RatExpr] = []
    xi = 0
    for p in parts:
        n = len(p.witness)
        out += list(solve_action(p, x[xi:xi + n], y[xi:xi + n]))
        xi += n
    return tuple(out)


def combine_pair(e1: Imaginary, e2: Imaginary,
                 candidate: tuple[Group, Sequence[RatExpr]] | None = None) -> CombinedImaginary:
    """The joint imaginary of (e1, e2) as a homogeneous torsor of the stabilizer G12."""
    ensure_valid(e1)
    ensure_valid(e2)
    parts = tuple(e1.parts) + tuple(e2.parts)
    if candidate is not None:
        G12, witness = candidate
        _verify_candidate(parts, G12, tuple(witness))
        combined = CombinedImaginary(parts, e1, e2, G12, tuple(witness), "user-supplied-verified")
        for sub in (e1, e2):
            if relative_rank_parts(parts, sub.parts) < ZERO:
                raise VerificationFailed("rank_consistency", "relative rank is negative")
        return combined
    if not _all_catalog(parts):
        raise UnsupportedClass("no catalog rule for these groups; supply a candidate (G12, witness)")
    G12 = _stab_cache(parts)
    return CombinedImaginary(parts, e1, e2, G12, _witness(parts), "catalog-derived",
                             details=(("dim_group", dim_group(G12)),))


def combine(*es: Imaginary) -> Imaginary:
    """Left-nested pair combination; a single argument is returned unchanged."""
    if not es:
        return empty_imaginary()
    out = es[0]
    for e in es[1:]:
        out = combine_pair(out, e)
    return out


@dataclass(frozen=True)
class TripleData:
    """Everything the triple construction computes, for reports and the forking criterion."""

    g0: tuple[RatExpr, ...]
    b12: tuple[RatExpr, ...]
    b23: tuple[RatExpr, ...]
    G2: Group
    H1: Group
    H3: Group
    G12: Group
    G23: Group
    G123: Group
    dim_K: int
    eq1: int
    eq2: int
    dim_direct: int
    rank: GeomRank
    witness: tuple[RatExpr, ...]


def _middle(e12: CombinedImaginary, e23: CombinedImaginary) -> PillayImaginary:
    if not isinstance(e12, CombinedImaginary) or not isinstance(e23, CombinedImaginary):
        raise ValueError("combine_triple expects two combined imaginaries")
    m = e12.right
    if m != e23.left:
        raise ValueError("the two pairs do not share their middle imaginary")
    if not isinstance(m, PillayImaginary):
        raise UnsupportedClass("the middle imaginary must be a single Pillay imaginary")
    return m


def triple_data(e12: CombinedImaginary, e23: CombinedImaginary) -> TripleData:
    e2 = _middle(e12, e23)
    G2 = e2.group
    c = connected(G2) if is_catalog(G2) else None
    if not c:
        raise UnknownConnectedness(f"the middle group {G2} is not certified connected")
    n1 = sum(len(p.witness) for p in e12.left.parts)
    n2 = len(e2.witness)
    r12, r23 = representative(e12), representative(e23)
    a1, a2 = r12.witness[:n1], r12.witness[n1:]
    a2p, a3 = r23.witness[:n2], r23.witness[n2:]
    g0 = solve_action(e2, a2, a2p)
    if not all(x.is_small() for x in g0) or not contains(G2, g0):
        raise VerificationFailed("g0", "connector is not a point of the middle group over P")
    G12, G23 = e12.group, e23.group
    if G12 is None or G23 is None or not (is_catalog(G12) and is_catalog(G23)):
        raise UnsupportedClass("triple combination needs catalog subgroups")
    m1 = len(catalog_form(G12).kinds) - n2
    H1 = project(G12, range(m1, m1 + n2))
    H3 = project(G23, range(n2))
    b12, b23 = r12.base, r23.base
    K = DoubleCosetSpec(G2, H1, H3, g0)
    dim_K = double_coset_dim(K, FieldDesc(tuple(g0) + b12 + b23))
    d12, d23 = dim_group(G12), dim_group(G23)
    dh1, dh3 = dim_group(H1), dim_group(H3)
    eq1 = d12 - dh1 + d23 - dh3 + dim_group(intersect(H1, H3))
    eq2 = d12 + d23 - dim_K
    G123 = fibre_product(G12, G23, n2)
    direct = dim_group(G123)
    if not (eq1 == eq2 == direct):
        raise DimMismatch(f"dim G123: intersection count gives {eq1}, orbit count gives {eq2}, direct {direct}")
    # td of the code of K together with b12, b23, through a generic point of K
    ctx = common_context(list(g0) + list(b12) + list(b23) + list(e2.witness))
    h1, n_h1 = generic_point(H1, ctx, "h", small=False)
    h3, _ = generic_point(H3, ctx.extend(big=n_h1), "h", small=False)
    gK = mul(G2, h3, mul(G2, g0, h1))
    finite = td(tuple(gK) + b12 + b23) - d12 - d23
    witness = tuple(a1) + tuple(a2) + tuple(a2p) + tuple(a3)
    omega = td(witness, FieldDesc.small())
    return TripleData(tuple(g0), b12, b23, G2, H1, H3, G12, G23, G123, dim_K, eq1, eq2, direct,
                      GeomRank(omega, finite), witness)


def combine_triple(e12: CombinedImaginary, e23: CombinedImaginary) -> CombinedImaginary:
    """The imaginary of (e1, e2, e3) built from the pairs through the connector g0 in G2."""
    data = triple_data(e12, e23)
    e2 = _middle(e12, e23)
    parts = tuple(e12.parts) + tuple(e23.parts[len(e2.parts):])
    details = (("triple", data), ("dim_group", data.dim_direct), ("formula_rank", data.rank))
    return CombinedImaginary(parts, e12, e23, data.G123, data.witness, "catalog-derived", data.g0, details)


def relative_rank_parts(parts: tuple, sub: tuple) -> GeomRank:
    return _joint_rank(tuple(parts)) - _joint_rank(tuple(sub))


def relative_rank(e: Imaginary, e2: Imaginary) -> GeomRank:
    """gR(e / e2) = gR(e e2) - gR(e2)."""
    joint = combine_pair(e, e2)
    r = grank(joint) - grank(e2)
    if r < ZERO:
        raise NegativeRank(f"gR({e} / {e2}) = {r.display()} is negative; the combination data is inconsistent")
    return r


__all__ = [
    "GeomRank", "ZERO", "PillayImaginary", "CombinedImaginary", "ExplicitAction", "ValidationReport",
    "validate_pillay", "grank", "grank_torsor", "as_imaginary", "coset_add", "coset_mul", "empty_imaginary",
    "combine_pair", "combine", "combine_triple", "triple_data", "relative_rank", "representative",
    "canonicalize", "orbit_base", "orbit_code", "act", "solve_action", "Representative", "TripleData",
]
