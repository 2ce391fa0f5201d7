"""Evaluation of checked scripts into JSON-ready reports."""
from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass

from .. import __version__, settings
from ..errors import PairRankError, ResourceLimit
from ..exactfield import RatExpr, TowerContext
from ..forking import grank_over_finite_set, su_real, theoremB_check
from ..galgebra import (ExplicitGroup, Homogeny, LatticeSubgroup, LinearSubgroup, Product, Torus, VectorGroup,
                        homogeny_check, isogenous_catalog)
from ..imaginaries import (ExplicitAction, PillayImaginary, as_imaginary, combine, combine_pair, coset_add,
                           coset_mul, empty_imaginary, grank, triple_data, validate_pillay)
from ..tdeg import FieldDesc
from . import nodes as N
from . import printer

SCHEMA_VERSION = "1.0"


class _Failed:
    """Placeholder for a name whose declaration raised an engine error."""

    def __init__(self, name: str) -> None:
        self.name = name


class DependencyFailed(PairRankError):
    code = "dependency_failed"


class InvalidData(PairRankError):
    code = "invalid_data"


def _engine_call(fn, *args):
    """Run ``fn``; malformed mathematical data surfaces as an engine error."""
    try:
        return fn(*args)
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, PairRankError):
            raise
        raise InvalidData(str(exc)) from exc


@dataclass(frozen=True)
class Options:
    oracle: str = "jacobian"
    seed: int = 0
    budget: int = 1_000_000
    stable: bool = False


def _strs(xs) -> list[str]:
    return [str(x) for x in xs]


class Runner:
    def __init__(self, options: Options = Options()) -> None:
        self.options = options
        self.small: list[str] = []
        self.big: list[str] = []
        self.env: dict[str, object] = {}
        self.sources: dict[str, tuple[str, str]] = {}

    @property
    def ctx(self) -> TowerContext:
        return TowerContext(tuple(self.small), tuple(self.big))

    # -- evaluation of syntax -------------------------------------------------------------------------

    def _get(self, name: str):
        v = self.env[name]
        if isinstance(v, _Failed):
            raise DependencyFailed(f"{name!r} could not be built")
        return v

    def expr(self, e: N.Expr, ctx: TowerContext, local: dict | None = None) -> RatExpr:
        if isinstance(e, N.Num):
            return ctx.const(e.value)
        if isinstance(e, N.Var):
            if local and e.name in local:
                return local[e.name]
            if e.name in ctx.variables:
                return ctx.var(e.name)
            return self._get(e.name).lift(ctx)
        if isinstance(e, N.Neg):
            return -self.expr(e.operand, ctx, local)
        if isinstance(e, N.Pow):
            return self.expr(e.base, ctx, local) ** e.exp
        a, b = self.expr(e.left, ctx, local), self.expr(e.right, ctx, local)
        return {"+": a.__add__, "-": a.__sub__, "*": a.__mul__, "/": a.__truediv__}[e.op](b)

    def exprs(self, items, ctx: TowerContext | None = None, local: dict | None = None) -> tuple[RatExpr, ...]:
        ctx = ctx or self.ctx
        return tuple(self.expr(x, ctx, local) for x in items)

    def group(self, g: N.GroupExpr):
        if isinstance(g, N.GroupRef):
            return self._get(g.name)
        if isinstance(g, N.Ga):
            return VectorGroup(g.n)
        if isinstance(g, N.Gm):
            return Torus(g.n)
        if isinstance(g, N.ProductG):
            return Product(tuple(self.group(f) for f in g.factors))
        if isinstance(g, N.Lattice):
            return LatticeSubgroup(self.group(g.parent), g.rows)
        if isinstance(g, N.Linear):
            return LinearSubgroup(self.group(g.parent), tuple(self.exprs(r) for r in g.rows))
        law = [f"l_{c}" for c in g.coords] + [f"r_{c}" for c in g.coords]
        ctx = TowerContext(tuple(self.small), tuple(self.big) + g.coords + tuple(law) + g.param_vars)
        E = lambda xs: self.exprs(xs, ctx)
        return ExplicitGroup(ctx, g.coords, E(g.equations), E(g.identity), E(g.mul), E(g.inv), g.param_vars,
                             None if g.param is None else E(g.param))

    def imaginary(self, e: N.ImagExpr):
        if isinstance(e, N.ImagRef):
            return self._get(e.name)
        if isinstance(e, N.Real):
            return as_imaginary(self.exprs(e.witness)) if e.witness else empty_imaginary()
        if isinstance(e, N.Coset):
            G = self.group(e.group) if e.group is not None else None
            return (coset_add if e.kind == "coset_add" else coset_mul)(self.exprs(e.witness), G)
        G = self.group(e.group)
        action = None
        if e.action is not None:
            from ..imaginaries import group_coordinates

            coords = group_coordinates(G)
            src = tuple(f"src_{p}" for p in e.point_vars)
            dst = tuple(f"dst_{p}" for p in e.point_vars)
            extra = tuple(c for c in coords if c not in self.big)
            ctx = TowerContext(tuple(self.small), tuple(self.big) + extra + e.point_vars + src + dst)
            action = ExplicitAction(e.point_vars, self.exprs(e.action, ctx), self.exprs(e.solver, ctx))
        base = None if e.base is None else self.exprs(e.base)
        return PillayImaginary(G, self.exprs(e.witness), base, action=action)

    # -- statements ----------------------------------------------------------------------------------------

    def declare(self, s: N.Statement) -> None:
        if isinstance(s, N.Char):
            return
        if isinstance(s, N.Declare):
            (self.small if s.kind == "small" else self.big).extend(s.names)
            return
        kind = {N.Let: "let", N.GroupDef: "group", N.ImagDef: "imaginary"}[type(s)]
        build = {N.Let: lambda v: self.expr(v, self.ctx), N.GroupDef: self.group,
                 N.ImagDef: self.imaginary}[type(s)]
        source = printer.expr(s.value) if kind == "let" else (
            printer.group(s.value) if kind == "group" else printer.imaginary(s.value))
        try:
            value = _engine_call(build, s.value)
        except PairRankError:
            self.env[s.name] = _Failed(s.name)
            raise
        finally:
            self.sources[s.name] = (kind, source)
        self.env[s.name] = value
        if kind == "let":
            self.sources[s.name] = (kind, str(value))

    def query(self, q: N.Query) -> dict:
        if isinstance(q, N.RankQ):
            targets = [self.imaginary(x) for x in q.targets]
            e = targets[0] if len(targets) == 1 else combine(*targets)
            over = [self.imaginary(x) for x in q.over]
            r = grank_over_finite_set(e, over) if over else grank(e)
            return {"rank": r.as_dict(), "witness": _strs(x for p in e.parts for x in p.witness)}
        if isinstance(q, N.IndepQ):
            e1, e2, e3 = (self.imaginary(x) for x in (q.left, q.middle, q.right))
            rep = theoremB_check(e1, e2, e3)
            data = triple_data(combine_pair(e1, e2), combine_pair(e2, e3))
            return {"independent": rep.indep, "rank_drop": rep.drop.as_dict(), "agree": rep.agree,
                    "star": rep.star.as_dict(), "b12": _strs(data.b12), "b23": _strs(data.b23),
                    "dim_K": data.dim_K, "eq1": data.eq1, "eq2": data.eq2}
        if isinstance(q, N.SuRealQ):
            return {"rank": su_real(self.exprs(q.tuple_), FieldDesc(self.exprs(q.over))).as_dict()}
        if isinstance(q, N.IsogenousQ):
            return {"isogenous": isogenous_catalog(self.group(q.G), self.group(q.H))}
        if isinstance(q, N.HomogenyQ):
            rep = homogeny_check(Homogeny(self.group(q.S), self.group(q.G), self.group(q.H)))
            return dataclasses.asdict(rep)
        return validate_pillay(self.imaginary(q.target)).as_dict()

    # -- whole scripts ----------------------------------------------------------------------------------------

    def run(self, script: N.Script) -> dict:
        results: list[dict] = []
        opts = self.options
        qindex = 0
        with settings.use(oracle=opts.oracle, seed=opts.seed, budget=opts.budget):
            for index, s in enumerate(script.flattened()):
                if not isinstance(s, N.QueryStmt):
                    try:
                        self.declare(s)
                    except PairRankError as exc:
                        results.append(self._error(index, printer.statement(s), s.pos, exc))
                    continue
                start = time.perf_counter()
                entry = {"index": qindex, "statement_index": index, "query": printer.query(s.query),
                         "line": s.pos[0], "col": s.pos[1]}
                qindex += 1
                try:
                    entry["result"] = _engine_call(self.query, s.query)
                except PairRankError as exc:
                    entry["error"] = {"code": exc.code, "message": str(exc)}
                if not opts.stable:
                    entry["time"] = round(time.perf_counter() - start, 6)
                results.append(entry)
        return {"version": SCHEMA_VERSION, "engine": __version__, "context": self.context(), "results": results}

    def _error(self, index: int, text: str, pos, exc: PairRankError) -> dict:
        return {"statement_index": index, "statement": text, "line": pos[0], "col": pos[1],
                "error": {"code": exc.code, "message": str(exc)}}

    def context(self) -> dict:
        o = self.options
        return {"small": list(self.small), "big": list(self.big), "char": 0, "oracle": o.oracle,
                "seed": o.seed, "budget": o.budget}

    def session(self) -> dict:
        defs = [{"kind": k, "name": n, "source": src} for n, (k, src) in self.sources.items()
                if not isinstance(self.env.get(n), _Failed)]
        return {"context": {"small": list(self.small), "big": list(self.big)}, "definitions": defs}


def exit_status(report: dict) -> int:
    codes = [r["error"]["code"] for r in report["results"] if "error" in r]
    if not codes:
        return 0
    return ResourceLimit.exit_status if ResourceLimit.code in codes else 1


def run(script: N.Script, options: Options = Options()) -> dict:
    return Runner(options).run(script)
