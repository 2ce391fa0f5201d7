"""Pretty-printer whose output parses back to an equal syntax tree."""
from __future__ import annotations

from . import nodes as N

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def expr(e: N.Expr, prec: int = 0) -> str:
    if isinstance(e, N.Num):
        return str(e.value)
    if isinstance(e, N.Var):
        return e.name
    if isinstance(e, N.Neg):
        s = "-" + expr(e.operand, 3)
        return f"({s})" if prec > 3 else s
    if isinstance(e, N.Pow):
        exp = str(e.exp) if e.exp >= 0 else f"({e.exp})"
        s = f"{expr(e.base, 5)}^{exp}"
        return f"({s})" if prec > 4 else s
    p = _PREC[e.op]
    s = f"{expr(e.left, p)} {e.op} {expr(e.right, p + 1)}"
    return f"({s})" if p < prec else s


def exprs(items) -> str:
    return "(" + ", ".join(expr(x) for x in items) + ")"


def _names(items) -> str:
    return "(" + ", ".join(items) + ")"


def group(g: N.GroupExpr) -> str:
    if isinstance(g, N.GroupRef):
        return g.name
    if isinstance(g, N.Ga):
        return f"Ga({g.n})"
    if isinstance(g, N.Gm):
        return f"Gm({g.n})"
    if isinstance(g, N.ProductG):
        return "product(" + ", ".join(group(f) for f in g.factors) + ")"
    if isinstance(g, N.Lattice):
        rows = ", ".join("[" + ", ".join(map(str, r)) + "]" for r in g.rows)
        return f"lattice({group(g.parent)}, [{rows}])"
    if isinstance(g, N.Linear):
        rows = ", ".join("[" + ", ".join(expr(x) for x in r) + "]" for r in g.rows)
        return f"linear({group(g.parent)}, [{rows}])"
    fields = [f"coords: {_names(g.coords)}"]
    if g.equations:
        fields.append(f"equations: {exprs(g.equations)}")
    fields += [f"identity: {exprs(g.identity)}", f"mul: {exprs(g.mul)}", f"inv: {exprs(g.inv)}"]
    if g.param is not None:
        fields.append(f"param {_names(g.param_vars)}: {exprs(g.param)}")
    return "explicit{" + "; ".join(fields) + "}"


def imaginary(e: N.ImagExpr) -> str:
    if isinstance(e, N.ImagRef):
        return e.name
    if isinstance(e, N.Real):
        return "real" + exprs(e.witness)
    if isinstance(e, N.Coset):
        s = e.kind + exprs(e.witness)
        return s + (f" in {group(e.group)}" if e.group is not None else "")
    fields = [f"group: {group(e.group)}", f"witness: {exprs(e.witness)}"]
    if e.base is not None:
        fields.append(f"base: {exprs(e.base)}")
    if e.action is not None:
        fields.append(f"action {_names(e.point_vars)}: {exprs(e.action)}")
        fields.append(f"solver: {exprs(e.solver)}")
    return "torsor{" + "; ".join(fields) + "}"


def query(q: N.Query) -> str:
    if isinstance(q, N.RankQ):
        s = "rank " + ", ".join(imaginary(x) for x in q.targets)
        return s + (" | " + ", ".join(imaginary(x) for x in q.over) if q.over else "")
    if isinstance(q, N.IndepQ):
        return f"indep {imaginary(q.left)} | {imaginary(q.middle)} | {imaginary(q.right)}"
    if isinstance(q, N.SuRealQ):
        return "su_real " + exprs(q.tuple_) + (" | " + exprs(q.over) if q.over else "")
    if isinstance(q, N.IsogenousQ):
        return f"isogenous({group(q.G)}, {group(q.H)})"
    if isinstance(q, N.HomogenyQ):
        return f"homogeny({group(q.S)}, {group(q.G)}, {group(q.H)})"
    return f"validate {imaginary(q.target)}"


def statement(s: N.Statement) -> str:
    if isinstance(s, N.Char):
        return f"char {s.p};"
    if isinstance(s, N.Declare):
        return f"{s.kind} {', '.join(s.names)};"
    if isinstance(s, N.Let):
        return f"let {s.name} = {expr(s.value)};"
    if isinstance(s, N.GroupDef):
        return f"group {s.name} = {group(s.value)};"
    if isinstance(s, N.ImagDef):
        return f"imaginary {s.name} = {imaginary(s.value)};"
    if isinstance(s, N.Load):
        return f'load "{s.path}";'
    return f"query {query(s.query)};"


def script(sc: N.Script) -> str:
    return "".join(statement(s) + "\n" for s in sc.statements)
