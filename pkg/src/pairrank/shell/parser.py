"""Recursive-descent parser with a static checker for the script language.

Grammar (statements end with ``;``, ``#`` starts a comment)::

    char 0;   small s1, s2;   big t1, t2;
    let u = s1*t1 + 1;
    group G = lattice(Gm(2), [[1, -1]]);
    imaginary e = coset_add(t1, t2) in Ga(2);
    load "session.json";
    query rank e1, e2 | f, g;     query indep e1 | e2 | e3;
    query su_real (t1, s1*t1) | (s1);
    query isogenous(Ga(1), Gm(1));  query homogeny(S, G, H);  query validate e;

Checking happens during parsing: names are defined before use and never
redefined, P-elements are required where the group data must lie in the
small field, lattice entries are integers.
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass

from . import nodes as N

KEYWORDS = {"char", "small", "big", "let", "group", "imaginary", "query", "load", "in", "on"}
GROUP_CTORS = {"Ga", "Gm", "product", "lattice", "linear", "explicit"}
IMAG_CTORS = {"coset_add", "coset_mul", "real", "torsor"}
QUERIES = {"rank", "indep", "su_real", "isogenous", "homogeny", "validate"}
RESERVED = KEYWORDS | GROUP_CTORS | IMAG_CTORS | QUERIES

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<num>\d+) | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<op>\*\*|[;,()\[\]{}=+\-*/^|:])
""", re.VERBOSE)


class ScriptError(Exception):
    """A diagnostic with a machine-readable code and a 1-based position."""

    def __init__(self, code: str, message: str, pos: N.Pos = (0, 0)) -> None:
        self.code = code
        self.message = message
        self.line, self.col = pos
        super().__init__(f"{self.line}:{self.col}: {code}: {message}")

    def as_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "line": self.line, "col": self.col}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: N.Pos


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    line, start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise ScriptError("SyntaxError", f"unexpected character {text[i]!r}", (line, i - start + 1))
        kind = m.lastgroup
        pos = (line, i - start + 1)
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            tok = m.group()
            out.append(Token("op" if kind == "op" else kind, "^" if tok == "**" else tok, pos))
        i = m.end()
    out.append(Token("eof", "", (line, i - start + 1)))
    return out


# -- name table ------------------------------------------------------------------------------------

@dataclass
class _Entry:
    kind: str      # small, big, let, group, imaginary
    small: bool = False
    dim: int | None = None           # ambient dimension of groups
    coords: tuple[str, ...] = ()     # explicit group coordinates


class Parser:
    def __init__(self, text: str, base_dir: str = ".") -> None:
        self.toks = tokenize(text)
        self.i = 0
        self.base_dir = base_dir
        self.names: dict[str, _Entry] = {}
        self.local: dict[str, _Entry] = {}
        self.header_done = False
        self.seen: set[str] = set()

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def _next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def _at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "ident")

    def _accept(self, text: str) -> bool:
        if self._at(text):
            self.i += 1
            return True
        return False

    def _expect(self, text: str) -> Token:
        if not self._at(text):
            got = self.tok.text or "end of input"
            raise ScriptError("SyntaxError", f"expected {text!r}, found {got!r}", self.tok.pos)
        return self._next()

    def _ident(self) -> Token:
        if self.tok.kind != "ident":
            got = self.tok.text or "end of input"
            raise ScriptError("SyntaxError", f"expected an identifier, found {got!r}", self.tok.pos)
        return self._next()

    def _int(self) -> int:
        neg = self._accept("-")
        if self.tok.kind != "num":
            raise ScriptError("TypeError", "an integer literal is required here", self.tok.pos)
        v = int(self._next().text)
        return -v if neg else v

    # names
    def _define(self, tok: Token, entry: _Entry) -> None:
        name = tok.text
        if name in RESERVED:
            raise ScriptError("SyntaxError", f"{name!r} is a reserved word", tok.pos)
        if name in self.names:
            raise ScriptError("NameError", f"{name!r} is already defined", tok.pos)
        if name.startswith(("l_", "r_", "src_", "dst_")):
            raise ScriptError("NameError", f"{name!r} uses a prefix reserved for explicit group data", tok.pos)
        self.names[name] = entry

    def _lookup(self, tok: Token, kinds: tuple[str, ...], what: str) -> _Entry:
        entry = self.local.get(tok.text) or self.names.get(tok.text)
        if entry is None:
            raise ScriptError("NameError", f"{tok.text!r} is not defined", tok.pos)
        if entry.kind not in kinds:
            raise ScriptError("TypeError", f"{tok.text!r} is a {entry.kind}, expected {what}", tok.pos)
        return entry

    # -- statements ---------------------------------------------------------------------------------

    def parse(self) -> N.Script:
        stmts = []
        while self.tok.kind != "eof":
            stmts.append(self.statement())
        return N.Script(tuple(stmts))

    def statement(self) -> N.Statement:
        t = self.tok
        if t.kind != "ident" or t.text not in KEYWORDS - {"in", "on"}:
            raise ScriptError("SyntaxError", f"expected a statement, found {t.text or 'end of input'!r}", t.pos)
        kw = t.text
        if kw in ("char", "small", "big"):
            if self.header_done:
                raise ScriptError("SyntaxError", "the context declaration must come first", t.pos)
            if kw in self.seen or (kw == "char" and self.seen):
                raise ScriptError("SyntaxError", f"duplicate or misplaced {kw!r} declaration", t.pos)
            self.seen.add(kw)
        else:
            self.header_done = True
        self._next()
        stmt = getattr(self, f"_stmt_{kw}")(t.pos)
        self._expect(";")
        return stmt

    def _stmt_char(self, pos) -> N.Char:
        p = self._int()
        if p != 0:
            raise ScriptError("TypeError", "only characteristic 0 is supported", pos)
        return N.Char(p, pos)

    def _declare(self, kind: str, pos) -> N.Declare:
        names = []
        while True:
            tok = self._ident()
            self._define(tok, _Entry(kind, small=kind == "small"))
            names.append(tok.text)
            if not self._accept(","):
                break
        return N.Declare(kind, tuple(names), pos)

    def _stmt_small(self, pos):
        return self._declare("small", pos)

    def _stmt_big(self, pos):
        return self._declare("big", pos)

    def _stmt_let(self, pos) -> N.Let:
        tok = self._ident()
        self._expect("=")
        value = self.expr()
        self._define(tok, _Entry("let", small=self._is_small(value)))
        return N.Let(tok.text, value, pos)

    def _stmt_group(self, pos) -> N.GroupDef:
        tok = self._ident()
        self._expect("=")
        value = self.group()
        dim, coords = self._group_shape(value)
        self._define(tok, _Entry("group", dim=dim, coords=coords))
        return N.GroupDef(tok.text, value, pos)

    def _stmt_imaginary(self, pos) -> N.ImagDef:
        tok = self._ident()
        self._expect("=")
        value = self.imaginary()
        self._define(tok, _Entry("imaginary"))
        return N.ImagDef(tok.text, value, pos)

    def _stmt_load(self, pos) -> N.Load:
        if self.tok.kind != "string":
            raise ScriptError("SyntaxError", "load expects a quoted file name", self.tok.pos)
        path = self._next().text[1:-1]
        full = os.path.join(self.base_dir, path)
        try:
            with open(full, encoding="utf-8") as fh:
                data = json.load(fh)
            session = data["session"]
        except (OSError, ValueError, KeyError) as exc:
            raise ScriptError("NameError", f"cannot load session {path!r}: {exc}", pos) from exc
        body = session_statements(session, self, pos)
        return N.Load(path, body, pos)

    def _stmt_query(self, pos) -> N.QueryStmt:
        t = self._ident()
        if t.text not in QUERIES:
            raise ScriptError("SyntaxError", f"unknown query {t.text!r}", t.pos)
        q = getattr(self, f"_query_{t.text}")(t.pos)
        return N.QueryStmt(q, pos)

    def _query_rank(self, pos) -> N.RankQ:
        targets = self._imag_list()
        over = self._imag_list() if self._accept("|") else ()
        return N.RankQ(targets, over, pos)

    def _query_indep(self, pos) -> N.IndepQ:
        a = self.imaginary()
        self._expect("|")
        b = self.imaginary()
        self._expect("|")
        c = self.imaginary()
        return N.IndepQ(a, b, c, pos)

    def _query_su_real(self, pos) -> N.SuRealQ:
        a = self._expr_tuple()
        over = self._expr_tuple() if self._accept("|") else ()
        return N.SuRealQ(a, over, pos)

    def _query_isogenous(self, pos) -> N.IsogenousQ:
        self._expect("(")
        G = self.group()
        self._expect(",")
        H = self.group()
        self._expect(")")
        return N.IsogenousQ(G, H, pos)

    def _query_homogeny(self, pos) -> N.HomogenyQ:
        self._expect("(")
        S = self.group()
        self._expect(",")
        G = self.group()
        self._expect(",")
        H = self.group()
        self._expect(")")
        dS, dG, dH = (self._group_shape(x)[0] for x in (S, G, H))
        if None not in (dS, dG, dH) and dS != dG + dH:
            raise ScriptError("TypeError", "S must live in the coordinates of G x H", pos)
        return N.HomogenyQ(S, G, H, pos)

    def _query_validate(self, pos) -> N.ValidateQ:
        return N.ValidateQ(self.imaginary(), pos)

    def _imag_list(self) -> tuple:
        items = [self.imaginary()]
        while self._accept(","):
            items.append(self.imaginary())
        return tuple(items)

    # -- expressions ------------------------------------------------------------------------------------

    def expr(self) -> N.Expr:
        left = self._term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self._next()
            left = N.BinOp(op.text, left, self._term(), op.pos)
        return left

    def _term(self) -> N.Expr:
        left = self._unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self._next()
            left = N.BinOp(op.text, left, self._unary(), op.pos)
        return left

    def _unary(self) -> N.Expr:
        if self._at("-"):
            pos = self._next().pos
            return N.Neg(self._unary(), pos)
        return self._power()

    def _power(self) -> N.Expr:
        base = self._atom()
        if self._at("^"):
            pos = self._next().pos
            paren = self._accept("(")
            exp = self._int()
            if paren:
                self._expect(")")
            return N.Pow(base, exp, pos)
        return base

    def _atom(self) -> N.Expr:
        t = self.tok
        if t.kind == "num":
            self._next()
            return N.Num(int(t.text), t.pos)
        if t.kind == "ident":
            self._next()
            self._lookup(t, ("small", "big", "let", "local"), "a field element")
            return N.Var(t.text, t.pos)
        if self._accept("("):
            e = self.expr()
            self._expect(")")
            return e
        raise ScriptError("SyntaxError", f"expected an expression, found {t.text or 'end of input'!r}", t.pos)

    def _expr_tuple(self, allow_empty: bool = True) -> tuple[N.Expr, ...]:
        self._expect("(")
        items = []
        if not self._at(")"):
            items.append(self.expr())
            while self._accept(","):
                items.append(self.expr())
        elif not allow_empty:
            raise ScriptError("SyntaxError", "an empty tuple is not allowed here", self.tok.pos)
        self._expect(")")
        return tuple(items)

    def _is_small(self, e: N.Expr) -> bool:
        if isinstance(e, N.Num):
            return True
        if isinstance(e, N.Var):
            entry = self.local.get(e.name) or self.names.get(e.name)
            return bool(entry and entry.small)
        if isinstance(e, N.Neg):
            return self._is_small(e.operand)
        if isinstance(e, N.Pow):
            return self._is_small(e.base)
        return self._is_small(e.left) and self._is_small(e.right)

    def _require_small(self, exprs, what: str) -> None:
        for e in exprs:
            if not self._is_small(e):
                raise ScriptError("TypeError", f"{what} must lie in P (only small variables allowed)", e.pos)

    # -- groups -------------------------------------------------------------------------------------------

    def group(self) -> N.GroupExpr:
        t = self._ident()
        if t.text not in GROUP_CTORS:
            self._lookup(t, ("group",), "a group")
            return N.GroupRef(t.text, t.pos)
        if t.text == "explicit":
            return self._explicit(t.pos)
        self._expect("(")
        if t.text in ("Ga", "Gm"):
            n = self._int()
            if n < 0:
                raise ScriptError("TypeError", "group dimension must be non-negative", t.pos)
            self._expect(")")
            return (N.Ga if t.text == "Ga" else N.Gm)(n, t.pos)
        if t.text == "product":
            factors = [self.group()]
            while self._accept(","):
                factors.append(self.group())
            self._expect(")")
            for f in factors:
                if isinstance(f, N.Explicit) or self._group_shape(f)[1]:
                    raise ScriptError("TypeError", "products take catalog groups only", t.pos)
            return N.ProductG(tuple(factors), t.pos)
        parent = self.group()
        if self._group_shape(parent)[1]:
            raise ScriptError("TypeError", f"{t.text} expects a catalog parent group", t.pos)
        self._expect(",")
        rows = self._matrix(integer=t.text == "lattice")
        self._expect(")")
        n = self._group_shape(parent)[0]
        for r in rows:
            if len(r) != n:
                raise ScriptError("TypeError", f"each row needs {n} entries", t.pos)
        if t.text == "lattice":
            return N.Lattice(parent, rows, t.pos)
        self._require_small([x for r in rows for x in r], "linear equations")
        return N.Linear(parent, rows, t.pos)

    def _matrix(self, integer: bool) -> tuple:
        self._expect("[")
        rows = []
        while not self._at("]"):
            self._expect("[")
            row = []
            while not self._at("]"):
                row.append(self._int() if integer else self.expr())
                if not self._accept(","):
                    break
            self._expect("]")
            rows.append(tuple(row))
            if not self._accept(","):
                break
        self._expect("]")
        return tuple(rows)

    def _names_tuple(self) -> tuple[str, ...]:
        self._expect("(")
        out = []
        while not self._at(")"):
            tok = self._ident()
            if tok.text in self.names or tok.text in RESERVED or tok.text in out:
                raise ScriptError("NameError", f"{tok.text!r} is already defined", tok.pos)
            out.append(tok.text)
            if not self._accept(","):
                break
        self._expect(")")
        return tuple(out)

    def _block(self, allowed: dict[str, bool]) -> dict:
        """Parse ``{ field: value; ... }``; ``allowed`` maps field names to 'required'."""
        self._expect("{")
        fields: dict = {}
        while not self._at("}"):
            t = self._ident()
            if t.text not in allowed:
                raise ScriptError("SyntaxError", f"unknown field {t.text!r}", t.pos)
            if t.text in fields:
                raise ScriptError("SyntaxError", f"duplicate field {t.text!r}", t.pos)
            fields[t.text] = self._field_value(t)
            if not self._accept(";"):
                break
        close = self._expect("}")
        for name, required in allowed.items():
            if required and name not in fields:
                raise ScriptError("SyntaxError", f"missing field {name!r}", close.pos)
        return fields

    def _field_value(self, t: Token):
        return getattr(self, f"_field_{t.text}")(t)

    def _with_locals(self, names, fn):
        saved = dict(self.local)
        for n in names:
            self.local[n] = _Entry("local")
        try:
            return fn()
        finally:
            self.local = saved

    def _explicit(self, pos) -> N.Explicit:
        self._expect("{")
        self._expect("coords")
        self._expect(":")
        coords = self._names_tuple()
        self._accept(";")
        law = [f"l_{c}" for c in coords] + [f"r_{c}" for c in coords]
        fields: dict = {}
        while not self._at("}"):
            t = self._ident()
            if t.text not in ("equations", "identity", "mul", "inv", "param") or t.text in fields:
                raise ScriptError("SyntaxError", f"unexpected field {t.text!r}", t.pos)
            if t.text == "param":
                pvars = self._names_tuple()
                self._expect(":")
                fields["param"] = (pvars, self._with_locals(pvars, lambda: self._expr_tuple(False)))
            else:
                self._expect(":")
                scope = law if t.text == "mul" else coords if t.text in ("equations", "inv") else ()
                fields[t.text] = self._with_locals(scope, self._expr_tuple)
            if not self._accept(";"):
                break
        close = self._expect("}")
        for name in ("identity", "mul", "inv"):
            if name not in fields:
                raise ScriptError("SyntaxError", f"missing field {name!r}", close.pos)
            if len(fields[name]) != len(coords):
                raise ScriptError("TypeError", f"{name} needs one entry per coordinate", close.pos)
        self._require_small(fields["identity"], "the identity")
        pvars, param = fields.get("param", ((), None))
        if param is not None and len(param) != len(coords):
            raise ScriptError("TypeError", "param needs one entry per coordinate", close.pos)
        return N.Explicit(coords, fields.get("equations", ()), fields["identity"], fields["mul"], fields["inv"],
                          pvars, param, pos)

    def _group_shape(self, g: N.GroupExpr) -> tuple[int | None, tuple[str, ...]]:
        """Ambient dimension and, for explicit groups, coordinate names."""
        if isinstance(g, N.GroupRef):
            e = self.names[g.name]
            return e.dim, e.coords
        if isinstance(g, (N.Ga, N.Gm)):
            return g.n, ()
        if isinstance(g, N.ProductG):
            return sum(self._group_shape(f)[0] for f in g.factors), ()
        if isinstance(g, (N.Lattice, N.Linear)):
            return self._group_shape(g.parent)[0], ()
        return len(g.coords), g.coords

    # -- imaginaries ---------------------------------------------------------------------------------------

    def imaginary(self) -> N.ImagExpr:
        t = self._ident()
        if t.text not in IMAG_CTORS:
            self._lookup(t, ("imaginary",), "an imaginary")
            return N.ImagRef(t.text, t.pos)
        if t.text == "torsor":
            return self._torsor(t.pos)
        witness = self._expr_tuple(allow_empty=t.text == "real")
        if t.text == "real":
            return N.Real(witness, t.pos)
        group = None
        if self._accept("in"):
            group = self.group()
            dim, coords = self._group_shape(group)
            if coords:
                raise ScriptError("TypeError", "cosets take catalog groups; use torsor{} for explicit groups", t.pos)
            if dim != len(witness):
                raise ScriptError("TypeError", f"the group acts on {dim} coordinates, the witness has "
                                               f"{len(witness)}", t.pos)
        return N.Coset(t.text, witness, group, t.pos)

    def _torsor(self, pos) -> N.Torsor:
        self._expect("{")
        self._expect("group")
        self._expect(":")
        group = self.group()
        dim, coords = self._group_shape(group)
        gcoords = coords or tuple(f"g{i + 1}" for i in range(dim or 0))
        self._accept(";")
        fields: dict = {}
        while not self._at("}"):
            t = self._ident()
            if t.text not in ("witness", "base", "action", "solver") or t.text in fields:
                raise ScriptError("SyntaxError", f"unexpected field {t.text!r}", t.pos)
            if t.text == "action":
                pvars = self._names_tuple()
                self._expect(":")
                clash = [g for g in gcoords if g in pvars]
                if clash:
                    raise ScriptError("NameError", f"point variables clash with group coordinates {clash}", t.pos)
                fields["action"] = (pvars, self._with_locals(gcoords + pvars, self._expr_tuple))
            elif t.text == "solver":
                if "action" not in fields:
                    raise ScriptError("SyntaxError", "solver must follow action", t.pos)
                pv = fields["action"][0]
                scope = tuple(f"src_{p}" for p in pv) + tuple(f"dst_{p}" for p in pv)
                self._expect(":")
                fields["solver"] = self._with_locals(scope, self._expr_tuple)
            else:
                self._expect(":")
                fields[t.text] = self._expr_tuple()
            if not self._accept(";"):
                break
        close = self._expect("}")
        if "witness" not in fields:
            raise ScriptError("SyntaxError", "missing field 'witness'", close.pos)
        if "base" in fields:
            self._require_small(fields["base"], "the base")
        pvars, action = fields.get("action", ((), None))
        if action is not None:
            if "solver" not in fields:
                raise ScriptError("SyntaxError", "an explicit action needs a solver", close.pos)
            if len(action) != len(pvars) or len(fields["witness"]) != len(pvars):
                raise ScriptError("TypeError", "action, point variables and witness must have equal length",
                                  close.pos)
            if len(fields["solver"]) != len(gcoords):
                raise ScriptError("TypeError", "solver needs one entry per group coordinate", close.pos)
        elif coords:
            raise ScriptError("TypeError", "explicit groups need an explicit action", close.pos)
        elif dim != len(fields["witness"]):
            raise ScriptError("TypeError", f"the group acts on {dim} coordinates, the witness has "
                                           f"{len(fields['witness'])}", close.pos)
        return N.Torsor(group, fields["witness"], fields.get("base"), pvars, action, fields.get("solver"), pos)


def session_statements(session: dict, parser: Parser, pos) -> tuple:
    """Re-parse the definitions of a saved session inside the current script."""
    ctx = session.get("context", {})
    out = []
    for kind in ("small", "big"):
        new = []
        for name in ctx.get(kind, []):
            entry = parser.names.get(name)
            if entry is None:
                parser.names[name] = _Entry(kind, small=kind == "small")
                new.append(name)
            elif entry.kind != kind:
                raise ScriptError("NameError", f"session variable {name!r} is declared as {entry.kind}", pos)
        if new:
            out.append(N.Declare(kind, tuple(new), pos))
    for d in session.get("definitions", []):
        sub = Parser(f"{d['kind']} {d['name']} = {d['source']};")
        sub.names = parser.names
        sub.header_done = True
        try:
            out.append(sub.statement())
        except ScriptError as exc:
            raise ScriptError(exc.code, f"in loaded definition {d['name']!r}: {exc.message}", pos) from exc
    return tuple(out)


def parse(text: str, base_dir: str = ".") -> N.Script:
    """Parse and check a script; raises :class:`ScriptError` with a position."""
    return Parser(text, base_dir).parse()


def parse_file(path: str) -> N.Script:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse(text, os.path.dirname(os.path.abspath(path)))
