"""Syntax tree of the script language.

Positions are kept for diagnostics but excluded from equality, so a
pretty-printed script parses back to an equal tree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

Pos = tuple[int, int]


def _pos():
    return field(default=(0, 0), compare=False, repr=False)


# -- expressions -------------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exp: int
    pos: Pos = _pos()


Expr = Union[Num, Var, Neg, BinOp, Pow]


# -- groups -----------------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupRef:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Ga:
    n: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class Gm:
    n: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class ProductG:
    factors: tuple["GroupExpr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Lattice:
    parent: "GroupExpr"
    rows: tuple[tuple[int, ...], ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Linear:
    parent: "GroupExpr"
    rows: tuple[tuple[Expr, ...], ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Explicit:
    coords: tuple[str, ...]
    equations: tuple[Expr, ...]
    identity: tuple[Expr, ...]
    mul: tuple[Expr, ...]
    inv: tuple[Expr, ...]
    param_vars: tuple[str, ...] = ()
    param: Optional[tuple[Expr, ...]] = None
    pos: Pos = _pos()


GroupExpr = Union[GroupRef, Ga, Gm, ProductG, Lattice, Linear, Explicit]


# -- imaginaries ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class ImagRef:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Coset:
    kind: str  # "coset_add" or "coset_mul"
    witness: tuple[Expr, ...]
    group: Optional[GroupExpr] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Real:
    witness: tuple[Expr, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Torsor:
    group: GroupExpr
    witness: tuple[Expr, ...]
    base: Optional[tuple[Expr, ...]] = None
    point_vars: tuple[str, ...] = ()
    action: Optional[tuple[Expr, ...]] = None
    solver: Optional[tuple[Expr, ...]] = None
    pos: Pos = _pos()


ImagExpr = Union[ImagRef, Coset, Real, Torsor]


# -- statements -----------------------------------------------------------------------------------

@dataclass(frozen=True)
class Char:
    p: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class Declare:
    kind: str  # "small" or "big"
    names: tuple[str, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Let:
    name: str
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class GroupDef:
    name: str
    value: GroupExpr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ImagDef:
    name: str
    value: ImagExpr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Load:
    path: str
    body: tuple["Statement", ...] = ()
    pos: Pos = _pos()


@dataclass(frozen=True)
class RankQ:
    targets: tuple[ImagExpr, ...]
    over: tuple[ImagExpr, ...] = ()
    pos: Pos = _pos()


@dataclass(frozen=True)
class IndepQ:
    left: ImagExpr
    middle: ImagExpr
    right: ImagExpr
    pos: Pos = _pos()


@dataclass(frozen=True)
class SuRealQ:
    tuple_: tuple[Expr, ...]
    over: tuple[Expr, ...] = ()
    pos: Pos = _pos()


@dataclass(frozen=True)
class IsogenousQ:
    G: GroupExpr
    H: GroupExpr
    pos: Pos = _pos()


@dataclass(frozen=True)
class HomogenyQ:
    S: GroupExpr
    G: GroupExpr
    H: GroupExpr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ValidateQ:
    target: ImagExpr
    pos: Pos = _pos()


Query = Union[RankQ, IndepQ, SuRealQ, IsogenousQ, HomogenyQ, ValidateQ]


@dataclass(frozen=True)
class QueryStmt:
    query: Query
    pos: Pos = _pos()


Statement = Union[Char, Declare, Let, GroupDef, ImagDef, Load, QueryStmt]


@dataclass(frozen=True)
class Script:
    statements: tuple[Statement, ...]

    @property
    def queries(self) -> tuple[QueryStmt, ...]:
        return tuple(s for s in self.statements if isinstance(s, QueryStmt))

    def flattened(self) -> tuple[Statement, ...]:
        """Statements with loaded sessions inlined."""
        out: list[Statement] = []
        for s in self.statements:
            if isinstance(s, Load):
                out += Script(s.body).flattened()
            else:
                out.append(s)
        return tuple(out)
