"""Forking independence of imaginaries by criterion and by rank drop, plus ranks of real tuples.

Two computations are kept apart on purpose. ``rank_drop`` only uses ranks of
tuples (orbit codes of generic translates). ``star_conditions`` uses the triple
construction: minimal representatives, stabilizers, the connector g0 and the
double coset K. ``theoremB_check`` compares the two.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .errors import NegativeRank, UnknownConnectedness
from .exactfield import RatExpr
from .galgebra import DoubleCosetSpec, connected, dim_group, double_coset_dim, is_catalog
from .imaginaries import (ZERO, GeomRank, Imaginary, PillayImaginary, combine, combine_pair,
                          grank, orbit_code, relative_rank, triple_data)
from .tdeg import FieldDesc, canonical_base_td, td
from .tdeg import independent as td_independent


@dataclass(frozen=True)
class StarReport:
    cond_a: bool
    cond_b: bool
    cond_c: bool
    J: int
    dimK: int          # td of a generic point of K over b12 b23
    dimG2: int
    g0: tuple[RatExpr, ...]
    dimK_geometric: int = 0   # dim K as a variety (over g0 b12 b23)

    @property
    def holds(self) -> bool:
        return self.cond_a and self.cond_b and self.cond_c

    def as_dict(self) -> dict:
        return {"cond_a": self.cond_a, "cond_b": self.cond_b, "cond_c": self.cond_c, "J": self.J,
                "dimK": self.dimK, "dimG2": self.dimG2, "dimK_geometric": self.dimK_geometric,
                "g0": [str(x) for x in self.g0]}


def _as_middle(e2: Imaginary) -> PillayImaginary:
    if not isinstance(e2, PillayImaginary):
        raise ValueError("the middle imaginary must be a single Pillay imaginary")
    return e2


def star_conditions(e1: Imaginary, e2: Imaginary, e3: Imaginary) -> StarReport:
    """Conditions (a), (b), (c) for e1 and e3 over e2."""
    e2 = _as_middle(e2)
    if is_catalog(e2.group) and not connected(e2.group):
        raise UnknownConnectedness(f"the middle group {e2.group} is not connected")
    a1 = tuple(x for p in e1.parts for x in p.witness)
    a2 = e2.witness
    a3 = tuple(x for p in e3.parts for x in p.witness)
    # (a): a1 and a3 independent over a2 and P
    cond_a = td_independent(a1, a3, FieldDesc(a2, True))
    e12 = combine_pair(e1, e2)
    e23 = combine_pair(e2, e3)
    data = triple_data(e12, e23)
    # (b): J = td(b12/b2) - td(b12/b23)
    td_b2 = orbit_code((e2,)).td_base
    t12, t23 = td(data.b12), td(data.b23)
    J = t12 + t23 - td_b2 - td(data.b12 + data.b23)
    # (c): some point of K is generic in G2 over b12 b23
    spec = DoubleCosetSpec(data.G2, data.H1, data.H3, data.g0)
    dimK = double_coset_dim(spec, FieldDesc(data.b12 + data.b23))
    dimG2 = dim_group(data.G2)
    return StarReport(cond_a, J == 0, dimK == dimG2, J, dimK, dimG2, data.g0, data.dim_K)


def independent(e1: Imaginary, e2: Imaginary, e3: Imaginary) -> bool:
    """e1 independent from e3 over e2, by the three-condition criterion."""
    return star_conditions(e1, e2, e3).holds


def rank_drop(e1: Imaginary, e2: Imaginary, e3: Imaginary) -> GeomRank:
    """gR(e1/e2) - gR(e1/e2e3), from ranks of tuples only."""
    r12 = relative_rank(e1, e2)
    r123 = relative_rank(e1, combine_pair(e2, e3))
    drop = r12 - r123
    if drop < ZERO:
        raise NegativeRank(f"rank drop {drop.display()} is negative")
    return drop


@dataclass(frozen=True)
class TheoremBReport:
    agree: bool
    drop: GeomRank
    indep: bool
    star: StarReport

    def as_dict(self) -> dict:
        return {"agree": self.agree, "drop": self.drop.as_dict(), "indep": self.indep, "star": self.star.as_dict()}


def theoremB_check(e1: Imaginary, e2: Imaginary, e3: Imaginary) -> TheoremBReport:
    drop = rank_drop(e1, e2, e3)
    star = star_conditions(e1, e2, e3)
    return TheoremBReport((drop == ZERO) == star.holds, drop, star.holds, star)


def su_real(a: Sequence[RatExpr], C: FieldDesc = FieldDesc()) -> GeomRank:
    """omega * td(a / C P) + td(Cb(a/P) / C) for a real tuple."""
    a = tuple(a)
    return GeomRank(td(a, FieldDesc(C.generators, True)), canonical_base_td(a, FieldDesc(C.generators)))


def grank_over_finite_set(e: Imaginary, C: Sequence[Imaginary]) -> GeomRank:
    """gR(e / C) for a finite set C, as the relative rank against all of C."""
    C = list(C)
    if not C:
        return grank(e)
    return relative_rank(e, combine(*C))


def grank_over_subsets(e: Imaginary, C: Sequence[Imaginary]) -> GeomRank:
    """Minimum of gR(e / C0) over all subsets C0 of C (reference computation)."""
    C = list(C)
    best = None
    for k in range(len(C) + 1):
        for sub in itertools.combinations(C, k):
            r = grank_over_finite_set(e, sub)
            best = r if best is None or r < best else best
    return best


__all__ = ["StarReport", "star_conditions", "independent", "rank_drop", "theoremB_check", "TheoremBReport",
           "su_real", "grank_over_finite_set", "grank_over_subsets"]
