"""Buchberger's algorithm with Gebauer-Moeller pair pruning and a reduction budget.

Works over any sympy ``PolyRing`` whose ground domain is a field (QQ or a
rational function field QQ(s1, ...)). Every reduction step is counted by the
number of terms it touches; the computation raises :class:`ResourceLimit` once
the configured budget is spent.
"""
from __future__ import annotations

import heapq
from operator import add, le, sub
from itertools import combinations
from typing import Iterable, Sequence

from sympy.polys.orderings import MonomialOrder, grevlex, lex
from sympy.polys.rings import PolyElement, PolyRing

from . import settings
from .errors import ResourceLimit


class BlockOrder(MonomialOrder):
    """Block elimination order: earlier blocks dominate, grevlex inside a block.

    Keys are flat integer tuples, which keeps comparisons cheap and lets the
    reduction loop negate them for a min-heap.
    """

    alias = "block"
    is_global = True
    is_default = False

    def __init__(self, sizes: Sequence[int]) -> None:
        self.sizes = tuple(sizes)
        bounds, start = [], 0
        for n in self.sizes:
            bounds.append((start, start + n))
            start += n
        self.bounds = tuple(bounds)

    def __call__(self, monomial: tuple) -> tuple:
        out: list[int] = []
        for a, b in self.bounds:
            blk = monomial[a:b]
            out.append(sum(blk))
            out.extend(-x for x in reversed(blk))
        return tuple(out)

    def __repr__(self) -> str:
        return f"BlockOrder({list(self.sizes)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, BlockOrder) and other.sizes == self.sizes

    def __hash__(self) -> int:
        return hash(("block", self.sizes))


def block_order(sizes: Sequence[int]) -> BlockOrder:
    return BlockOrder(sizes)


def _flat_key(ring: PolyRing):
    """A flat-tuple key equivalent to the ring's monomial order."""
    order = ring.order
    if isinstance(order, BlockOrder):
        return order
    if order == grevlex:
        return BlockOrder([ring.ngens])
    if order == lex:
        return lambda m: m
    return order


def _divides(a: tuple, b: tuple) -> bool:
    return all(map(le, a, b))


def _lcm(a: tuple, b: tuple) -> tuple:
    return tuple(max(x, y) for x, y in zip(a, b))


def _total_degree(p: PolyElement) -> int:
    return max((sum(m) for m in p.itermonoms()), default=0)


def _coprime(a: tuple, b: tuple) -> bool:
    return all(not (x and y) for x, y in zip(a, b))


class _Budget:
    def __init__(self, limit: int | None) -> None:
        self.limit = settings.current().budget if limit is None else limit
        self.used = 0

    def spend(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise ResourceLimit(
                f"Groebner computation exceeded {self.limit} term reduction steps; "
                "use the other oracle or simplify the input"
            )


def _coeff_weight(c) -> int:
    """Cost multiplier for a reduction step, growing with coefficient bit size."""
    try:
        bits = int(c.numerator).bit_length() + int(c.denominator).bit_length()
    except AttributeError:
        return 1
    return 1 + bits // 64


def _leading(p: PolyElement, key):
    return max(p.itermonoms(), key=key)


def normal_form(f: PolyElement, basis: Sequence[tuple[PolyElement, tuple]], key, budget: _Budget) -> PolyElement:
    """Full reduction of ``f`` modulo monic polynomials ``basis`` given with their leading monomials."""
    ring = f.ring
    p = dict(f)
    heap = [(tuple(-x for x in key(m)), m) for m in p]
    heapq.heapify(heap)
    rem = {}
    while heap:
        _, m = heapq.heappop(heap)
        c = p.pop(m, None)
        if c is None:
            continue  # stale heap entry
        for g, gm in basis:
            if _divides(gm, m):
                q = tuple(map(sub, m, gm))
                for gmon, gc in g.items():
                    if gmon == gm:
                        continue
                    nm = tuple(map(add, gmon, q))
                    old = p.get(nm)
                    if old is None:
                        p[nm] = -c * gc
                        heapq.heappush(heap, (tuple(-x for x in key(nm)), nm))
                    else:
                        v = old - c * gc
                        if v:
                            p[nm] = v
                        else:
                            del p[nm]
                budget.spend(len(g) * _coeff_weight(c))
                break
        else:
            rem[m] = c
    return ring.from_dict(rem) if rem else ring.zero


def groebner_basis(polys: Iterable[PolyElement], ring: PolyRing | None = None,
                   budget: int | None = None) -> list[PolyElement]:
    """Reduced, monic Groebner basis (sorted by decreasing leading monomial).

    Pairs are selected by the sugar strategy, which behaves well for
    elimination orders.
    """
    polys = [p for p in polys if p]
    if not polys:
        return []
    ring = ring or polys[0].ring
    key = _flat_key(ring)
    b = _Budget(budget)

    basis: list[tuple[PolyElement, tuple]] = []   # all generators ever kept
    active: list[int] = []                         # indices not made redundant
    sugar: list[int] = []                          # sugar degree of each kept generator
    pairs: list = []                               # heap of (sugar, counter, i, j, lcm)
    counter = 0

    def pair_sugar(i: int, j: int, l: tuple) -> int:
        dl = sum(l)
        return max(sugar[i] + dl - sum(basis[i][1]), sugar[j] + dl - sum(basis[j][1]))

    def add(h: PolyElement, sug: int) -> None:
        nonlocal active, pairs, counter
        h = h.monic()
        hm = _leading(h, key)
        basis.append((h, hm))
        sugar.append(max(sug, _total_degree(h)))
        k = len(basis) - 1
        # Gebauer-Moeller update
        C = [(i, _lcm(basis[i][1], hm)) for i in active]
        D: list[tuple[int, tuple]] = []
        while C:
            i, l = C.pop(0)
            if _coprime(basis[i][1], hm) or not any(_divides(l2, l) for _, l2 in C + D):
                D.append((i, l))
        kept = []
        for entry in pairs:
            _, _, i, j, l = entry
            if _divides(hm, l) and _lcm(basis[i][1], hm) != l and _lcm(basis[j][1], hm) != l:
                continue
            kept.append(entry)
        for i, l in D:
            if not _coprime(basis[i][1], hm):
                counter += 1
                kept.append((pair_sugar(i, k, l), counter, i, k, l))
        heapq.heapify(kept)
        pairs = kept
        active = [i for i in active if not _divides(hm, basis[i][1])] + [k]

    # initial autoreduction keeps the pair set small
    for f in sorted(polys, key=lambda p: key(_leading(p, key))):
        h = normal_form(f, [basis[i] for i in active], key, b)
        if h:
            add(h, _total_degree(f))
    while pairs:
        sug, _, i, j, l = heapq.heappop(pairs)
        f, fm = basis[i]
        g, gm = basis[j]
        s = f.mul_term((tuple(x - y for x, y in zip(l, fm)), f.ring.domain.one)) - \
            g.mul_term((tuple(x - y for x, y in zip(l, gm)), g.ring.domain.one))
        b.spend()
        h = normal_form(s, [basis[a] for a in active], key, b)
        if h:
            add(h, sug)
    # minimal then reduced basis
    lead = [basis[i] for i in active]
    minimal = [(g, gm) for g, gm in lead if not any(om != gm and _divides(om, gm) for _, om in lead)]
    seen = set()
    uniq = []
    for g, gm in minimal:
        if gm not in seen:
            seen.add(gm)
            uniq.append((g, gm))
    reduced = []
    for idx, (g, gm) in enumerate(uniq):
        rest = [uniq[k] for k in range(len(uniq)) if k != idx]
        tail = normal_form(g - g.ring({gm: g[gm]}), rest, key, b)
        reduced.append(((g.ring({gm: g[gm]}) + tail).monic(), gm))
    reduced.sort(key=lambda t: key(t[1]), reverse=True)
    return [g for g, _ in reduced]


def reduce_by(f: PolyElement, basis: Sequence[PolyElement], budget: int | None = None) -> PolyElement:
    key = _flat_key(f.ring)
    return normal_form(f, [(g, _leading(g, key)) for g in basis], key, _Budget(budget))


def leading_monomial(p: PolyElement) -> tuple:
    return _leading(p, _flat_key(p.ring))


def krull_dimension(gb: Sequence[PolyElement], variables: Sequence[int]) -> int:
    """Dimension of the ideal generated by a Groebner basis, in the given variables.

    Only basis elements supported on ``variables`` are considered, which is the
    elimination ideal when the order eliminates the remaining variables. Returns
    -1 for the unit ideal.
    """
    variables = list(variables)
    vset = set(variables)
    leads = []
    for g in gb:
        m = leading_monomial(g)
        if not any(m):
            if all(not any(mm) for mm in g.itermonoms()):
                return -1
        support = {i for i, e in enumerate(m) if e}
        allsup = set()
        for mm in g.itermonoms():
            allsup.update(i for i, e in enumerate(mm) if e)
        if allsup <= vset:
            if not support:
                return -1
            leads.append(frozenset(support))
    for size in range(len(variables), -1, -1):
        for subset in combinations(variables, size):
            sset = set(subset)
            if not any(l <= sset for l in leads):
                return size
    return 0


__all__ = ["BlockOrder", "block_order", "groebner_basis", "reduce_by", "krull_dimension", "leading_monomial", "lex", "grevlex"]
