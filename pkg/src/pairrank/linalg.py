"""Exact linear algebra: ranks and kernels over Q(s), Smith normal form over Z."""
from __future__ import annotations

import random
from typing import Sequence

import gmpy2
from sympy import Matrix as SympyMatrix
from sympy.matrices.normalforms import invariant_factors
from sympy.polys.domains import QQ, ZZ

from . import settings
from .exactfield import RatExpr, TowerContext, common_context, eval_poly_at

Matrix = list[list[RatExpr]]


# -- matrices over Q(s, t) -------------------------------------------------------------

def _sample_rank(rows: Matrix, ctx: TowerContext, rng: random.Random, bound: int) -> int | None:
    names = ctx.variables or ("_one",)
    point = [QQ(rng.randint(-bound, bound)) for _ in names]
    vals = []
    for row in rows:
        out = []
        for e in row:
            e = e.lift(ctx)
            d = eval_poly_at(e.den, point)
            if d == 0:
                return None
            out.append(eval_poly_at(e.num, point) / d)
        vals.append(out)
    return rank_exact_numbers(vals)


def rank_exact_numbers(rows: Sequence[Sequence]) -> int:
    """Rank of a matrix of exact numbers (mpq / Fraction / int) by Gaussian elimination."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        for i in range(r + 1, len(m)):
            if m[i][c] != 0:
                f = m[i][c] / pv
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def _bareiss_rank(rows: list[list]) -> int:
    """Fraction-free elimination over a polynomial ring."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    ring = m[0][0].ring
    prev = ring.one
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, len(m)):
            m[i] = [
                (m[r][c] * m[i][j] - m[i][c] * m[r][j]).exquo(prev) if j > c else ring.zero
                for j in range(ncols)
            ]
        prev = m[r][c]
        r += 1
        if r == len(m):
            break
    return r


def matrix_rank(rows: Matrix) -> int:
    """Exact rank of a matrix over the rational function field.

    Random rational specialization gives a lower bound; when it is not already
    maximal the exact fraction-free elimination decides.
    """
    rows = [list(r) for r in rows if r]
    if not rows or not rows[0]:
        return 0
    ctx = common_context(e for r in rows for e in r)
    cfg = settings.current()
    rng = random.Random(cfg.seed)
    full = min(len(rows), len(rows[0]))
    for _ in range(cfg.sample_attempts):
        lower = _sample_rank(rows, ctx, rng, cfg.sample_bound)
        if lower is not None:
            if lower == full:
                return full
            break
    ring = ctx.ring
    polys = []
    for row in rows:
        row = [e.lift(ctx) for e in row]
        den = ring.one
        for e in row:
            if e.den != ring.one:
                den = den.lcm(e.den)
        polys.append([e.num * den.exquo(e.den) for e in row])
    return _bareiss_rank(polys)


def rref(rows: Matrix, ctx: TowerContext) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over Q(s, t) and pivot columns."""
    m = [[e.lift(ctx) for e in r] for r in rows]
    pivots: list[int] = []
    if not m:
        return m, pivots
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if not m[i][c].is_zero()), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [e * inv for e in m[r]]
        for i in range(len(m)):
            if i != r and not m[i][c].is_zero():
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Matrix, ncols: int, ctx: TowerContext) -> Matrix:
    """Basis (as row vectors) of {v : rows . v = 0} over Q(s, t)."""
    red, pivots = rref(rows, ctx) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [ctx.zero() for _ in range(ncols)]
        v[f] = ctx.one()
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


# -- integer matrices --------------------------------------------------------------------

def int_rank(rows: Sequence[Sequence[int]]) -> int:
    return rank_exact_numbers([[gmpy2.mpq(x) for x in r] for r in rows]) if rows else 0


def smith_normal_form(rows: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero elementary divisors d1 | d2 | ... of an integer matrix."""
    if not rows or not rows[0]:
        return []
    m = SympyMatrix([[int(x) for x in r] for r in rows])
    return [abs(int(d)) for d in invariant_factors(m, domain=ZZ) if d != 0]


def is_saturated(rows: Sequence[Sequence[int]]) -> bool:
    """True when the row lattice equals its rational span intersected with Z^n."""
    return all(d == 1 for d in smith_normal_form(rows))


def int_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Basis of the integer kernel {v in Z^n : rows . v = 0}; the basis spans a saturated lattice."""
    # column reduction of [A; I] keeps the lower block unimodular
    a = [list(map(int, r)) for r in rows]
    cols = [[a[i][j] for i in range(len(a))] + [1 if k == j else 0 for k in range(ncols)] for j in range(ncols)]
    m = len(a)
    r = 0
    for i in range(m):
        while True:
            nz = [j for j in range(r, ncols) if cols[j][i]]
            if not nz:
                break
            jmin = min(nz, key=lambda j: abs(cols[j][i]))
            cols[r], cols[jmin] = cols[jmin], cols[r]
            others = [j for j in range(r + 1, ncols) if cols[j][i]]
            if not others:
                r += 1
                break
            for j in others:
                q = cols[j][i] // cols[r][i]
                cols[j] = [x - q * y for x, y in zip(cols[j], cols[r])]
        if r == ncols:
            break
    return [c[m:] for c in cols[r:]]


def saturate(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Basis of (span_Q rows) ∩ Z^n."""
    k = int_kernel(rows, ncols)
    if not k:
        return [[1 if i == j else 0 for i in range(ncols)] for j in range(ncols)]
    return int_kernel(k, ncols)
