"""Exact two-phase simplex with Bland's rule.

Works over any exact ordered field (rationals or Q(sqrt(2))): termination is
guaranteed by Bland's pivoting rule and every returned optimum is a vertex
certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from gmpy2 import mpq

from .scalars import sign

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class LpResult:
    status: str
    value: Optional[object] = None
    point: Optional[tuple] = None


def _pivot(T, basis, r, c):
    piv = T[r][c]
    row = [a / piv for a in T[r]]
    T[r] = row
    for i, other in enumerate(T):
        if i == r:
            continue
        f = other[c]
        if sign(f) != 0:
            T[i] = [a - f * b for a, b in zip(other, row)]
    basis[r] = c


def _price_out(T, basis, cost):
    """Reduced-cost row for minimizing `cost` over the current basis."""
    m = len(T)
    ncols = len(T[0])
    z = list(cost) + [mpq(0)]  # trailing slot: -objective value
    for i in range(m):
        cb = cost[basis[i]]
        if sign(cb) != 0:
            z = [a - cb * b for a, b in zip(z, T[i])]
    return z


def _simplex_core(T, basis, cost):
    """Minimize cost over {Ax = b, x >= 0} given a starting basis.
    Returns status; T and basis are updated in place."""
    ncols = len(T[0]) - 1
    z = _price_out(T, basis, cost)
    while True:
        enter = -1
        for j in range(ncols):
            if sign(z[j]) < 0:
                enter = j
                break
        if enter < 0:
            return OPTIMAL
        leave, best = -1, None
        for i in range(len(T)):
            a = T[i][enter]
            if sign(a) > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            return UNBOUNDED
        _pivot(T, basis, leave, enter)
        z = _price_out(T, basis, cost)


def lp_solve(objective: Sequence, ineqs=(), eqs=(), nonneg=False,
             maximize=True) -> LpResult:
    """Optimize objective.x subject to row.x <= rhs (ineqs) and row.x = rhs
    (eqs).  Variables are free unless nonneg=True.  Returns an optimal
    vertex, or the unbounded/infeasible status."""
    def _q(x):
        from .scalars import Quad2
        return x if isinstance(x, Quad2) else mpq(x)

    objective = [_q(a) for a in objective]
    ineqs = [([_q(a) for a in row], _q(b)) for row, b in ineqs]
    eqs = [([_q(a) for a in row], _q(b)) for row, b in eqs]
    n = len(objective)
    split = not nonneg
    nvars = 2 * n if split else n

    def expand(row):
        if split:
            out = []
            for a in row:
                out.append(a)
            for a in row:
                out.append(-a)
            return out
        return list(row)

    rows, rhs, senses = [], [], []
    for row, b in ineqs:
        if len(row) != n:
            raise ValueError("inequality row length mismatch")
        rows.append(expand(row))
        rhs.append(b)
        senses.append("<=")
    for row, b in eqs:
        if len(row) != n:
            raise ValueError("equality row length mismatch")
        rows.append(expand(row))
        rhs.append(b)
        senses.append("=")

    m = len(rows)
    nslack = sum(1 for s in senses if s == "<=")
    total = nvars + nslack + m  # artificials for every row
    T = []
    basis = []
    si = 0
    for i in range(m):
        row = list(rows[i]) + [mpq(0)] * (nslack + m) + [rhs[i]]
        if senses[i] == "<=":
            row[nvars + si] = mpq(1)
            si += 1
        if sign(row[-1]) < 0:
            row = [-a for a in row]
        row[nvars + nslack + i] = mpq(1)
        T.append(row)
        basis.append(nvars + nslack + i)

    # Phase 1: drive out the artificials.
    cost1 = [mpq(0)] * total
    for j in range(nvars + nslack, total):
        cost1[j] = mpq(1)
    status = _simplex_core(T, basis, cost1)
    assert status == OPTIMAL  # phase-1 objective is bounded below by 0
    val1 = sum((T[i][-1] for i in range(m) if basis[i] >= nvars + nslack),
               mpq(0))
    if sign(val1) > 0:
        return LpResult(INFEASIBLE)
    # Pivot remaining artificials out of the basis where possible.
    for i in range(m):
        if basis[i] >= nvars + nslack:
            for j in range(nvars + nslack):
                if sign(T[i][j]) != 0:
                    _pivot(T, basis, i, j)
                    break

    # Phase 2 on the original columns; artificial columns are frozen by a
    # prohibitive check in the entering rule (we simply exclude them).
    cost2 = [mpq(0)] * total
    for j in range(nvars):
        c = objective[j] if j < n else -objective[j - n]
        cost2[j] = -c if maximize else c

    ncols = total
    z = _price_out(T, basis, cost2)
    while True:
        enter = -1
        for j in range(nvars + nslack):  # never re-enter an artificial
            if sign(z[j]) < 0:
                enter = j
                break
        if enter < 0:
            break
        leave, best = -1, None
        for i in range(m):
            a = T[i][enter]
            if sign(a) > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            return LpResult(UNBOUNDED)
        _pivot(T, basis, leave, enter)
        z = _price_out(T, basis, cost2)

    x = [mpq(0)] * nvars
    for i in range(m):
        if basis[i] < nvars:
            x[basis[i]] = T[i][-1]
    if split:
        point = tuple(x[j] - x[n + j] for j in range(n))
    else:
        point = tuple(x[:n])
    value = sum((c * v for c, v in zip(objective, point)),
                mpq(0)) if n else mpq(0)
    return LpResult(OPTIMAL, value, point)
