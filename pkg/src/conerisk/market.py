"""Numeraire vectors, portfolio cones and the trading cones K_t.

Portfolio space has dimension (d+1)*n, flattened component-major: slot
i*n + w holds the holding of asset i on atom w.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpq

from .cones import (LinearMap, PolyCone, cone_equal, dd_convert, dual_cone,
                    linear_image, linear_preimage, vdot)
from .scalars import scalar_to_json, sign
from .space import FilteredSpace, RandomVec, SpaceError


class MarketError(ValueError):
    pass


@dataclass(frozen=True)
class NumeraireVec:
    """V = (v^0, ..., v^d); v^0 is identically 1, all components strictly
    positive at every atom."""

    space: FilteredSpace
    columns: tuple  # tuple of RandomVec, width 1 each

    def __post_init__(self):
        cols = tuple(self.columns)
        object.__setattr__(self, "columns", cols)
        if not cols:
            raise MarketError("need at least the cash numeraire")
        for j, col in enumerate(cols):
            if col.n != self.space.n or col.width != 1:
                raise MarketError(f"numeraire {j} has the wrong shape")
            if any(sign(v[0]) <= 0 for v in col.values):
                raise MarketError(f"numeraire {j} is not strictly positive")
        if any(v[0] != 1 for v in cols[0].values):
            raise MarketError("component 0 must be the constant 1 (cash)")

    @property
    def d(self) -> int:
        return len(self.columns) - 1

    @property
    def portfolio_dim(self) -> int:
        return (self.d + 1) * self.space.n


def unit_numeraire(space: FilteredSpace, d: int = 0) -> NumeraireVec:
    one = RandomVec.constant(space.n, mpq(1))
    return NumeraireVec(space, tuple(one for _ in range(d + 1)))


def portfolio_value(V: NumeraireVec, H: Sequence) -> RandomVec:
    """H.V: flat portfolio vector -> scalar claim, atomwise."""
    n = V.space.n
    if len(H) != V.portfolio_dim:
        raise MarketError("portfolio vector has the wrong length")
    vals = []
    for w in range(n):
        s = mpq(0)
        for i in range(V.d + 1):
            s = s + H[i * n + w] * V.columns[i].values[w][0]
        vals.append((s,))
    return RandomVec(tuple(vals))


def value_map(V: NumeraireVec) -> LinearMap:
    """The linear map H |-> H.V from portfolio space to claim space."""
    n = V.space.n
    rows = []
    for w in range(n):
        row = [mpq(0)] * V.portfolio_dim
        for i in range(V.d + 1):
            row[i * n + w] = V.columns[i].values[w][0]
        rows.append(tuple(row))
    return LinearMap(tuple(rows))


def portfolio_cone(V: NumeraireVec, claim_cone: PolyCone) -> PolyCone:
    """D(V) = {H : H.V in D}, the value-map preimage of a claim cone."""
    if claim_cone.dim != V.space.n:
        raise MarketError("claim cone lives on the wrong space")
    return linear_preimage(value_map(V), claim_cone)


def value_image(V: NumeraireVec, portfolio_cone_: PolyCone) -> PolyCone:
    """D.V = {H.V : H in D}, the value-map image of a portfolio cone."""
    return linear_image(value_map(V), portfolio_cone_)


def measurability_cone(space: FilteredSpace, t: int, components: int) -> PolyCone:
    """The linear subspace of F_t-measurable portfolio vectors, as a cone
    generated by +-(indicator blocks) per component."""
    n = space.n
    gens = []
    for i in range(components):
        for block in space.blocks(t):
            g = [mpq(0)] * (components * n)
            for a in block:
                g[i * n + a] = mpq(1)
            gens.append(tuple(g))
            gens.append(tuple(-x for x in g))
    return PolyCone(components * n, gens=tuple(gens))


def intersect_measurable(space: FilteredSpace, cone: PolyCone, t: int,
                         components: int) -> PolyCone:
    """Intersection with the F_t-measurable subspace, imposed by difference
    rows +-(e_{i,a} - e_{i,b}) for consecutive atoms of each block."""
    n = space.n
    rows = list(cone.inequalities)
    for i in range(components):
        for block in space.blocks(t):
            for a, b in zip(block, block[1:]):
                row = [mpq(0)] * (components * n)
                row[i * n + a] = mpq(1)
                row[i * n + b] = mpq(-1)
                rows.append(tuple(row))
                rows.append(tuple(-x for x in row))
    return dd_convert(PolyCone(cone.dim, ineqs=tuple(rows)))


def k_cone(rm, V: NumeraireVec, t: int) -> PolyCone:
    """K_t = {H F_{t+1}-measurable : H.V acceptable at time t} inside
    portfolio space, for t in 0..T-1."""
    from .risk import acceptance_cone
    space = V.space
    if not (0 <= t < space.horizon):
        raise MarketError(f"t={t} outside 0..{space.horizon - 1}")
    acc = acceptance_cone(rm, t)
    dv = portfolio_cone(V, acc)
    return intersect_measurable(space, dv, t + 1, V.d + 1)


def lifted_dual_generators(V: NumeraireVec, densities: Sequence) -> tuple:
    """Generators z~ (x) V = (z~ . v^0, ..., z~ . v^d) of the portfolio-space
    dual D(V)* built from claim-space dual generators z~."""
    n = V.space.n
    out = []
    for z in densities:
        g = []
        for i in range(V.d + 1):
            col = V.columns[i]
            g.extend(z[a] * col.values[a][0] for a in range(n))
        out.append(tuple(g))
    return tuple(out)


def portfolio_weights(space: FilteredSpace, components: int) -> tuple:
    """Inner-product weights on portfolio space (probability copied per
    component)."""
    return tuple(space.probs[w] for _ in range(components)
                 for w in range(space.n))


@dataclass(frozen=True)
class SackvReport:
    holds: bool
    note: str = ""


def sackv_check(V: NumeraireVec, claim_cone: PolyCone) -> SackvReport:
    """Verify D(V)* = D* V: the dual of the value-map preimage equals the
    lift of the claim-space dual generators. Both sides computed
    independently (preimage then dual vs dual then lift)."""
    space = V.space
    wts = portfolio_weights(space, V.d + 1)
    lhs = dual_cone(portfolio_cone(V, claim_cone), wts)
    claim_dual = dual_cone(claim_cone, space.probs)
    rhs = PolyCone(V.portfolio_dim,
                   gens=lifted_dual_generators(V, claim_dual.generators))
    ok, cert = cone_equal(lhs, rhs)
    note = "" if ok else (
        f"{cert.side} generator {tuple(map(str, cert.generator))} violates "
        f"{tuple(map(str, cert.violated))}")
    return SackvReport(ok, note)


def numeraire_to_json(V: NumeraireVec) -> list:
    return [[scalar_to_json(v[0]) for v in col.values] for col in V.columns]


def numeraire_from_json(space: FilteredSpace, data) -> NumeraireVec:
    from .scalars import parse_scalar
    cols = tuple(RandomVec.scalar(tuple(parse_scalar(x) for x in col))
                 for col in data)
    return NumeraireVec(space, cols)
