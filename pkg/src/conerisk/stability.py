"""Predictable pre-images, stable hulls, measure pasting and witness
searches on the dual side.

Dual objects live in portfolio coordinates (width d+1 per atom,
component-major flattening), paired against claims through the
probability-replicated inner product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from gmpy2 import mpq

from .cones import (LinearMap, PolyCone, cone_equal, cone_member, dd_convert,
                    dual_cone, linear_image, linear_preimage)
from .market import (NumeraireVec, lifted_dual_generators, portfolio_weights)
from .risk import ORACLE, RiskMeasure, oracle_member, set_member, violation_note
from .scalars import scalar_to_json, sign
from .space import (FilteredSpace, Measure, StoppingTime,
                    enumerate_stopping_times, enumeration_cap)


class StabilityError(ValueError):
    pass


class UndefinedPastingError(StabilityError):
    """Pasting ratio needs division by zero: the donor measure stops
    charging a block that the recipient still charges."""


@dataclass(frozen=True)
class DualCone:
    """A polyhedral cone of nonnegative density processes in portfolio
    coordinates."""

    space: FilteredSpace
    components: int
    cone: PolyCone

    def __post_init__(self):
        if self.cone.dim != self.components * self.space.n:
            raise StabilityError("dual cone dimension mismatch")

    @property
    def weights(self) -> tuple:
        return portfolio_weights(self.space, self.components)


def lifted_acceptance_dual(rm: RiskMeasure, V: NumeraireVec) -> DualCone:
    """A_0(V)* as a dual cone: generated by the lifts z (x) V of the
    time-0 vertex densities z."""
    space = rm.space
    densities = [tuple(q.weights[a] / space.probs[a] for a in range(space.n))
                 for q in rm.vertex_list()]
    gens = lifted_dual_generators(V, densities)
    return DualCone(space, V.d + 1,
                    PolyCone(V.portfolio_dim, gens=gens))


def cond_expect_map(space: FilteredSpace, t: int, components: int) -> LinearMap:
    """E[.|F_t] as a linear map on portfolio coordinates, acting
    componentwise and blockwise under the reference probabilities."""
    n = space.n
    dim = components * n
    rows = []
    for i in range(components):
        for a in range(n):
            block = next(b for b in space.blocks(t) if a in b)
            mass = space.block_mass(block)
            row = [mpq(0)] * dim
            for b in block:
                row[i * n + b] = space.probs[b] / mass
            rows.append(tuple(row))
    return LinearMap(tuple(rows))


def _ft_cone(space: FilteredSpace, t: int, components: int,
             cone: PolyCone) -> PolyCone:
    """The F_t-cone of a generated cone: multiples by nonnegative
    F_t-measurable scalars, generated by the blockwise cut-downs 1_B.g."""
    n = space.n
    gens = []
    for g in cone.generators:
        for block in space.blocks(t):
            cut = tuple(g[i * n + a] if a in block else mpq(0)
                        for i in range(components) for a in range(n))
            if any(sign(x) != 0 for x in cut):
                gens.append(cut)
    return PolyCone(cone.dim, gens=tuple(gens))


def predictable_preimage(D: DualCone, t: int) -> PolyCone:
    """Closed convex hull of M_t(D): densities whose F_{t+1}-conditional
    expectation is a nonnegative F_t-scalar multiple of that of a member
    of D.  Computed as the preimage under E[.|F_{t+1}] of the F_t-cone of
    the image of D."""
    space = D.space
    if not (0 <= t < space.horizon):
        raise StabilityError(f"t={t} outside 0..{space.horizon - 1}")
    L = cond_expect_map(space, t + 1, D.components)
    image = linear_image(L, D.cone)
    scaled = _ft_cone(space, t, D.components, image)
    return linear_preimage(L, dd_convert(scaled))


def stable_hull(D: DualCone) -> PolyCone:
    """[D]: the smallest predictably m-stable closed convex cone containing
    D, as the intersection over t of the pre-image hulls."""
    rows = []
    for t in range(D.space.horizon):
        rows.extend(predictable_preimage(D, t).inequalities)
    return dd_convert(PolyCone(D.cone.dim, ineqs=tuple(rows)))


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    certificate_density: Optional[tuple] = None
    violated_inequality: Optional[tuple] = None


def is_predictably_stable(D: DualCone) -> StabilityVerdict:
    """Exact decision: D equals its stable hull.  On failure the
    certificate is a hull generator outside D with the inequality of D it
    violates."""
    hull = stable_hull(D)
    ok, cert = cone_equal(D.cone, hull)
    if ok:
        return StabilityVerdict(True)
    # D is always contained in its hull, so the disagreeing generator
    # comes from the hull side.
    return StabilityVerdict(False, cert.generator, cert.violated)


# -- measure pasting ----------------------------------------------------------

def _stopped_block(space: FilteredSpace, tau: StoppingTime, atom: int):
    t = tau.values[atom]
    return next(b for b in space.blocks(t) if atom in b)


def paste(space: FilteredSpace, Q: Measure, W: Measure,
          tau: StoppingTime) -> Measure:
    """Q pasted onto W at tau: follow Q up to tau, then reweight W's
    forward dynamics by the stopped likelihood ratio."""
    if Q.n != space.n or W.n != space.n:
        raise StabilityError("measures on the wrong space")
    out = []
    for a in range(space.n):
        block = _stopped_block(space, tau, a)
        qmass = sum((Q.weights[b] for b in block), mpq(0))
        wmass = sum((W.weights[b] for b in block), mpq(0))
        if sign(qmass) == 0:
            out.append(mpq(0))
            continue
        if sign(wmass) == 0:
            raise UndefinedPastingError(
                f"stopped block {block} has positive mass under the first "
                "measure but zero under the second")
        out.append(W.weights[a] * qmass / wmass)
    return Measure(tuple(out))


# -- witness search -----------------------------------------------------------

@dataclass(frozen=True)
class PastingWitness:
    tau: StoppingTime
    Q: Measure
    Qprime: Measure
    pasted: Measure
    violated: str

    def to_json(self) -> dict:
        return {
            "tau": list(self.tau.values),
            "Q": [scalar_to_json(w) for w in self.Q.weights],
            "Qprime": [scalar_to_json(w) for w in self.Qprime.weights],
            "pasted": [scalar_to_json(w) for w in self.pasted.weights],
            "violated": self.violated,
        }


def _conditional_numeraire_profile(space: FilteredSpace, V: NumeraireVec,
                                   Q: Measure, tau: StoppingTime):
    """E_Q[v^i | F_tau] per non-cash component, with None on atoms whose
    stopped block carries no Q-mass."""
    profile = []
    for i in range(1, V.d + 1):
        col = V.columns[i]
        vals = []
        for a in range(space.n):
            block = _stopped_block(space, tau, a)
            mass = sum((Q.weights[b] for b in block), mpq(0))
            if sign(mass) == 0:
                vals.append(None)
            else:
                vals.append(sum((Q.weights[b] * col.values[b][0]
                                 for b in block), mpq(0)) / mass)
        profile.append(tuple(vals))
    return tuple(profile)


def _profiles_equal(p1, p2) -> bool:
    for c1, c2 in zip(p1, p2):
        for v1, v2 in zip(c1, c2):
            if (v1 is None) != (v2 is None):
                return False  # one-sided zero-mass block: unequal
            if v1 is not None and sign(v1 - v2) != 0:
                return False
    return True


def _pasting_defined(space, Q, W, tau) -> bool:
    for block in {tuple(_stopped_block(space, tau, a))
                  for a in range(space.n)}:
        qmass = sum((Q.weights[b] for b in block), mpq(0))
        wmass = sum((W.weights[b] for b in block), mpq(0))
        if sign(qmass) > 0 and sign(wmass) == 0:
            return False
    return True


def vstability_witness_search(rm: RiskMeasure, V: NumeraireVec,
                              taus: Optional[Sequence[StoppingTime]] = None
                              ) -> Optional[PastingWitness]:
    """Search member pairs and stopping times for a pasting that leaves the
    representing set while matching conditional numeraire expectations.

    A returned witness refutes V-m-stability.  Returning none proves
    nothing by itself when the member list is not the full extreme-point
    set; the exact verdict is is_predictably_stable.  The pair (Q, Q')
    is admissible when the pasting is defined and E_Q[v^i|F_tau] =
    E_Q'[v^i|F_tau] for every non-cash component i (blocks unweighted by
    both measures compare equal; one-sided zero-mass blocks compare
    unequal).  The cash component is excluded: its ratio is the scaling
    the pasting itself supplies."""
    space = rm.space
    members = rm.rset.search_members()
    if taus is None:
        taus = enumerate_stopping_times(space, enumeration_cap())
    for tau in taus:
        profiles = [_conditional_numeraire_profile(space, V, q, tau)
                    for q in members]
        for iq, Q in enumerate(members):
            for iw, W in enumerate(members):
                if iq == iw:
                    continue
                if not _pasting_defined(space, Q, W, tau):
                    continue
                if not _profiles_equal(profiles[iq], profiles[iw]):
                    continue
                pasted = paste(space, Q, W, tau)
                if rm.rset.kind == ORACLE:
                    inside = oracle_member(rm.rset, pasted)
                else:
                    inside = set_member(rm.rset, pasted)
                if not inside:
                    return PastingWitness(tau, Q, W, pasted,
                                          violation_note(rm.rset, pasted))
    return None


@dataclass(frozen=True)
class CrucialClaimReport:
    holds: bool
    note: str = ""


def crucial_claim_check(rm: RiskMeasure, V: NumeraireVec, t: int
                        ) -> CrucialClaimReport:
    """Verify that the time-t acceptable-portfolio cone equals the dual of
    the predictable pre-image of the lifted time-0 dual cone."""
    from .market import k_cone
    D = lifted_acceptance_dual(rm, V)
    pre = predictable_preimage(D, t)
    rhs = dual_cone(dd_convert(pre), D.weights)
    ok, cert = cone_equal(k_cone(rm, V, t), rhs)
    note = "" if ok else (
        f"t={t}: {cert.side} generator {tuple(map(str, cert.generator))} "
        f"violates {tuple(map(str, cert.violated))}")
    return CrucialClaimReport(ok, note)
