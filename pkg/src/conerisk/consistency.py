"""Primal-side checkers: the one-step hedging functional, the recursive
acceptance identity, predictable representability, the three-way
equivalence harness and the representation decomposer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from gmpy2 import mpq

from .cones import PolyCone, cone_member, dd_convert, minkowski_sum, vdot
from .market import NumeraireVec, k_cone, portfolio_cone, portfolio_value, value_map
from .risk import RiskMeasure, RiskError, acceptance_cone, rho
from .scalars import sign
from .simplex import INFEASIBLE, OPTIMAL, lp_solve
from .space import RandomVec
from .stability import is_predictably_stable, lifted_acceptance_dual


class ConsistencyError(ValueError):
    pass


class TheoremViolationError(RuntimeError):
    """The three equivalent properties disagreed: an engine bug, never a
    property of the input."""


def _conic_member(gens, x) -> bool:
    """Exact membership of x in the cone spanned by gens, by LP
    feasibility of x = sum lambda_j gens_j with lambda >= 0."""
    if all(sign(v) == 0 for v in x):
        return True
    if not gens:
        return False
    eqs = [(tuple(g[a] for g in gens), x[a]) for a in range(len(x))]
    res = lp_solve([mpq(0)] * len(gens), eqs=eqs, nonneg=True)
    return res.status == OPTIMAL


# -- the one-step hedging functional ------------------------------------------

def epsilon(rm: RiskMeasure, V: NumeraireVec, t: int, X: RandomVec) -> RandomVec:
    """Blockwise infimum of rho_t(Y.V) over F_{t+1}-measurable portfolios Y
    with X - Y.V acceptable at t+1, as an exact LP per F_t block."""
    space = rm.space
    if not (0 <= t < space.horizon):
        raise ConsistencyError(f"t={t} outside 0..{space.horizon - 1}")
    if X.width != 1 or X.n != space.n:
        raise ConsistencyError("claim has the wrong shape")
    verts = rm.vertex_list()
    ncomp = V.d + 1
    out = [None] * space.n
    for B in space.blocks(t):
        bset = set(B)
        subblocks = [C for C in space.blocks(t + 1) if C[0] in bset]
        nvars = 1 + ncomp * len(subblocks)  # u then Y[component][subblock]

        def yidx(i, c):
            return 1 + i * len(subblocks) + c

        def value_coeff(row, atom, scale):
            # add scale * (Y.V)(atom) to the row
            c = next(ci for ci, C in enumerate(subblocks) if atom in C)
            for i in range(ncomp):
                row[yidx(i, c)] += scale * V.columns[i].values[atom][0]

        ineqs = []
        for q in verts:
            qb = sum((q.weights[a] for a in B), mpq(0))
            if sign(qb) > 0:
                row = [mpq(0)] * nvars
                row[0] = -qb
                for a in B:
                    value_coeff(row, a, q.weights[a])
                ineqs.append((tuple(row), mpq(0)))
            for C in subblocks:
                qc = sum((q.weights[a] for a in C), mpq(0))
                if sign(qc) == 0:
                    continue
                row = [mpq(0)] * nvars
                for a in C:
                    value_coeff(row, a, -q.weights[a])
                rhs = -sum((q.weights[a] * X.values[a][0] for a in C), mpq(0))
                ineqs.append((tuple(row), rhs))
        obj = [mpq(-1)] + [mpq(0)] * (nvars - 1)  # maximize -u
        res = lp_solve(obj, ineqs=ineqs)
        if res.status != OPTIMAL:
            raise ConsistencyError(f"hedging LP on block {B} ended {res.status}")
        for a in B:
            out[a] = (-res.value,)
    return RandomVec(tuple(out))


# -- the three checkers --------------------------------------------------------

@dataclass(frozen=True)
class ConsistencyVerdict:
    consistent: bool
    level: Optional[int] = None
    claim: Optional[tuple] = None
    rho_value: Optional[tuple] = None
    epsilon_value: Optional[tuple] = None

    def summary(self) -> str:
        if self.consistent:
            return "acceptance recursion holds at every level"
        return (f"fails at t={self.level}: claim {tuple(map(str, self.claim))} "
                f"has rho={tuple(map(str, self.rho_value))} but one-step hedge "
                f"cost epsilon={tuple(map(str, self.epsilon_value))}")


def is_v_time_consistent(rm: RiskMeasure, V: NumeraireVec) -> ConsistencyVerdict:
    """Decide via the cone identity A_t = K_t.V (+) A_{t+1} for every t,
    cross-validating any failure with the hedging functional."""
    space = rm.space
    vmap = value_map(V)
    for t in range(space.horizon - 1, -1, -1):
        lhs = acceptance_cone(rm, t)
        nxt = acceptance_cone(rm, t + 1)
        kt = k_cone(rm, V, t)
        rhs_gens = tuple(vmap.apply(g) for g in kt.generators) + nxt.generators
        # K_t.V and A_{t+1} both sit inside A_t, so only lhs <= rhs can fail.
        for g in rhs_gens:
            if not cone_member(lhs, g):
                raise TheoremViolationError(
                    f"t={t}: one-step cone escapes the acceptance cone at {g}")
        for g in lhs.generators:
            if not _conic_member(rhs_gens, g):
                claim = RandomVec.scalar(g)
                rv = rho(rm, t, claim)
                ev = epsilon(rm, V, t, claim)
                return ConsistencyVerdict(
                    False, t, g,
                    tuple(v[0] for v in rv.values),
                    tuple(v[0] for v in ev.values))
    return ConsistencyVerdict(True)


@dataclass(frozen=True)
class RepresentabilityVerdict:
    representable: bool
    portfolio: Optional[tuple] = None

    def summary(self) -> str:
        if self.representable:
            return "acceptable portfolios decompose into one-step cones"
        return (f"portfolio {tuple(map(str, self.portfolio))} is acceptable "
                "but not a sum of one-step acceptable portfolios")


def is_predictably_represented(rm: RiskMeasure, V: NumeraireVec
                               ) -> RepresentabilityVerdict:
    """Decide A_0(V) = (+)_t K_t by exact two-sided inclusion (the
    polyhedral sum is closed, so no closure operator is needed)."""
    space = rm.space
    lhs = portfolio_cone(V, acceptance_cone(rm, 0))
    sum_gens = []
    for t in range(space.horizon):
        sum_gens.extend(k_cone(rm, V, t).generators)
    sum_gens = tuple(sum_gens)
    for g in sum_gens:
        if not cone_member(lhs, g):
            raise TheoremViolationError(
                f"one-step portfolio escapes the acceptance preimage at {g}")
    for g in lhs.generators:
        if not _conic_member(sum_gens, g):
            return RepresentabilityVerdict(False, g)
    return RepresentabilityVerdict(True)


@dataclass(frozen=True)
class EquivalenceReport:
    time_consistent: bool
    representable: bool
    dual_stable: bool
    certificates: dict
    agreement: bool

    def to_json(self) -> dict:
        return {
            "time_consistent": self.time_consistent,
            "representable": self.representable,
            "dual_stable": self.dual_stable,
            "certificates": self.certificates,
            "agreement": self.agreement,
        }


def theorem_main_report(rm: RiskMeasure, V: NumeraireVec) -> EquivalenceReport:
    """Run the three equivalent checkers and assert their agreement."""
    tc = is_v_time_consistent(rm, V)
    rep = is_predictably_represented(rm, V)
    stab = is_predictably_stable(lifted_acceptance_dual(rm, V))
    certs = {
        "time_consistent": tc.summary(),
        "representable": rep.summary(),
        "dual_stable": ("stable hull equals the dual cone" if stab.stable else
                        "stable hull adds density "
                        + str(tuple(map(str, stab.certificate_density)))),
    }
    verdicts = (tc.consistent, rep.representable, stab.stable)
    agreement = len(set(verdicts)) == 1
    report = EquivalenceReport(*verdicts, certs, agreement)
    if not agreement:
        raise TheoremViolationError(
            "equivalent properties disagree (engine bug): "
            + repr(report.to_json()))
    return report


# -- decomposition -------------------------------------------------------------

class NotRepresentableError(ConsistencyError):
    """Decomposition refused; run is_predictably_represented for the
    certificate."""


def decompose(rm: RiskMeasure, V: NumeraireVec, X: RandomVec) -> tuple:
    """Split X - rho_0(X) into one-step acceptable portfolio bets pi_t with
    sum_t pi_t.V = X - rho_0(X), by exact LP feasibility in generator
    coordinates (variables ordered by (t, generator); Bland's rule makes
    the returned vertex deterministic)."""
    space = rm.space
    if not is_predictably_represented(rm, V).representable:
        raise NotRepresentableError(
            "the acceptance cone is not predictably represented by these "
            "numeraires")
    r0 = rho(rm, 0, X)
    target = tuple(X.values[a][0] - r0.values[a][0] for a in range(space.n))
    gens_by_t = [k_cone(rm, V, t).generators for t in range(space.horizon)]
    flat = [(t, g) for t in range(space.horizon) for g in gens_by_t[t]]
    vmap = value_map(V)
    images = [vmap.apply(g) for _, g in flat]
    eqs = [(tuple(img[a] for img in images), target[a])
           for a in range(space.n)]
    res = lp_solve([mpq(0)] * len(flat), eqs=eqs, nonneg=True)
    if res.status != OPTIMAL:
        raise ConsistencyError(
            f"decomposition LP ended {res.status} despite representability")
    pis = []
    for t in range(space.horizon):
        pi = [mpq(0)] * V.portfolio_dim
        for lam, (s, g) in zip(res.point, flat):
            if s == t and sign(lam) != 0:
                pi = [p + lam * gi for p, gi in zip(pi, g)]
        pis.append(tuple(pi))
    return tuple(pis)


def validate_decomposition(rm: RiskMeasure, V: NumeraireVec, X: RandomVec,
                           pis) -> bool:
    """Independent check: every pi_t in K_t and the values sum exactly to
    X - rho_0(X)."""
    space = rm.space
    if len(pis) != space.horizon:
        return False
    for t, pi in enumerate(pis):
        if not cone_member(k_cone(rm, V, t), tuple(pi)):
            return False
    r0 = rho(rm, 0, X)
    total = [mpq(0)] * space.n
    for pi in pis:
        val = portfolio_value(V, pi)
        total = [s + val.values[a][0] for a, s in enumerate(total)]
    return all(sign(total[a] - (X.values[a][0] - r0.values[a][0])) == 0
               for a in range(space.n))
