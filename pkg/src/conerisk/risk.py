"""Representing sets, conditional risk evaluation and acceptance cones."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from gmpy2 import mpq

from .cones import PolyCone, dd_convert, vdot
from .scalars import parse_scalar, scalar_to_json, sign
from .simplex import OPTIMAL, lp_solve
from .space import FilteredSpace, Measure, RandomVec, SpaceError, cond_expect

POLYTOPE = "polytope"
ORACLE = "oracle"

VERTEX_ENUM_LIMIT = 12  # atoms; beyond this an H-form set stays vertex-free


class RiskError(ValueError):
    pass


class UnsupportedEvaluation(RiskError):
    """Raised when an operation needs a polytope vertex list that the
    representing set cannot provide."""


@dataclass
class RepresentingSet:
    """The dual object Q.

    polytope kind: an explicit vertex list and/or inequality rows
    (coeffs.q <= rhs, on top of the implicit probability simplex).
    oracle kind: the quadratic ball {sum_w q_w^2 <= c} with a finite list
    of member measures used by witness searches.
    """

    kind: str
    vertices: tuple = ()          # tuple of Measure
    ineq_rows: tuple = ()         # tuple of (coeffs, rhs)
    ball_bound: Optional[object] = None  # c in sum q^2 <= c
    members: tuple = ()           # finite member list for searches (oracle
                                  # kind, or H-form polytopes)

    def __post_init__(self):
        if self.kind not in (POLYTOPE, ORACLE):
            raise RiskError(f"unknown representing-set kind {self.kind!r}")
        self.vertices = tuple(self.vertices)
        self.ineq_rows = tuple((tuple(r), b) for r, b in self.ineq_rows)
        self.members = tuple(self.members)
        if self.kind == ORACLE and self.ball_bound is None:
            raise RiskError("oracle kind needs the quadratic bound")
        if self.kind == POLYTOPE and not self.vertices and not self.ineq_rows:
            raise RiskError("polytope kind needs vertices or inequalities")
        for v in self.vertices + self.members:
            if v.mass() != 1:
                raise RiskError("representing-set members must be probability measures")

    def search_members(self) -> tuple:
        if self.kind == ORACLE:
            return self.members
        return self.vertices if self.vertices else self.members

    def has_vertices(self) -> bool:
        return self.kind == POLYTOPE and bool(self.vertices)


def oracle_member(rset: RepresentingSet, q: Measure) -> bool:
    """Exact membership of a probability measure in the quadratic ball."""
    if rset.kind != ORACLE:
        raise RiskError("oracle_member needs an oracle-kind set")
    total = sum((w * w for w in q.weights), mpq(0))
    return sign(total - rset.ball_bound) <= 0


def set_member(rset: RepresentingSet, q: Measure) -> bool:
    """Exact membership of a probability measure in the representing set."""
    if q.mass() != 1 or any(sign(w) < 0 for w in q.weights):
        return False
    if rset.kind == ORACLE:
        return oracle_member(rset, q)
    if rset.ineq_rows:
        return all(sign(vdot(row, q.weights) - rhs) <= 0
                   for row, rhs in rset.ineq_rows)
    # convex-hull membership by exact LP feasibility
    n = q.n
    k = len(rset.vertices)
    eqs = [(tuple(v.weights[a] for v in rset.vertices), q.weights[a])
           for a in range(n)]
    eqs.append((tuple(mpq(1) for _ in range(k)), mpq(1)))
    res = lp_solve([mpq(0)] * k, eqs=eqs, nonneg=True)
    return res.status == OPTIMAL


def violation_note(rset: RepresentingSet, q: Measure) -> str:
    if rset.kind == ORACLE:
        total = sum((w * w for w in q.weights), mpq(0))
        return f"sum of squared masses {total} > {rset.ball_bound}"
    if rset.ineq_rows:
        for row, rhs in rset.ineq_rows:
            val = vdot(row, q.weights)
            if sign(val - rhs) > 0:
                return f"constraint value {val} > {rhs}"
    return "not in the convex hull of the vertex list"


def enumerate_polytope_vertices(space: FilteredSpace,
                                rset: RepresentingSet) -> tuple:
    """Vertex list of an H-form measure polytope via double description on
    the homogenized cone.  Refused above VERTEX_ENUM_LIMIT atoms."""
    n = space.n
    if n > VERTEX_ENUM_LIMIT:
        raise UnsupportedEvaluation(
            f"vertex enumeration refused for {n} atoms (> {VERTEX_ENUM_LIMIT})")
    rows = []
    for coeffs, rhs in rset.ineq_rows:
        rows.append(tuple(c - rhs for c in coeffs))  # homogenize with sum(q)
    for a in range(n):
        rows.append(tuple(mpq(-1) if b == a else mpq(0) for b in range(n)))
    cone = dd_convert(PolyCone(n, ineqs=rows))
    verts = []
    for g in cone.generators:
        total = sum(g, mpq(0))
        if sign(total) <= 0:
            continue  # recession direction of the simplex slice (none expected)
        verts.append(Measure(tuple(x / total for x in g)))
    return tuple(verts)


@dataclass
class RiskMeasure:
    """A dynamic coherent risk measure: one representing set for all t."""

    space: FilteredSpace
    rset: RepresentingSet
    _acc_cache: dict = field(default_factory=dict, repr=False, compare=False)
    _vertex_cache: Optional[tuple] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self._has_positive_member():
            raise RiskError(
                "representing set needs a member charging every atom")

    def _has_positive_member(self) -> bool:
        for m in self.rset.vertices + self.rset.members:
            if all(sign(w) > 0 for w in m.weights):
                return True
        if self.rset.kind == ORACLE:
            return False
        if self.rset.ineq_rows:
            return set_member(self.rset, Measure(self.space.probs))
        return False

    def vertex_list(self) -> tuple:
        if self.rset.has_vertices():
            return self.rset.vertices
        if self.rset.kind != POLYTOPE:
            raise UnsupportedEvaluation(
                "oracle representing sets support only witness checks")
        if self._vertex_cache is None:
            self._vertex_cache = enumerate_polytope_vertices(self.space, self.rset)
        return self._vertex_cache


def _block_average(q: Measure, block, X: RandomVec, j=0):
    mass = sum((q.weights[a] for a in block), mpq(0))
    if sign(mass) == 0:
        return None
    return sum((q.weights[a] * X.values[a][j] for a in block), mpq(0)) / mass


def _rho_block_lp(rm: RiskMeasure, block, X: RandomVec):
    """sup over the H-form polytope of the conditional block average, by the
    exact Charnes-Cooper transformation of the linear-fractional program."""
    n = rm.space.n
    # variables: u_0..u_{n-1}, s
    obj = [X.values[a][0] if a in block else mpq(0) for a in range(n)]
    obj.append(mpq(0))
    ineqs = []
    for coeffs, rhs in rm.rset.ineq_rows:
        ineqs.append((tuple(coeffs) + (-rhs,), mpq(0)))
    eqs = [
        (tuple(mpq(1) for _ in range(n)) + (mpq(-1),), mpq(0)),  # sum u = s
        (tuple(mpq(1) if a in block else mpq(0) for a in range(n)) + (mpq(0),),
         mpq(1)),                                                # block mass = 1
    ]
    res = lp_solve(obj, ineqs=ineqs, eqs=eqs, nonneg=True)
    if res.status != OPTIMAL:
        raise RiskError(f"block evaluation LP ended {res.status}")
    return res.value


def rho(rm: RiskMeasure, t: int, X: RandomVec) -> RandomVec:
    """Conditional risk: blockwise sup of conditional expectations over the
    representing set.  Vertices with zero block mass are skipped (their
    contribution is dominated along edges by charging vertices)."""
    if X.width != 1:
        raise RiskError("rho evaluates scalar claims (width 1)")
    if X.n != rm.space.n:
        raise RiskError("claim is on the wrong space")
    space = rm.space
    out = [None] * space.n
    use_vertices = rm.rset.has_vertices() or rm.rset.kind == ORACLE
    for block in space.blocks(t):
        if len(block) == 1:
            # conditional expectation on a singleton is the value itself
            # for every charging measure, and the construction guarantees
            # a member charging every atom
            out[block[0]] = (X.values[block[0]][0],)
            continue
        if use_vertices:
            best = None
            for q in rm.vertex_list():
                val = _block_average(q, set(block), X)
                if val is None:
                    continue
                if best is None or sign(val - best) > 0:
                    best = val
            if best is None:
                raise RiskError(
                    f"no representing measure charges block {block}")
        else:
            best = _rho_block_lp(rm, set(block), X)
        for a in block:
            out[a] = (best,)
    return RandomVec(tuple(out))


def acceptance_cone(rm: RiskMeasure, t: int) -> PolyCone:
    """A_t = {X : rho_t(X) <= 0} as an exact H-rep cone in claim space, one
    inequality per (vertex, block) pair, pruned to a minimal representation."""
    if t in rm._acc_cache:
        return rm._acc_cache[t]
    space = rm.space
    n = space.n
    rows = []
    for q in rm.vertex_list():
        for block in space.blocks(t):
            row = tuple(q.weights[a] if a in block else mpq(0) for a in range(n))
            if any(sign(x) != 0 for x in row):
                rows.append(row)
    cone = dd_convert(PolyCone(n, ineqs=rows))
    rm._acc_cache[t] = cone
    return cone


# -- coherence axioms as executable properties -------------------------------

@dataclass(frozen=True)
class AxiomResult:
    axiom: str
    passed: bool
    counterexample: Optional[str] = None


@dataclass(frozen=True)
class CoherenceReport:
    results: tuple

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)


def _vec_le(u: RandomVec, v: RandomVec) -> bool:
    return all(sign(a[0] - b[0]) <= 0 for a, b in zip(u.values, v.values))


def coherence_suite(rm: RiskMeasure, sample_count: int, seed: int) -> CoherenceReport:
    """Evaluate the coherence axioms on seeded random samples at every t,
    with exact equalities and inequalities."""
    from .corpus import Lcg  # deterministic generator shared across the suite

    rng = Lcg(seed)
    space = rm.space
    n = space.n

    def rand_claim():
        return RandomVec.scalar(tuple(rng.rand_rat(-4, 4) for _ in range(n)))

    def rand_measurable(t, nonnegative=False):
        vals = [None] * n
        lo = 0 if nonnegative else -4
        for block in space.blocks(t):
            c = rng.rand_rat(lo, 4)
            for a in block:
                vals[a] = c
        return RandomVec.scalar(tuple(vals))

    def rand_unit_measurable(t):
        vals = [None] * n
        for block in space.blocks(t):
            c = rng.rand_rat(0, 1)
            for a in block:
                vals[a] = c
        return RandomVec.scalar(tuple(vals))

    checks = {
        "cash_invariance": [],
        "monotonicity": [],
        "conditional_convexity": [],
        "normalisation": [],
        "positive_homogeneity": [],
    }
    for t in range(space.horizon + 1):
        zero = RandomVec.scalar(tuple(mpq(0) for _ in range(n)))
        rz = rho(rm, t, zero)
        checks["normalisation"].append(
            (all(v[0] == 0 for v in rz.values), f"t={t} rho(0)={rz.values}"))
        for _ in range(sample_count):
            X = rand_claim()
            Y = rand_claim()
            m = rand_measurable(t)
            lam = rand_measurable(t, nonnegative=True)
            mix = rand_unit_measurable(t)

            shifted = RandomVec.scalar(
                tuple(X.values[a][0] + m.values[a][0] for a in range(n)))
            lhs = rho(rm, t, shifted)
            rx = rho(rm, t, X)
            ok = all(lhs.values[a][0] == rx.values[a][0] + m.values[a][0]
                     for a in range(n))
            checks["cash_invariance"].append((ok, f"t={t} X={X.values} m={m.values}"))

            smaller = RandomVec.scalar(
                tuple(X.values[a][0] - abs(Y.values[a][0]) for a in range(n)))
            ok = _vec_le(rho(rm, t, smaller), rx)
            checks["monotonicity"].append((ok, f"t={t} X={X.values}"))

            blend = RandomVec.scalar(tuple(
                mix.values[a][0] * X.values[a][0]
                + (1 - mix.values[a][0]) * Y.values[a][0] for a in range(n)))
            ry = rho(rm, t, Y)
            bound = RandomVec.scalar(tuple(
                mix.values[a][0] * rx.values[a][0]
                + (1 - mix.values[a][0]) * ry.values[a][0] for a in range(n)))
            ok = _vec_le(rho(rm, t, blend), bound)
            checks["conditional_convexity"].append((ok, f"t={t}"))

            scaled = RandomVec.scalar(
                tuple(lam.values[a][0] * X.values[a][0] for a in range(n)))
            want = RandomVec.scalar(
                tuple(lam.values[a][0] * rx.values[a][0] for a in range(n)))
            ok = rho(rm, t, scaled).values == want.values
            checks["positive_homogeneity"].append((ok, f"t={t} lam={lam.values}"))

    results = []
    for axiom, runs in checks.items():
        bad = next((note for ok, note in runs if not ok), None)
        results.append(AxiomResult(axiom, bad is None, bad))
    return CoherenceReport(tuple(results))


# -- JSON forms ---------------------------------------------------------------

def rset_to_json(rset: RepresentingSet) -> dict:
    if rset.kind == ORACLE:
        return {
            "type": "quad_ball",
            "c": scalar_to_json(rset.ball_bound),
            "witnesses": [[scalar_to_json(w) for w in m.weights]
                          for m in rset.members],
        }
    out = {"type": "polytope"}
    if rset.vertices:
        out["vertices"] = [[scalar_to_json(w) for w in m.weights]
                           for m in rset.vertices]
    if rset.ineq_rows:
        out["ineqs"] = [{"coeffs": [scalar_to_json(c) for c in row],
                         "rhs": scalar_to_json(rhs)}
                        for row, rhs in rset.ineq_rows]
    if rset.members:
        out["members"] = [[scalar_to_json(w) for w in m.weights]
                          for m in rset.members]
    return out


def rset_from_json(d: dict) -> RepresentingSet:
    kind = d.get("type")
    if kind == "quad_ball":
        return RepresentingSet(
            ORACLE,
            ball_bound=parse_scalar(d["c"]),
            members=tuple(Measure(tuple(parse_scalar(w) for w in m))
                          for m in d.get("witnesses", ())))
    if kind == "polytope":
        verts = tuple(Measure(tuple(parse_scalar(w) for w in m))
                      for m in d.get("vertices", ()))
        rows = tuple((tuple(parse_scalar(c) for c in r["coeffs"]),
                      parse_scalar(r["rhs"])) for r in d.get("ineqs", ()))
        members = tuple(Measure(tuple(parse_scalar(w) for w in m))
                        for m in d.get("members", ()))
        return RepresentingSet(POLYTOPE, vertices=verts, ineq_rows=rows,
                               members=members)
    raise RiskError(f"unknown representing-set type {kind!r}")
