"""Built-in scenarios: a four-atom expected-shortfall market, a four-atom
Orlicz-premium oracle, a discretized transaction-cost market, and a seeded
random-scenario generator.  Also home of the deterministic random number
generator used by every seeded suite."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from gmpy2 import mpq

from .market import NumeraireVec, numeraire_from_json, numeraire_to_json
from .risk import (ORACLE, POLYTOPE, RepresentingSet, RiskMeasure,
                   rset_from_json, rset_to_json)
from .scalars import SQRT2, Quad2, rat, sign
from .space import FilteredSpace, Measure, RandomVec, space_from_json, space_to_json


class CorpusError(ValueError):
    pass


class Lcg:
    """64-bit linear congruential generator, fixed multiplier
    6364136223846793005 and increment 1442695040888963407 (mod 2^64).
    Everything seeded in this package flows through this class so outputs
    are reproducible across platforms and implementations."""

    MULT = 6364136223846793005
    INC = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next(self) -> int:
        self.state = (self.MULT * self.state + self.INC) & self.MASK
        return self.state

    def rand_below(self, n: int) -> int:
        return self.next() % n

    def rand_int(self, lo: int, hi: int) -> int:
        return lo + self.rand_below(hi - lo + 1)

    def rand_rat(self, lo: int, hi: int):
        den = self.rand_int(1, 8)
        return mpq(self.rand_int(lo * den, hi * den), den)


@dataclass
class ScenarioSpec:
    name: str
    space: FilteredSpace
    V: NumeraireVec
    rset: RepresentingSet
    expected: dict = field(default_factory=dict)

    def risk_measure(self) -> RiskMeasure:
        return RiskMeasure(self.space, self.rset)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "space": space_to_json(self.space),
            "numeraires": numeraire_to_json(self.V),
            "representing_set": rset_to_json(self.rset),
            "expected": self.expected,
        }


def scenario_from_json(d: dict) -> ScenarioSpec:
    space = space_from_json(d["space"])
    return ScenarioSpec(
        name=d.get("name", "unnamed"),
        space=space,
        V=numeraire_from_json(space, d["numeraires"]),
        rset=rset_from_json(d["representing_set"]),
        expected=d.get("expected", {}) or {},
    )


# -- four-atom expected-shortfall market ---------------------------------------

def _binary_two_period(probs) -> FilteredSpace:
    return FilteredSpace(
        probs=tuple(probs),
        partitions=(
            ((0, 1, 2, 3),),
            ((0, 1), (2, 3)),
            ((0,), (1,), (2,), (3,)),
        ),
    )


def build_avar4(numeraire: str = "paper") -> ScenarioSpec:
    """Expected shortfall at level 1/50 on four atoms with a binary
    two-period tree; representing set = measures with density at most 50,
    the hull of six explicit vertices."""
    space = _binary_two_period((rat(1, 100), rat(9, 100), rat(9, 100),
                                rat(81, 100)))
    half = rat(1, 2)
    verts = tuple(Measure(w) for w in (
        (half, half, 0, 0), (half, 0, half, 0), (half, 0, 0, half),
        (0, mpq(1), 0, 0), (0, 0, mpq(1), 0), (0, 0, 0, mpq(1)),
    ))
    rset = RepresentingSet(POLYTOPE, vertices=verts,
                           members=(Measure(space.probs),))
    one = RandomVec.constant(4, mpq(1))
    if numeraire == "paper":
        v1 = RandomVec.scalar((mpq(3), mpq(1), mpq(1), mpq(1)))
        V = NumeraireVec(space, (one, v1))
        expected = {"time_consistent": True, "representable": True,
                    "dual_stable": True, "witness": False}
    elif numeraire == "unit":
        V = NumeraireVec(space, (one,))
        expected = {"time_consistent": False, "representable": False,
                    "dual_stable": False, "witness": True}
    else:
        raise CorpusError(f"unknown numeraire variant {numeraire!r}")
    return ScenarioSpec(f"avar4-{numeraire}", space, V, rset, expected)


# -- four-atom Orlicz-premium oracle -------------------------------------------

def build_haezendonck4(numeraire: str = "paper") -> ScenarioSpec:
    """Quadratic Orlicz premium on four uniform atoms: the representing
    set is the quadratic ball {sum q_i^2 <= 1/2}, handled through the
    membership oracle with a finite witness list."""
    q = rat(1, 4)
    space = _binary_two_period((q, q, q, q))
    half = rat(1, 2)
    members = (
        Measure((q, q, q, q)),
        Measure((half, half, 0, 0)),
        Measure((half, 0, half, 0)),
    )
    rset = RepresentingSet(ORACLE, ball_bound=half, members=members)
    one = RandomVec.constant(4, mpq(1))
    if numeraire == "paper":
        w = Quad2(1, 1)   # 1 + sqrt(2)
        v1 = RandomVec.scalar((w, Quad2(1, 0), Quad2(1, 0), Quad2(1, 0)))
        v2 = RandomVec.scalar((Quad2(1, 0), Quad2(1, 0), w, Quad2(1, 0)))
        V = NumeraireVec(space, (one, v1, v2))
        expected = {"witness": False}
    elif numeraire == "unit":
        V = NumeraireVec(space, (one,))
        expected = {"witness": True}
    else:
        raise CorpusError(f"unknown numeraire variant {numeraire!r}")
    return ScenarioSpec(f"haezendonck4-{numeraire}", space, V, rset, expected)


# -- discretized transaction-cost market ---------------------------------------

def _load_grid(n: int) -> tuple:
    data = json.loads(resources.files("conerisk.data")
                      .joinpath("txcost_grid.json").read_text())
    try:
        grid = data["grids"][str(n)]
    except KeyError:
        raise CorpusError(f"no frozen grid of size {n}") from None
    return tuple(mpq(s) for s in grid)


def build_txcost(n: int = 4, lam=None, M: int = 3) -> ScenarioSpec:
    """Two-period market with proportional transaction costs lam on a
    stock whose log returns take n frozen equal-probability values.  The
    representing set is the H-form polytope of measures pricing the stock
    within the bid-ask band globally and conditionally."""
    if M != 3:
        raise CorpusError("only the frozen M=3 grid is shipped")
    lam = rat(1, 10) if lam is None else lam
    if not (0 < lam < 1):
        raise CorpusError("transaction cost must be in (0,1)")
    eks = _load_grid(n)
    mean = sum(eks, mpq(0)) / n
    w = tuple(e / mean for e in eks)     # one-period price factors, mean 1
    natoms = n * n                       # atom (j, k) -> index j*n + k
    probs = tuple(mpq(1, natoms) for _ in range(natoms))
    partitions = (
        (tuple(range(natoms)),),
        tuple(tuple(range(j * n, (j + 1) * n)) for j in range(n)),
        tuple((a,) for a in range(natoms)),
    )
    space = FilteredSpace(probs, partitions)
    v1_vals = tuple((w[a // n] * w[a % n],) for a in range(natoms))
    V = NumeraireVec(space, (RandomVec.constant(natoms, mpq(1)),
                             RandomVec(v1_vals)))

    rows = []
    v1 = [v[0] for v in v1_vals]
    rows.append((tuple(v1), 1 + lam))
    rows.append((tuple(-x for x in v1), -(1 - lam)))
    for j in range(n):
        up = [mpq(0)] * natoms
        down = [mpq(0)] * natoms
        for k in range(n):
            up[j * n + k] = w[k] - (1 + lam)
            down[j * n + k] = (1 - lam) - w[k]
        rows.append((tuple(up), mpq(0)))
        rows.append((tuple(down), mpq(0)))

    members = _txcost_members(n, lam, w)
    rset = RepresentingSet(POLYTOPE, ineq_rows=tuple(rows), members=members)
    expected = {"rho0_v1": str(1 + lam), "witness": False}
    return ScenarioSpec(f"txcost-n{n}", space, V, rset, expected)


def _txcost_members(n: int, lam, w) -> tuple:
    """A few explicit measures in the band polytope: the reference product
    measure, a block-mass tilt, and a conditional tilt."""
    natoms = n * n
    ref = Measure(tuple(mpq(1, natoms) for _ in range(natoms)))

    # tilt block masses toward blocks with large w_j, keeping uniform
    # conditionals (conditional price stays 1, global price moves)
    s = sum(((wj - 1) * wj for wj in w), mpq(0)) / n
    caps = [lam / s]
    for wj in w:
        if sign(wj - 1) < 0:
            caps.append(mpq(1) / (1 - wj))
    eps = min(caps) / 2
    tilt_mass = Measure(tuple((1 + eps * (w[a // n] - 1)) / natoms
                              for a in range(natoms)))

    # tilt conditionals toward large w_k uniformly across blocks
    # (conditional price 1 + eta*s on every block, global price likewise)
    eta = eps
    tilt_cond = Measure(tuple((1 + eta * (w[a % n] - 1)) / natoms
                              for a in range(natoms)))
    return (ref, tilt_mass, tilt_cond)


# -- seeded random scenarios ----------------------------------------------------

def random_scenario(seed: int, max_depth: int = 3, max_branching: int = 2,
                    max_d: int = 2, max_vertices: int = 6) -> ScenarioSpec:
    """Deterministic scenario from a seed: a random refining tree with at
    most 8 atoms, random positive rational probabilities, random
    numeraires with entries in [1/4, 4], and a random vertex polytope that
    always contains the strictly positive reference measure."""
    rng = Lcg(seed)
    depth = rng.rand_int(1, max_depth)

    # grow a tree level by level under an 8-leaf budget: first the
    # branching structure, then atom ids at the deepest level
    total_leaves = 1
    shape = [1]
    children = []
    for lvl in range(depth):
        counts = []
        for _ in range(shape[-1]):
            budget = 8 - (total_leaves - 1)
            c = rng.rand_int(1, min(max_branching, max(1, budget)))
            counts.append(c)
            total_leaves += c - 1
        children.append(counts)
        shape.append(sum(counts))

    natoms = shape[-1]
    # leaves under each node, built bottom-up
    leaves_at = [[(a,) for a in range(natoms)]]
    for lvl in range(depth - 1, -1, -1):
        counts = children[lvl]
        below = leaves_at[0]
        here = []
        pos = 0
        for c in counts:
            merged = tuple(a for grp in below[pos:pos + c] for a in grp)
            here.append(merged)
            pos += c
        leaves_at.insert(0, here)
    partitions = tuple(tuple(level) for level in leaves_at)

    wts = [rng.rand_int(1, 9) for _ in range(natoms)]
    total = sum(wts)
    probs = tuple(mpq(x, total) for x in wts)
    space = FilteredSpace(probs, partitions)

    d = rng.rand_int(0, max_d)
    cols = [RandomVec.constant(natoms, mpq(1))]
    for _ in range(d):
        cols.append(RandomVec.scalar(
            tuple(mpq(rng.rand_int(1, 16), 4) for _ in range(natoms))))
    V = NumeraireVec(space, tuple(cols))

    nverts = rng.rand_int(1, max_vertices)
    verts = []
    for _ in range(nverts):
        raw = [mpq(rng.rand_int(0, 9)) for _ in range(natoms)]
        if all(sign(x) == 0 for x in raw):
            raw[0] = mpq(1)
        tot = sum(raw, mpq(0))
        verts.append(Measure(tuple(x / tot for x in raw)))
    verts.append(Measure(probs))  # strictly positive anchor
    rset = RepresentingSet(POLYTOPE, vertices=tuple(verts))
    return ScenarioSpec(f"random-{seed}", space, V, rset)


BUILDERS = {
    "avar4": build_avar4,
    "haezendonck4": build_haezendonck4,
    "txcost": build_txcost,
}


def corpus_names() -> tuple:
    return tuple(sorted(BUILDERS))


def build_scenario(name: str, numeraire: str = "paper", **kwargs) -> ScenarioSpec:
    if name not in BUILDERS:
        raise CorpusError(f"unknown corpus scenario {name!r}; "
                          f"known: {', '.join(corpus_names())}")
    if name == "txcost":
        return build_txcost(**kwargs)
    return BUILDERS[name](numeraire)
