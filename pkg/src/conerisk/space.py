"""Finite filtered probability spaces, random vectors and stopping times."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

from gmpy2 import mpq

from .scalars import parse_scalar, scalar_to_json, sign

DEFAULT_ENUMERATION_CAP = 10 ** 6


class SpaceError(ValueError):
    pass


class EnumerationCapExceeded(RuntimeError):
    pass


def _canonical_partition(blocks) -> tuple:
    blocks = tuple(tuple(sorted(b)) for b in blocks)
    return tuple(sorted(blocks, key=lambda b: b[0]))


def _refines(fine, coarse) -> bool:
    owner = {}
    for i, b in enumerate(coarse):
        for a in b:
            owner[a] = i
    return all(len({owner[a] for a in b}) == 1 for b in fine)


@dataclass(frozen=True)
class FilteredSpace:
    """Atoms 0..n-1 with exact positive probabilities and a refining chain
    of partitions indexed by t = 0..T."""

    probs: tuple
    partitions: tuple  # partitions[t] = tuple of blocks, each a tuple of atoms

    def __post_init__(self):
        n = len(self.probs)
        if n == 0:
            raise SpaceError("need at least one atom")
        if any(sign(p) <= 0 for p in self.probs):
            raise SpaceError("every atom must have strictly positive probability")
        if sum(self.probs, mpq(0)) != 1:
            raise SpaceError("probabilities must sum to 1")
        parts = tuple(_canonical_partition(p) for p in self.partitions)
        object.__setattr__(self, "partitions", parts)
        universe = tuple(range(n))
        for t, part in enumerate(parts):
            if tuple(sorted(a for b in part for a in b)) != universe:
                raise SpaceError(f"partition at t={t} is not a partition of the atoms")
            if t > 0 and not _refines(parts[t], parts[t - 1]):
                raise SpaceError(f"partition at t={t} does not refine t={t - 1}")
        if parts[-1] != tuple((a,) for a in universe):
            raise SpaceError("the final partition must be discrete")

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def horizon(self) -> int:
        return len(self.partitions) - 1

    def blocks(self, t):
        return self.partitions[t]

    def block_mass(self, block, weights=None) -> mpq:
        w = self.probs if weights is None else weights
        return sum((w[a] for a in block), mpq(0))


@dataclass(frozen=True)
class RandomVec:
    """An (atoms x width) table of exact scalars.

    `mask`, when present, marks atoms on which the value is undefined
    (True = defined); it arises from conditional expectations on blocks of
    zero mass and is never replaced by a fabricated number.
    """

    values: tuple  # n rows, each a tuple of `width` scalars
    mask: Optional[tuple] = None  # per-atom; None means everywhere defined

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(tuple(r) for r in self.values))
        if not self.values or not self.values[0]:
            raise SpaceError("RandomVec needs at least one atom and one column")
        w = len(self.values[0])
        if any(len(r) != w for r in self.values):
            raise SpaceError("ragged RandomVec")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def width(self) -> int:
        return len(self.values[0])

    def defined(self, atom) -> bool:
        return self.mask is None or self.mask[atom]

    def column(self, j) -> tuple:
        return tuple(r[j] for r in self.values)

    @staticmethod
    def scalar(values, mask=None) -> "RandomVec":
        return RandomVec(tuple((v,) for v in values), mask)

    @staticmethod
    def constant(n, scalars) -> "RandomVec":
        try:
            row = tuple(scalars)
        except TypeError:
            row = (scalars,)
        return RandomVec(tuple(row for _ in range(n)))

    def equal_where_defined(self, other: "RandomVec") -> bool:
        """Exact equality with the mask convention: blocks undefined on both
        sides compare equal, one-sided masks compare unequal."""
        if self.n != other.n or self.width != other.width:
            return False
        for a in range(self.n):
            da, db = self.defined(a), other.defined(a)
            if da != db:
                return False
            if da and self.values[a] != other.values[a]:
                return False
        return True


@dataclass(frozen=True)
class Measure:
    """A measure on the atoms; probability measures have mass one."""

    weights: tuple

    def __post_init__(self):
        if any(sign(w) < 0 for w in self.weights):
            raise SpaceError("measure weights must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.weights)

    def mass(self) -> mpq:
        return sum(self.weights, mpq(0))

    def density(self, space: FilteredSpace) -> tuple:
        """Radon-Nikodym derivative w.r.t. the reference measure."""
        return tuple(q / p for q, p in zip(self.weights, space.probs))


@dataclass(frozen=True)
class StoppingTime:
    """An adapted random time tau: atom -> {0..T}."""

    values: tuple
    space: FilteredSpace = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.space is not None:
            tau = self.values
            T = self.space.horizon
            if any(not (0 <= v <= T) for v in tau):
                raise SpaceError("stopping time values out of range")
            for t in range(T + 1):
                for block in self.space.blocks(t):
                    hits = {tau[a] <= t for a in block}
                    if len(hits) > 1:
                        raise SpaceError(f"{{tau<={t}}} is not F_{t}-measurable")


def cond_expect(space: FilteredSpace, X: RandomVec, t: int,
                under: Optional[Measure] = None) -> RandomVec:
    """Columnwise blockwise average of X over partitions[t], weighted by
    `under` (default: the reference measure).  Blocks of zero mass are
    masked, never given a fabricated value."""
    if X.n != space.n:
        raise SpaceError("atom count mismatch")
    weights = space.probs if under is None else under.weights
    n, w = X.n, X.width
    out = [None] * n
    mask = [True] * n
    for block in space.blocks(t):
        m = space.block_mass(block, weights)
        if m == 0:
            for a in block:
                out[a] = tuple(mpq(0) for _ in range(w))
                mask[a] = False
            continue
        row = tuple(
            sum((weights[a] * X.values[a][j] for a in block), mpq(0)) / m
            for j in range(w)
        )
        for a in block:
            out[a] = row
    if X.mask is not None:
        raise SpaceError("cannot condition an already-masked random vector")
    return RandomVec(tuple(out), None if all(mask) else tuple(mask))


def cond_expect_stopped(space: FilteredSpace, X: RandomVec, tau: StoppingTime,
                        under: Optional[Measure] = None) -> RandomVec:
    """E[X | F_tau]: on {tau = t} this is the time-t conditional expectation."""
    by_t = {}
    out = [None] * X.n
    mask = [True] * X.n
    for a, t in enumerate(tau.values):
        if t not in by_t:
            by_t[t] = cond_expect(space, X, t, under)
        ce = by_t[t]
        out[a] = ce.values[a]
        mask[a] = ce.defined(a)
    return RandomVec(tuple(out), None if all(mask) else tuple(mask))


def enumeration_cap() -> int:
    env = os.environ.get("CONERISK_CAP")
    return int(env) if env else DEFAULT_ENUMERATION_CAP


def count_stopping_times(space: FilteredSpace) -> int:
    T = space.horizon

    def count(t, block) -> int:
        if t == T:
            return 1
        children = [b for b in space.blocks(t + 1) if b[0] in block]
        prod = 1
        for c in children:
            prod *= count(t + 1, c)
        return 1 + prod

    total = 1
    for b in space.blocks(0):
        total *= count(0, b)
    return total


def enumerate_stopping_times(space: FilteredSpace, cap: Optional[int] = None):
    """Exhaustive, duplicate-free enumeration of adapted times atom -> {0..T}.

    Refuses when the count exceeds the cap (CONERISK_CAP env var or the
    default of 10^6)."""
    cap = enumeration_cap() if cap is None else cap
    total = count_stopping_times(space)
    if total > cap:
        raise EnumerationCapExceeded(
            f"{total} stopping times exceed the cap of {cap}; "
            "raise CONERISK_CAP or pass an explicit cap")
    T = space.horizon

    def per_block(t, block):
        # all assignments {atom: time} for atoms in `block`, given not stopped before t
        stop_now = [{a: t for a in block}]
        if t == T:
            return stop_now
        children = [b for b in space.blocks(t + 1) if b[0] in block]
        branches = [per_block(t + 1, c) for c in children]
        combined = [{}]
        for options in branches:
            combined = [{**acc, **opt} for acc in combined for opt in options]
        return stop_now + combined

    roots = [per_block(0, b) for b in space.blocks(0)]
    assignments = [{}]
    for options in roots:
        assignments = [{**acc, **opt} for acc in assignments for opt in options]
    out = []
    for m in assignments:
        out.append(StoppingTime(tuple(m[a] for a in range(space.n)), space))
    return out


def constant_stopping_times(space: FilteredSpace):
    return [StoppingTime(tuple(t for _ in range(space.n)), space)
            for t in range(space.horizon + 1)]


# -- JSON forms -----------------------------------------------------------

def space_to_json(space: FilteredSpace) -> dict:
    return {
        "atoms": space.n,
        "probs": [scalar_to_json(p) for p in space.probs],
        "filtration": [[list(b) for b in part] for part in space.partitions],
    }


def space_from_json(d: dict) -> FilteredSpace:
    probs = tuple(parse_scalar(p) for p in d["probs"])
    if len(probs) != d["atoms"]:
        raise SpaceError("atom count does not match probs")
    parts = tuple(tuple(tuple(b) for b in part) for part in d["filtration"])
    return FilteredSpace(probs, parts)
