"""Exact polyhedral cones: double description, duals, sums, intersections,
linear images/pre-images, membership and equality with certificates.

A cone is {x : h.x <= 0 for all inequality rows h} and/or the conic hull of
its generators; lineality is carried as paired +/- generators.  All scalars
are exact (rationals or Q(sqrt(2)) elements).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from gmpy2 import gcd, mpq, mpz

from .scalars import Quad2, sign


class ConeError(ValueError):
    pass


# -- exact vector helpers ---------------------------------------------------

def vdot(u, v):
    acc = 0
    for a, b in zip(u, v):
        acc = acc + a * b
    return acc


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vscale(c, u):
    return tuple(c * a for a in u)


def vneg(u):
    return tuple(-a for a in u)


def is_zero_vec(u) -> bool:
    return all(sign(a) == 0 for a in u)


def _as_field(x):
    """Lift plain integers into the rational field (division-safe)."""
    return x if isinstance(x, Quad2) else mpq(x)


def canonical_ray(v) -> tuple:
    """Scale so the first nonzero coordinate has absolute value 1."""
    for a in v:
        s = sign(a)
        if s != 0:
            c = _as_field(a if s > 0 else -a)
            return tuple(_as_field(x) / c for x in v)
    return tuple(_as_field(x) for x in v)


def _integerize(v) -> tuple:
    """Primitive integer direction for all-rational vectors; other vectors
    are returned canonically scaled.  Used internally to keep double
    description arithmetic on integers."""
    if any(isinstance(a, Quad2) and a.b != 0 for a in v):
        return canonical_ray(v)
    vv = [mpq(a.a) if isinstance(a, Quad2) else mpq(a) for a in v]
    den = 1
    for a in vv:
        den = den * a.denominator // gcd(den, a.denominator)
    ints = [mpz(a * den) for a in vv]
    g = mpz(0)
    for a in ints:
        g = gcd(g, a)
    if g == 0:
        return tuple(ints)
    return tuple(a // g for a in ints)


def _unit(dim, i):
    v = [0] * dim
    v[i] = 1
    return tuple(v)


# -- double description -----------------------------------------------------

def _dedupe(vecs):
    seen = {}
    for v in vecs:
        seen.setdefault(tuple(canonical_ray(v)), v)
    return list(seen.values())


def dd_rays(ineq_rows: Sequence, dim: int):
    """Extreme rays and a lineality basis of {x : h.x <= 0 for all rows}.

    Returns (lines, rays); the cone is span(lines) + cone(rays) and the rays
    are extreme modulo the lineality space.  Insertion order: rows sorted by
    increasing nonzero count, for deterministic output."""
    if dim <= 0:
        raise ConeError("dimension must be positive")
    rows = [_integerize(h) for h in ineq_rows]
    rows = [h for h in _dedupe(rows) if not is_zero_vec(h)]
    rows.sort(key=lambda h: (sum(1 for a in h if sign(a) != 0),
                             tuple(str(a) for a in h)))
    lines = [_unit(dim, i) for i in range(dim)]
    rays = []   # list of [vec, zmask] with zmask a bitmask over processed rows
    processed = []

    def tightmask(vec):
        m = 0
        for k, h in enumerate(processed):
            if sign(vdot(h, vec)) == 0:
                m |= 1 << k
        return m

    for h in rows:
        crossing = [(l, vdot(h, l)) for l in lines]
        crossing = [(l, d) for l, d in crossing if sign(d) != 0]
        if crossing:
            l0, d0 = crossing[0]
            new_lines = []
            for l in lines:
                if l is l0:
                    continue
                d = vdot(h, l)
                new_lines.append(_integerize(vsub(vscale(d0, l), vscale(d, l0))))
            for r in rays:
                d = vdot(h, r[0])
                if sign(d) != 0:
                    r[0] = _integerize(vsub(vscale(d0, r[0]), vscale(d, l0)))
                    if sign(d0) < 0:
                        r[0] = vneg(r[0])
            r0 = vneg(l0) if sign(d0) > 0 else l0
            processed.append(h)
            lines = new_lines
            rays = [[r[0], tightmask(r[0])] for r in rays]
            rays.append([_integerize(r0), tightmask(r0)])
            continue
        k = len(processed)
        neg, zero, pos = [], [], []
        for r in rays:
            s = sign(vdot(h, r[0]))
            (neg if s < 0 else zero if s == 0 else pos).append(r)
        new = []
        for rp in pos:
            dp = vdot(h, rp[0])
            for rn in neg:
                common = rp[1] & rn[1]
                adjacent = True
                for r3 in rays:
                    if r3 is rp or r3 is rn:
                        continue
                    if common & r3[1] == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                dn = vdot(h, rn[0])
                combo = _integerize(vsub(vscale(dp, rn[0]), vscale(dn, rp[0])))
                if not is_zero_vec(combo):
                    new.append(combo)
        processed.append(h)
        for r in zero:
            r[1] |= 1 << k
        fresh = []
        seen = set()
        for v in new:
            key = tuple(canonical_ray(v))
            if key in seen:
                continue
            seen.add(key)
            fresh.append([v, tightmask(v)])
        rays = neg + zero + fresh
    return [canonical_ray(l) for l in lines], [canonical_ray(r[0]) for r in rays]


def generators_from_ineqs(ineqs, dim):
    lines, rays = dd_rays(ineqs, dim)
    gens = list(rays)
    for l in lines:
        gens.append(l)
        gens.append(canonical_ray(vneg(l)))
    return tuple(gens)


def ineqs_from_generators(gens, dim):
    # Minimal inequalities of cone(gens) are the extreme rays of its polar,
    # with the polar's lineality contributing +/- pairs (equality constraints).
    lines, rays = dd_rays(gens, dim)
    ineqs = list(rays)
    for l in lines:
        ineqs.append(l)
        ineqs.append(canonical_ray(vneg(l)))
    return tuple(ineqs)


# -- the cone type -----------------------------------------------------------

class PolyCone:
    """A convex polyhedral cone; at least one representation is present.
    Representations are completed and minimized lazily by dd_convert."""

    __slots__ = ("dim", "_gens", "_ineqs", "_minimal")

    def __init__(self, dim: int, gens=None, ineqs=None, _minimal=False):
        if gens is None and ineqs is None:
            raise ConeError("need generators or inequalities")
        self.dim = dim
        self._gens = None if gens is None else tuple(tuple(g) for g in gens)
        self._ineqs = None if ineqs is None else tuple(tuple(h) for h in ineqs)
        self._minimal = _minimal
        for rows in (self._gens, self._ineqs):
            if rows:
                for r in rows:
                    if len(r) != dim:
                        raise ConeError("vector length does not match dimension")

    @property
    def generators(self) -> tuple:
        if self._gens is None:
            self._complete()
        return self._gens

    @property
    def inequalities(self) -> tuple:
        if self._ineqs is None:
            self._complete()
        return self._ineqs

    def _complete(self):
        c = dd_convert(self)
        self._gens, self._ineqs = c._gens, c._ineqs
        self._minimal = True

    def __repr__(self):
        g = len(self._gens) if self._gens is not None else "?"
        h = len(self._ineqs) if self._ineqs is not None else "?"
        return f"PolyCone(dim={self.dim}, gens={g}, ineqs={h})"

    def dump(self) -> str:
        """Debug dump: one generator/inequality per line, stable ordering."""
        from .scalars import scalar_to_json
        c = dd_convert(self)

        def fmt(v):
            return " ".join(
                x if isinstance(x, str) else f'{x["a"]}+{x["b"]}r2'
                for x in (scalar_to_json(a) for a in v))

        lines = [f"dim {self.dim}"]
        for g in sorted(c.generators, key=fmt):
            lines.append("gen  " + fmt(g))
        for h in sorted(c.inequalities, key=fmt):
            lines.append("ineq " + fmt(h))
        return "\n".join(lines)


def dd_convert(C: PolyCone) -> PolyCone:
    """Return the cone with both representations present and minimal."""
    if C.dim <= 0:
        raise ConeError("dimension must be positive")
    if C._minimal and C._gens is not None and C._ineqs is not None:
        return C
    if C._ineqs is not None:
        gens = generators_from_ineqs(C._ineqs, C.dim)
        ineqs = ineqs_from_generators(gens, C.dim) if gens else C._ineqs
        if not gens:
            # the zero cone: every hyperplane through 0 is valid; keep a
            # spanning set of equalities
            ineqs = tuple(_unit(C.dim, i) for i in range(C.dim)) + tuple(
                vneg(_unit(C.dim, i)) for i in range(C.dim))
        out = PolyCone(C.dim, gens=gens, ineqs=ineqs, _minimal=True)
    else:
        gens = tuple(g for g in C._gens if not is_zero_vec(g))
        ineqs = ineqs_from_generators(gens, C.dim) if gens else None
        if not gens:
            ineqs = tuple(_unit(C.dim, i) for i in range(C.dim)) + tuple(
                vneg(_unit(C.dim, i)) for i in range(C.dim))
            out = PolyCone(C.dim, gens=(), ineqs=ineqs, _minimal=True)
        else:
            gens_min = generators_from_ineqs(ineqs, C.dim)
            out = PolyCone(C.dim, gens=gens_min, ineqs=ineqs, _minimal=True)
    return out


def full_cone(dim) -> PolyCone:
    gens = []
    for i in range(dim):
        gens.append(_unit(dim, i))
        gens.append(vneg(_unit(dim, i)))
    return PolyCone(dim, gens=gens, ineqs=())


def zero_cone(dim) -> PolyCone:
    ineqs = []
    for i in range(dim):
        ineqs.append(_unit(dim, i))
        ineqs.append(vneg(_unit(dim, i)))
    return PolyCone(dim, gens=(), ineqs=ineqs)


def nonpositive_orthant(dim) -> PolyCone:
    return PolyCone(dim, gens=[vneg(_unit(dim, i)) for i in range(dim)],
                    ineqs=[_unit(dim, i) for i in range(dim)])


def dual_cone(C: PolyCone, weights) -> PolyCone:
    """{z : sum_k w_k z_k x_k <= 0 for all x in C} under the weighted pairing
    realizing E[Z.X]; weights must be strictly positive."""
    if len(weights) != C.dim:
        raise ConeError("weight count does not match dimension")
    if any(sign(w) <= 0 for w in weights):
        raise ConeError("pairing weights must be strictly positive")
    rows = [tuple(w * g for w, g in zip(weights, g)) for g in C.generators]
    return PolyCone(C.dim, ineqs=rows)


def minkowski_sum(cones: Sequence[PolyCone]) -> PolyCone:
    """Finite-dimensional polyhedral sums are closed; no closure step needed."""
    cones = list(cones)
    if not cones:
        raise ConeError("empty sum")
    dim = cones[0].dim
    if any(c.dim != dim for c in cones):
        raise ConeError("dimension mismatch in sum")
    gens = []
    for c in cones:
        gens.extend(c.generators)
    return PolyCone(dim, gens=_dedupe(gens) or ())


def intersect(cones: Sequence[PolyCone]) -> PolyCone:
    cones = list(cones)
    if not cones:
        raise ConeError("empty intersection")
    dim = cones[0].dim
    if any(c.dim != dim for c in cones):
        raise ConeError("dimension mismatch in intersection")
    rows = []
    for c in cones:
        rows.extend(c.inequalities)
    return PolyCone(dim, ineqs=_dedupe(rows) or
                    tuple(vneg(_unit(dim, i)) for i in range(0)))


@dataclass(frozen=True)
class LinearMap:
    rows: tuple  # r x c table of scalars

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0])

    def apply(self, v):
        if len(v) != self.ncols:
            raise ConeError("vector length does not match map")
        return tuple(vdot(r, v) for r in self.rows)

    def compose_row(self, h):
        """Row vector h composed with the map: (h.L) so that h.(Lx) = (hL).x."""
        if len(h) != self.nrows:
            raise ConeError("row length does not match map")
        return tuple(vdot(h, tuple(r[c] for r in self.rows))
                     for c in range(self.ncols))


def linear_image(L: LinearMap, C: PolyCone) -> PolyCone:
    gens = [L.apply(g) for g in C.generators]
    gens = [g for g in gens if not is_zero_vec(g)]
    return PolyCone(L.nrows, gens=gens or (), ineqs=None if gens else
                    tuple(_unit(L.nrows, i) for i in range(L.nrows)) +
                    tuple(vneg(_unit(L.nrows, i)) for i in range(L.nrows)))


def linear_preimage(L: LinearMap, C: PolyCone) -> PolyCone:
    rows = [L.compose_row(h) for h in C.inequalities]
    rows = [r for r in rows if not is_zero_vec(r)]
    if not rows:
        return full_cone(L.ncols)
    return PolyCone(L.ncols, ineqs=rows)


def cone_member(C: PolyCone, x) -> bool:
    if len(x) != C.dim:
        raise ConeError("dimension mismatch")
    return all(sign(vdot(h, x)) <= 0 for h in C.inequalities)


@dataclass(frozen=True)
class ConeCertificate:
    """Why two cones differ: a generator of one side and the inequality of
    the other side it violates."""
    side: str  # "left" or "right": which cone owns the uncovered generator
    generator: tuple
    violated: tuple


def cone_equal(C1: PolyCone, C2: PolyCone):
    """Mutual inclusion of generators in the other's inequalities.
    Returns (bool, certificate-or-None)."""
    if C1.dim != C2.dim:
        raise ConeError("dimension mismatch")
    for g in C1.generators:
        for h in C2.inequalities:
            if sign(vdot(h, g)) > 0:
                return False, ConeCertificate("left", g, h)
    for g in C2.generators:
        for h in C1.inequalities:
            if sign(vdot(h, g)) > 0:
                return False, ConeCertificate("right", g, h)
    return True, None


def cone_contains(C1: PolyCone, C2: PolyCone) -> bool:
    """C2 subset of C1."""
    return all(cone_member(C1, g) for g in C2.generators)
