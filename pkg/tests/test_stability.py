"""Dual-cone stability: predictable pre-images, stable hulls, measure
pasting, and witness searches."""

import pytest
from gmpy2 import mpq

from conerisk.corpus import (Lcg, build_avar4, build_haezendonck4,
                             random_scenario)
from conerisk.cones import PolyCone, cone_equal, cone_member, dd_convert
from conerisk.market import unit_numeraire
from conerisk.space import (Measure, StoppingTime, cond_expect, RandomVec,
                            constant_stopping_times, enumerate_stopping_times)
from conerisk.stability import (DualCone, PastingWitness, StabilityError,
                                UndefinedPastingError, cond_expect_map,
                                crucial_claim_check, is_predictably_stable,
                                lifted_acceptance_dual, paste,
                                predictable_preimage, stable_hull,
                                vstability_witness_search)


def _random_dual(space, seed, components=1, ngens=4):
    rng = Lcg(seed)
    dim = components * space.n
    gens = []
    while len(gens) < ngens:
        g = tuple(mpq(rng.rand_int(0, 6)) for _ in range(dim))
        if any(x != 0 for x in g):
            gens.append(g)
    return DualCone(space, components, PolyCone(dim, gens=tuple(gens)))


def _cond_profile(space, z, t, components):
    """Blockwise conditional expectation of a flat density vector."""
    L = cond_expect_map(space, t, components)
    return tuple(L.apply(z))


def _in_conic_hull(gens, x):
    from conerisk.consistency import _conic_member
    return _conic_member(gens, x)


def test_preimage_contains_scaled_perturbed_members():
    """Independent construction: h (x) E[g|F_{t+1}] plus any zero-mean
    detail must land in the pre-image cone."""
    space = build_avar4("unit").space
    rng = Lcg(314)
    for seed in range(10):
        D = _random_dual(space, 1000 + seed)
        for t in range(space.horizon):
            pre = predictable_preimage(D, t)
            g = D.cone.generators[seed % len(D.cone.generators)]
            base = _cond_profile(space, g, t + 1, 1)
            # nonnegative F_t-measurable scale
            scale = []
            for block in space.blocks(t):
                c = mpq(rng.rand_int(0, 5))
                for _ in block:
                    scale.append(c)
            z = list(s * b for s, b in zip(scale, base))
            # add detail with zero conditional expectation on each
            # F_{t+1} block of size >= 2
            for block in space.blocks(t + 1):
                if len(block) >= 2:
                    a, b = block[0], block[1]
                    eps = mpq(rng.rand_int(-3, 3))
                    z[a] += eps / space.probs[a]
                    z[b] -= eps / space.probs[b]
            assert cone_member(pre, tuple(z))


def test_preimage_agrees_with_direct_conditional_test():
    """Membership in the pre-image cone must coincide with: the
    conditional expectation is a conic combination of blockwise cut-downs
    of conditional expectations of members of D."""
    space = build_avar4("unit").space
    rng = Lcg(2718)
    for seed in range(6):
        D = _random_dual(space, 2000 + seed)
        for t in range(space.horizon):
            pre = predictable_preimage(D, t)
            cut_gens = []
            for g in D.cone.generators:
                prof = _cond_profile(space, g, t + 1, 1)
                for block in space.blocks(t):
                    cut = tuple(prof[a] if a in block else mpq(0)
                                for a in range(space.n))
                    if any(x != 0 for x in cut):
                        cut_gens.append(cut)
            for _ in range(8):
                z = tuple(mpq(rng.rand_int(-4, 6)) for _ in range(space.n))
                direct = _in_conic_hull(
                    cut_gens, _cond_profile(space, z, t + 1, 1))
                assert cone_member(pre, z) == direct


def test_stable_hull_is_idempotent():
    space = build_avar4("unit").space
    for seed in range(8):
        D = _random_dual(space, 3000 + seed)
        hull = stable_hull(D)
        again = stable_hull(DualCone(space, 1, hull))
        ok, cert = cone_equal(hull, again)
        assert ok, cert


def test_hull_contains_cone_and_verdict_certificate():
    spec = build_avar4("unit")
    rm = spec.risk_measure()
    D = lifted_acceptance_dual(rm, spec.V)
    hull = stable_hull(D)
    for g in D.cone.generators:
        assert cone_member(hull, g)
    verdict = is_predictably_stable(D)
    assert not verdict.stable
    # the certificate is a hull element outside D
    assert cone_member(hull, verdict.certificate_density)
    assert not cone_member(D.cone, verdict.certificate_density)
    from conerisk.cones import vdot
    assert vdot(verdict.violated_inequality, verdict.certificate_density) > 0


def test_avar_market_numeraire_dual_is_stable():
    spec = build_avar4("paper")
    rm = spec.risk_measure()
    D = lifted_acceptance_dual(rm, spec.V)
    assert is_predictably_stable(D).stable


def test_paste_self_and_terminal_identities():
    spec = build_avar4("unit")
    space = spec.space
    Q = Measure((mpq(1, 2), mpq(1, 4), mpq(1, 8), mpq(1, 8)))
    W = Measure((mpq(1, 10), mpq(2, 10), mpq(3, 10), mpq(4, 10)))
    for tau in enumerate_stopping_times(space):
        assert paste(space, Q, Q, tau).weights == Q.weights
    T = space.horizon
    tau_T = StoppingTime((T,) * 4, space)
    assert paste(space, Q, W, tau_T).weights == Q.weights
    tau_0 = StoppingTime((0,) * 4, space)
    assert paste(space, Q, W, tau_0).weights == W.weights


def test_paste_preserves_mass_exactly():
    space = build_avar4("unit").space
    rng = Lcg(99)
    for _ in range(40):
        qs = [mpq(rng.rand_int(0, 5)) for _ in range(4)]
        ws = [mpq(rng.rand_int(1, 5)) for _ in range(4)]
        if sum(qs) == 0:
            continue
        Q = Measure(tuple(q / sum(qs) for q in qs))
        W = Measure(tuple(w / sum(ws) for w in ws))
        for tau in enumerate_stopping_times(space):
            assert paste(space, Q, W, tau).mass() == Q.mass()


def test_paste_undefined_raises():
    space = build_avar4("unit").space
    Q = Measure((mpq(1, 2), mpq(1, 2), mpq(0), mpq(0)))
    W = Measure((mpq(0), mpq(0), mpq(1, 2), mpq(1, 2)))
    tau = StoppingTime((1, 1, 1, 1), space)
    with pytest.raises(UndefinedPastingError):
        paste(space, Q, W, tau)
    # a donor charging every stopped block is always usable
    U = Measure((mpq(1, 4),) * 4)
    got = paste(space, Q, U, tau)
    assert got.weights == (mpq(1, 2), mpq(1, 2), mpq(0), mpq(0))
    assert got.mass() == 1


def test_stable_hull_contains_all_vertex_pastings():
    """m-stability of the hull: pasting any two representing vertices at
    any stopping time yields a density inside the hull."""
    spec = build_avar4("unit")
    rm = spec.risk_measure()
    space = spec.space
    D = lifted_acceptance_dual(rm, unit_numeraire(space))
    hull = stable_hull(D)
    for tau in enumerate_stopping_times(space):
        for Q in rm.vertex_list():
            for W in rm.vertex_list():
                try:
                    pq = paste(space, Q, W, tau)
                except UndefinedPastingError:
                    continue
                dens = tuple(pq.weights[a] / space.probs[a]
                             for a in range(space.n))
                assert cone_member(hull, dens)


def test_witness_search_golden():
    # expected-shortfall market, unit numeraire: the known failing pasting
    spec = build_avar4("unit")
    rm = spec.risk_measure()
    w = vstability_witness_search(rm, unit_numeraire(spec.space))
    assert w is not None
    assert w.pasted.weights == (mpq(1), mpq(0), mpq(0), mpq(0))
    j = w.to_json()
    assert set(j) == {"tau", "Q", "Qprime", "pasted", "violated"}
    # the stated market numeraire removes every admissible pasting
    spec_p = build_avar4("paper")
    assert vstability_witness_search(spec_p.risk_measure(), spec_p.V) is None


def test_witness_search_haezendonck():
    spec = build_haezendonck4("unit")
    w = vstability_witness_search(spec.risk_measure(), spec.V)
    assert w is not None
    assert w.pasted.weights == (mpq(1), mpq(0), mpq(0), mpq(0))
    assert "1/2" in w.violated
    spec_p = build_haezendonck4("paper")
    assert vstability_witness_search(spec_p.risk_measure(), spec_p.V) is None


def test_crucial_claim_on_corpus_and_random():
    for build in (lambda: build_avar4("unit"), lambda: build_avar4("paper")):
        spec = build()
        rm = spec.risk_measure()
        for t in range(spec.space.horizon):
            rep = crucial_claim_check(rm, spec.V, t)
            assert rep.holds, rep.note
    for seed in (21, 22):
        sc = random_scenario(seed)
        rm = sc.risk_measure()
        for t in range(sc.space.horizon):
            rep = crucial_claim_check(rm, sc.V, t)
            assert rep.holds, rep.note


def test_dual_cone_dimension_check():
    space = build_avar4("unit").space
    with pytest.raises(StabilityError):
        DualCone(space, 2, PolyCone(4, gens=((mpq(1),) * 4,)))
