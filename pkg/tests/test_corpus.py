"""Built-in scenarios and the seeded generator: expected verdicts,
determinism, and serialization."""

import pytest
from gmpy2 import mpq

from conerisk.consistency import theorem_main_report
from conerisk.corpus import (CorpusError, Lcg, ScenarioSpec, build_avar4,
                             build_haezendonck4, build_scenario, build_txcost,
                             corpus_names, random_scenario, scenario_from_json)
from conerisk.risk import set_member
from conerisk.scalars import Quad2
from conerisk.space import Measure
from conerisk.stability import vstability_witness_search


def test_corpus_names():
    assert corpus_names() == ("avar4", "haezendonck4", "txcost")
    with pytest.raises(CorpusError):
        build_scenario("nope")


def test_avar_expected_maps_match_checkers():
    for variant in ("paper", "unit"):
        spec = build_avar4(variant)
        rm = spec.risk_measure()
        rep = theorem_main_report(rm, spec.V)
        assert rep.time_consistent == spec.expected["time_consistent"]
        assert rep.representable == spec.expected["representable"]
        assert rep.dual_stable == spec.expected["dual_stable"]
        found = vstability_witness_search(rm, spec.V) is not None
        assert found == spec.expected["witness"]


def test_haezendonck_expected_witness():
    for variant in ("paper", "unit"):
        spec = build_haezendonck4(variant)
        found = vstability_witness_search(spec.risk_measure(), spec.V)
        assert (found is not None) == spec.expected["witness"]


def test_haezendonck_paper_numeraire_is_quad2():
    spec = build_haezendonck4("paper")
    v1 = spec.V.columns[1].values
    assert isinstance(v1[0][0], Quad2) and v1[0][0] == Quad2(1, 1)
    assert v1[1][0] == Quad2(1, 0)


def test_txcost_reference_and_tilts_are_feasible():
    for n in (4, 8):
        spec = build_txcost(n)
        for m in spec.rset.members:
            assert set_member(spec.rset, m)
        # the uniform product measure is the first stored member
        assert spec.rset.members[0].weights == tuple(
            mpq(1, n * n) for _ in range(n * n))


def test_txcost_rejects_unshipped_grid():
    with pytest.raises(CorpusError):
        build_txcost(5)
    with pytest.raises(CorpusError):
        build_txcost(4, lam=mpq(2))


def test_lcg_golden_and_determinism():
    a, b = Lcg(42), Lcg(42)
    seq = [a.next() for _ in range(4)]
    assert seq == [b.next() for _ in range(4)]
    assert seq[0] == (Lcg.MULT * 42 + Lcg.INC) % 2**64


def test_random_scenario_is_deterministic():
    for seed in (1, 7, 99):
        s1, s2 = random_scenario(seed), random_scenario(seed)
        assert s1.space.probs == s2.space.probs
        assert s1.space.partitions == s2.space.partitions
        assert all(c1.values == c2.values
                   for c1, c2 in zip(s1.V.columns, s2.V.columns))
        assert s1.rset.vertices == s2.rset.vertices


def test_random_scenario_shape_bounds():
    for seed in range(1, 30):
        spec = random_scenario(seed)
        assert spec.space.n <= 8
        assert spec.space.horizon <= 3
        assert spec.V.d <= 2
        assert len(spec.rset.vertices) <= 7
        # the strictly positive reference measure anchors the polytope
        assert spec.rset.vertices[-1].weights == spec.space.probs


def test_scenario_json_round_trip():
    for spec in (build_avar4("paper"), build_haezendonck4("paper"),
                 build_txcost(4), random_scenario(5)):
        back = scenario_from_json(spec.to_json())
        assert back.name == spec.name
        assert back.space.probs == spec.space.probs
        assert back.space.partitions == spec.space.partitions
        assert all(c1.values == c2.values
                   for c1, c2 in zip(back.V.columns, spec.V.columns))
        assert back.rset.kind == spec.rset.kind
        assert back.rset.vertices == spec.rset.vertices
        assert back.rset.ineq_rows == spec.rset.ineq_rows
        assert back.expected == spec.expected
