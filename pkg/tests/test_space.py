"""Filtered spaces, conditional expectation, stopping times."""

import pytest
from gmpy2 import mpq

from conerisk.corpus import build_avar4, random_scenario
from conerisk.space import (EnumerationCapExceeded, FilteredSpace, Measure,
                            RandomVec, SpaceError, StoppingTime, cond_expect,
                            constant_stopping_times, count_stopping_times,
                            enumerate_stopping_times, space_from_json,
                            space_to_json)


@pytest.fixture
def avar_space():
    return build_avar4("unit").space


def test_space_validation():
    with pytest.raises(SpaceError):
        FilteredSpace((mpq(1, 2), mpq(1, 2)),
                      (((0, 1),), ((0,),)))  # final partition not discrete
    with pytest.raises(SpaceError):
        FilteredSpace((mpq(1, 2), mpq(1, 4)),
                      (((0, 1),), ((0,), (1,))))  # mass not one
    with pytest.raises(SpaceError):
        FilteredSpace((mpq(0), mpq(1)),
                      (((0, 1),), ((0,), (1,))))  # zero-mass atom


def test_cond_expect_tower(avar_space):
    X = RandomVec.scalar((mpq(5), mpq(-3), mpq(2), mpq(7)))
    e1 = cond_expect(avar_space, X, 1)
    e0_direct = cond_expect(avar_space, X, 0)
    e0_tower = cond_expect(avar_space, e1, 0)
    assert e0_direct.values == e0_tower.values


def test_cond_expect_under_measure_masks_zero_blocks(avar_space):
    q = Measure((mpq(1, 2), mpq(1, 2), mpq(0), mpq(0)))
    X = RandomVec.scalar((mpq(1), mpq(-1), mpq(9), mpq(9)))
    e = cond_expect(avar_space, X, 1, under=q)
    assert e.values[0][0] == 0 and e.values[1][0] == 0
    assert not e.defined(2) and not e.defined(3)


def test_stopping_time_adaptedness(avar_space):
    StoppingTime((1, 1, 2, 2), avar_space)  # adapted: {tau<=1} = {0,1}
    with pytest.raises(SpaceError):
        StoppingTime((1, 2, 2, 2), avar_space)  # splits an F_1 block


def test_stopping_time_counts(avar_space):
    # one-period binary tree: stop at 0, or per-branch choices
    assert count_stopping_times(avar_space) == 5
    assert len(enumerate_stopping_times(avar_space)) == 5
    two = FilteredSpace((mpq(1, 2), mpq(1, 2)),
                        (((0, 1),), ((0,), (1,))))
    assert count_stopping_times(two) == 2
    three_deep = FilteredSpace(
        (mpq(1, 4), mpq(1, 4), mpq(1, 2)),
        (((0, 1, 2),), ((0, 1), (2,)), ((0,), (1,), (2,))))
    assert count_stopping_times(three_deep) == len(
        enumerate_stopping_times(three_deep))


def test_enumeration_distinct_and_adapted(avar_space):
    taus = enumerate_stopping_times(avar_space)
    assert len({t.values for t in taus}) == len(taus)


def test_enumeration_cap():
    space = random_scenario(3).space
    with pytest.raises(EnumerationCapExceeded):
        enumerate_stopping_times(space, cap=0)


def test_constant_stopping_times(avar_space):
    taus = constant_stopping_times(avar_space)
    assert [t.values for t in taus] == [(0,) * 4, (1,) * 4, (2,) * 4]


def test_json_round_trip(avar_space):
    back = space_from_json(space_to_json(avar_space))
    assert back == avar_space
