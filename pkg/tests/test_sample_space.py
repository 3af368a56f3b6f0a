import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finitemar.errors import InvalidPointError, InvalidSpaceError
from finitemar.sample_space import (
    DataSpace,
    MissingnessPattern,
    PatternSet,
    Point,
    Variable,
    enumerate_events,
    event_for,
    merge,
    ob_equivalent,
    observable_event,
    omega,
    project_missing,
    project_observed,
)
from oracles import brute_classes

P = MissingnessPattern.parse


def binary(n):
    return DataSpace.from_level_counts([2] * n)


@pytest.mark.parametrize("y, r, expected", [
    ((3, 7), "10", (3,)),
    ((3, 7), "00", ()),
    ((5, 1, 2), "101", (5, 2)),
])
def test_project_observed(y, r, expected):
    assert project_observed(y, P(r)) == expected


@pytest.mark.parametrize("y, r, expected", [
    ((3, 7), "10", (7,)),
    ((3, 7), "11", ()),
    ((5, 1, 2), "101", (1,)),
])
def test_project_missing(y, r, expected):
    assert project_missing(y, P(r)) == expected


def test_projection_length_mismatch():
    with pytest.raises(InvalidPointError):
        project_observed((1, 2, 3), P("10"))
    with pytest.raises(InvalidPointError):
        project_missing((1,), P("10"))


@st.composite
def vector_and_pattern(draw):
    n = draw(st.integers(1, 6))
    y = tuple(draw(st.lists(st.integers(-5, 9), min_size=n, max_size=n)))
    bits = tuple(draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    return y, MissingnessPattern(bits)


@given(vector_and_pattern())
def test_projections_reassemble(vp):
    y, r = vp
    ob, mi = project_observed(y, r), project_missing(y, r)
    assert len(ob) + len(mi) == len(y)
    assert len(ob) == r.n_observed
    assert merge(ob, mi, r) == y


def test_variable_and_space_invariants():
    with pytest.raises(InvalidSpaceError):
        Variable("A", ())
    with pytest.raises(InvalidSpaceError):
        Variable("A", (0, 0))
    with pytest.raises(InvalidSpaceError):
        DataSpace((Variable("A", (0,)), Variable("A", (1,))))
    with pytest.raises(InvalidSpaceError):
        DataSpace(())
    assert DataSpace.from_level_counts([2, 3, 1]).size == 6


def test_pattern_set_puts_complete_first():
    ps = PatternSet.parse(["10", "00", "11"])
    assert [str(r) for r in ps] == ["11", "10", "00"]
    with pytest.raises(InvalidSpaceError):
        PatternSet.parse(["10", "00"])
    with pytest.raises(InvalidSpaceError):
        PatternSet.parse(["11", "10", "10"])
    with pytest.raises(InvalidSpaceError):
        PatternSet.parse(["11", "1"])


def test_observable_event_examples():
    space = binary(2)
    ps = PatternSet.parse(["11", "10", "00"])
    e = observable_event(space, ps, Point((0, 1), P("10")))
    assert set(e.members) == {Point((0, 0), P("10")), Point((0, 1), P("10"))}
    assert observable_event(space, ps, Point((0, 1), P("11"))).members == (Point((0, 1), P("11")),)
    e0 = observable_event(space, ps, Point((0, 1), P("00")))
    assert len(e0.members) == 4
    assert {m.y for m in e0.members} == set(space.points())


def test_observable_event_rejects_invalid_points():
    space = binary(2)
    ps = PatternSet.parse(["11", "10"])
    with pytest.raises(InvalidPointError):
        observable_event(space, ps, Point((0, 2), P("10")))
    with pytest.raises(InvalidPointError):
        observable_event(space, ps, Point((0, 1), P("01")))


def test_event_for_matches_observable_event():
    space = DataSpace.from_level_counts([2, 3])
    ps = PatternSet.parse(["11", "01"])
    e = event_for(space, ps, P("01"), {1: 2})
    assert e == observable_event(space, ps, Point((0, 2), P("01")))
    assert e.members == observable_event(space, ps, Point((1, 2), P("01"))).members
    with pytest.raises(InvalidPointError):
        event_for(space, ps, P("01"), {0: 1})


def test_enumerate_events_examples():
    one = DataSpace.from_level_counts([2])
    evs = enumerate_events(one, PatternSet.parse(["1", "0"]))
    assert [set(e.members) for e in evs] == [
        {Point((0,), P("1"))},
        {Point((1,), P("1"))},
        {Point((0,), P("0")), Point((1,), P("0"))},
    ]
    two = binary(2)
    assert [len(e) for e in enumerate_events(two, PatternSet.parse(["11"]))] == [1, 1, 1, 1]
    assert len(enumerate_events(two, PatternSet.parse(["11", "10"]))) == 6


@pytest.mark.parametrize("counts, pats", [
    ([2, 2], ["11", "10", "01", "00"]),
    ([3, 1, 2], ["111", "101", "000", "011"]),
    ([2, 3, 2], ["111", "100", "010"]),
    ([4], ["1", "0"]),
])
def test_events_equal_brute_force_classes(counts, pats):
    space = DataSpace.from_level_counts(counts)
    ps = PatternSet.parse(pats)
    ours = {frozenset((m.y, m.r.bits) for m in e.members) for e in enumerate_events(space, ps)}
    theirs = set(brute_classes([v.levels for v in space.variables], [r.bits for r in ps]))
    assert ours == theirs


def test_event_member_count_is_product_of_missing_levels():
    space = DataSpace.from_level_counts([2, 3, 4])
    ps = PatternSet.parse(["111", "100", "010", "000"])
    for e in enumerate_events(space, ps):
        expected = 1
        for i in e.pattern.missing:
            expected *= len(space.variables[i].levels)
        assert len(e.members) == expected
        assert all(m in e for m in e.members)


@pytest.mark.parametrize("a, b, expected", [
    (((0, 0), "10"), ((0, 1), "10"), True),
    (((0, 0), "10"), ((1, 0), "10"), False),
    (((0, 0), "10"), ((0, 0), "11"), False),
])
def test_ob_equivalent_examples(a, b, expected):
    assert ob_equivalent(Point(a[0], P(a[1])), Point(b[0], P(b[1]))) is expected


def test_ob_equivalent_arity_mismatch():
    with pytest.raises(InvalidPointError):
        ob_equivalent(Point((0,), P("1")), Point((0, 1), P("11")))


@st.composite
def point_triples(draw):
    n = draw(st.integers(1, 3))
    pats = [MissingnessPattern(tuple(draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))))
            for _ in range(2)]

    def point():
        y = tuple(draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
        return Point(y, draw(st.sampled_from(pats)))

    return point(), point(), point()


@settings(max_examples=300)
@given(point_triples())
def test_ob_equivalent_is_an_equivalence(t):
    a, b, c = t
    assert ob_equivalent(a, a)
    assert ob_equivalent(a, b) == ob_equivalent(b, a)
    if ob_equivalent(a, b) and ob_equivalent(b, c):
        assert ob_equivalent(a, c)


def test_ob_classes_equal_event_members():
    space = DataSpace.from_level_counts([2, 3])
    ps = PatternSet.parse(["11", "10", "01", "00"])
    events = enumerate_events(space, ps)
    for p in omega(space, ps):
        cls = {q for q in omega(space, ps) if ob_equivalent(p, q)}
        (home,) = [e for e in events if p in e.members]
        assert cls == set(home.members)
