from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finitemar.distribution import (
    DensityFamily,
    FullDensity,
    Mechanism,
    SelectionModel,
    marginal_y,
    recompose,
    selection_factorize,
    uniform_density,
)
from finitemar.errors import ReconstructionError, UndefinedMechanismError, ZeroProbabilityEventError
from finitemar.mar_analysis import (
    Verdict,
    dependence_support,
    drawn_at_random_check,
    drawn_at_random_report,
    family_mar,
    is_everywhere_mar,
    is_realized_mar,
    observed_mechanism,
    p_r_given_yobs,
    reconstruct_full,
    reconstruction_report,
    restriction_range,
    shape_constant,
    shape_proportionality_check,
    shape_witness,
    standard_equation_holds,
    standard_equation_witness,
)
from finitemar.mechanism_lab import (
    MechanismKind,
    MechanismSpec,
    build_mechanism,
    default_patterns,
    make_constant,
    perturb_mnar,
    random_marginal,
    random_mechanism,
    random_patterns,
    random_space,
)
from finitemar.rng import SplitMix64
from finitemar.sample_space import (
    DataSpace,
    MissingnessPattern,
    PatternSet,
    Point,
    enumerate_events,
    event_for,
    project_observed,
)
from oracles import brute_constant, same_observed

P = MissingnessPattern.parse
BIN2 = DataSpace.from_level_counts([2, 2])
PS_11_10 = PatternSet.parse(["11", "10"])


def linear_mechanism(coord):
    """g(10|y) = (1 + 2*y[coord]) / 10, the rest on the complete pattern."""
    def fn(r, y):
        v = F(1 + 2 * y[coord], 10)
        return v if str(r) == "10" else 1 - v
    return Mechanism.from_function(BIN2, PS_11_10, fn)


def event(r, obs, space=BIN2, ps=PS_11_10):
    return event_for(space, ps, P(r), obs)


# -- examples ---------------------------------------------------------------


def test_restriction_range_constant():
    ps = PatternSet.parse(["11", "10", "01", "00"])
    g = make_constant(BIN2, ps, [F(1, 4)] * 4)
    e = event_for(BIN2, ps, P("00"), ())
    assert len(e.members) == 4
    assert restriction_range(g, e).values == {F(1, 4)}


def test_restriction_range_two_values():
    g = linear_mechanism(1)
    rr = restriction_range(g, event("10", (0,)))
    assert rr.values == {F(1, 10), F(3, 10)}
    assert [v for _, v in rr.per_point] == [F(1, 10), F(3, 10)]


def test_restriction_range_singleton_event():
    g = linear_mechanism(1)
    for e in enumerate_events(BIN2, PS_11_10):
        if e.pattern.is_complete:
            assert restriction_range(g, e).values == {g(e.pattern, e.members[0].y)}


def test_restriction_range_undefined_member():
    g = Mechanism(DataSpace.from_level_counts([2]), PatternSet.parse(["1", "0"]), {
        Point((0,), P("1")): None, Point((0,), P("0")): None,
        Point((1,), P("1")): F(1, 2), Point((1,), P("0")): F(1, 2)})
    e = event_for(g.space, g.patterns, P("0"), ())
    with pytest.raises(UndefinedMechanismError):
        restriction_range(g, e)
    rr = restriction_range(g, e, exclude_undefined=True)
    assert rr.values == {F(1, 2)} and rr.excluded == (Point((0,), P("0")),)
    verdict = is_realized_mar(g, e)
    assert verdict.is_mar and verdict.excluded == rr.excluded


def test_p_r_given_yobs_sup_inf():
    g = linear_mechanism(1)
    e = event("10", (0,))
    assert p_r_given_yobs(g, e, "sup") == F(3, 10)
    assert p_r_given_yobs(g, e, "inf") == F(1, 10)
    const = make_constant(BIN2, PS_11_10, [F(3, 4), F(1, 4)])
    assert p_r_given_yobs(const, e, "sup") == p_r_given_yobs(const, e, "inf") == F(1, 4)
    with pytest.raises(ValueError):
        p_r_given_yobs(g, e, "mean")


def test_is_realized_mar_examples():
    const = make_constant(BIN2, PS_11_10, [F(3, 4), F(1, 4)])
    assert all(is_realized_mar(const, e) for e in enumerate_events(BIN2, PS_11_10))

    g = linear_mechanism(1)
    v = is_realized_mar(g, event("10", (0,)))
    assert v.classification is Verdict.NOT_MAR
    assert v.witness == (Point((0, 0), P("10")), Point((0, 1), P("10")))
    assert v.witness_values == (F(1, 10), F(3, 10))
    assert is_realized_mar(g, event("11", (0, 1))).is_mar


def test_is_everywhere_mar_examples():
    assert is_everywhere_mar(make_constant(BIN2, PS_11_10, [F(1, 2), F(1, 2)])).classification \
        is Verdict.EVERYWHERE_MAR
    g = linear_mechanism(0)  # depends on y1 only, observed under 10
    assert is_everywhere_mar(g).classification is Verdict.EVERYWHERE_MAR
    e = event("10", (1,))
    bad = perturb_mnar(g, e, F(1, 20), P("11"))
    v = is_everywhere_mar(bad)
    assert v.classification is Verdict.NOT_MAR and v.event == e


def test_observed_mechanism_examples():
    g = linear_mechanism(0)
    om = observed_mechanism(g)
    for r in PS_11_10:
        for y in BIN2.points():
            assert om(y, r) == g(r, y)
    assert len(om) == len(enumerate_events(BIN2, PS_11_10))

    nm = linear_mechanism(1)
    sup, inf = observed_mechanism(nm, mode="sup"), observed_mechanism(nm, mode="inf")
    for e in enumerate_events(BIN2, PS_11_10):
        assert (sup[e.key] != inf[e.key]) == (not is_realized_mar(nm, e))

    mcar = make_constant(BIN2, PS_11_10, [F(2, 3), F(1, 3)])
    om = observed_mechanism(mcar)
    for r in PS_11_10:
        assert len({om(y, r) for y in BIN2.points()}) == 1


def test_standard_equation_examples():
    g = linear_mechanism(1)
    mar_event = event("11", (1, 0))
    assert standard_equation_holds(g, mar_event, "sup")
    e = event("10", (0,))
    assert not standard_equation_holds(g, e, "sup")
    assert standard_equation_witness(g, e, "sup") == Point((0, 0), P("10"))
    assert not standard_equation_holds(g, e, "inf")
    assert standard_equation_witness(g, e, "inf") == Point((0, 1), P("10"))


def _h(g, f=None):
    f = f or {y: F(1, BIN2.size) for y in BIN2.points()}
    return recompose(SelectionModel(g.space, g.patterns, f, g))


def test_drawn_at_random_examples():
    h = _h(linear_mechanism(0))
    for e in enumerate_events(BIN2, PS_11_10):
        assert drawn_at_random_check(h, e)
    hm = _h(linear_mechanism(1))
    fails = [e for e in enumerate_events(BIN2, PS_11_10) if not drawn_at_random_check(hm, e)]
    assert fails and all(str(e.pattern) == "10" for e in fails)


def test_drawn_at_random_zero_marginal_members():
    f = {(0, 0): F(1, 2), (0, 1): 0, (1, 0): F(1, 4), (1, 1): F(1, 4)}
    h = _h(linear_mechanism(1), f)
    e = event("10", (0,))
    rep = drawn_at_random_report(h, e)
    zero_row = [row for row in rep.rows if row[0].y == (0, 1)][0]
    assert zero_row[1] == zero_row[2] == 0
    assert rep.holds


def test_zero_probability_event_is_reported():
    f = {(0, 0): 0, (0, 1): 0, (1, 0): F(1, 2), (1, 1): F(1, 2)}
    h = _h(linear_mechanism(1), f)
    with pytest.raises(ZeroProbabilityEventError):
        drawn_at_random_check(h, event("10", (0,)))
    with pytest.raises(ZeroProbabilityEventError):
        shape_proportionality_check(h, event("10", (0,)))


def test_shape_examples():
    h = _h(linear_mechanism(0))
    for e in enumerate_events(BIN2, PS_11_10):
        assert shape_proportionality_check(h, e)
    hm = _h(linear_mechanism(1))
    e = event("10", (0,))
    assert not shape_proportionality_check(hm, e)
    assert shape_constant(hm, e) is None
    assert shape_witness(hm, e) == (Point((0, 0), P("10")), Point((0, 1), P("10")))

    hu = uniform_density(BIN2, PS_11_10)
    for e in enumerate_events(BIN2, PS_11_10):
        # p(y|r) = 1/4 and f(y) = 1/4 everywhere
        assert shape_constant(hu, e) == 1


def test_reconstruct_examples():
    h = _h(linear_mechanism(0))
    g = selection_factorize(h).mechanism
    assert reconstruct_full(marginal_y(h), observed_mechanism(g)) == h
    assert reconstruction_report(h).exact

    hm = _h(linear_mechanism(1))
    gm = selection_factorize(hm).mechanism
    with pytest.raises(ReconstructionError):
        reconstruct_full(marginal_y(hm), observed_mechanism(gm))
    rep = reconstruction_report(hm)
    assert not rep.exact and not rep.validation
    assert Point((0, 0), P("10")) in rep.mismatches

    hc = _h(make_constant(BIN2, PS_11_10, [F(5, 8), F(3, 8)]))
    om = observed_mechanism(selection_factorize(hc).mechanism)
    assert {om(y, P("10")) for y in BIN2.points()} == {F(3, 8)}
    assert reconstruct_full(marginal_y(hc), om) == hc


def test_dependence_support_examples():
    mcar = make_constant(BIN2, PS_11_10, [F(2, 3), F(1, 3)])
    assert all(dependence_support(mcar, r) == frozenset() for r in PS_11_10)
    assert dependence_support(linear_mechanism(0), P("10")) == {0}
    assert 1 in dependence_support(linear_mechanism(1), P("10"))


def test_family_mar_examples():
    mcar1 = _h(make_constant(BIN2, PS_11_10, [F(1, 2), F(1, 2)]))
    mcar2 = _h(make_constant(BIN2, PS_11_10, [F(1, 3), F(2, 3)]))
    fam = DensityFamily("mcar", (("a", mcar1), ("b", mcar2)))
    assert all(family_mar(fam, e) for e in enumerate_events(BIN2, PS_11_10))

    e = event("10", (0,))
    mixed = DensityFamily("mixed", (("mar", _h(linear_mechanism(0))), ("mnar", _h(linear_mechanism(1)))))
    res = family_mar(mixed, e)
    assert not res and res.offending == "mnar"

    for h in (mcar1, _h(linear_mechanism(1))):
        single = DensityFamily("one", (("only", h),))
        for ev in enumerate_events(BIN2, PS_11_10):
            assert family_mar(single, ev).holds == is_realized_mar(selection_factorize(h).mechanism, ev).is_mar


def test_family_member_with_zero_mass_event_is_vacuous():
    f = {(0, 0): 0, (0, 1): 0, (1, 0): F(1, 2), (1, 1): F(1, 2)}
    h = _h(linear_mechanism(1), f)
    res = family_mar(DensityFamily("z", (("zero", h),)), event("10", (0,)))
    assert res.holds and res.vacuous == ("zero",)


# -- properties over random mechanisms --------------------------------------


def random_case(seed):
    rng = SplitMix64(seed)
    space = random_space(rng)
    ps = random_patterns(rng, space.n)
    choice = rng.below(3)
    if choice == 0:
        g = random_mechanism(space, ps, rng, max_den=rng.choice([2, 3, 4, 64]))
    else:
        kind = MechanismKind.CONSTANT if choice == 1 else MechanismKind.COMMON_OBSERVED
        g = build_mechanism(MechanismSpec(kind, rng.next_u64()), space, ps).mechanism
    return space, ps, g


seeds = st.integers(0, 2**64 - 1)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_definitions_agree_with_pairwise_oracle(seed):
    space, ps, g = random_case(seed)
    for e in enumerate_events(space, ps):
        values = [g(m.r, m.y) for m in e.members]
        oracle = brute_constant(values)
        assert is_realized_mar(g, e).is_mar == oracle
        assert standard_equation_holds(g, e, "sup") == oracle
        assert standard_equation_holds(g, e, "inf") == oracle
        assert (len(restriction_range(g, e).values) == 1) == oracle


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_witness_is_sound(seed):
    space, ps, g = random_case(seed)
    for e in enumerate_events(space, ps):
        v = is_realized_mar(g, e)
        if not v:
            a, b = v.witness
            assert a in e.members and b in e.members
            assert g(a.r, a.y) != g(b.r, b.y)
            assert v.witness_values == (g(a.r, a.y), g(b.r, b.y))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_mar_implies_drawn_at_random_and_shape_agrees(seed):
    space, ps, g = random_case(seed)
    rng = SplitMix64(seed ^ 0xABCDEF)
    f = random_marginal(space, rng, positive=rng.below(2) == 0)
    h = recompose(SelectionModel(space, ps, f, g))
    fpos = all(f.values())
    for e in enumerate_events(space, ps):
        if h.mass(e.members) == 0:
            continue
        dar = drawn_at_random_check(h, e)
        assert shape_proportionality_check(h, e) == dar
        if is_realized_mar(g, e):
            assert dar
        elif fpos:
            assert not dar


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_everywhere_mar_iff_support_in_observed(seed):
    space, ps, g = random_case(seed)
    brute = all(
        g(r, y1) == g(r, y2)
        for r in ps for y1 in space.points() for y2 in space.points()
        if same_observed(y1, y2, r.bits)
    )
    support_ok = all(dependence_support(g, r) <= set(r.observed) for r in ps)
    assert is_everywhere_mar(g).is_mar == brute == support_ok


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_reconstruction_exact_for_everywhere_mar(seed):
    space, ps, g = random_case(seed)
    f = random_marginal(space, SplitMix64(seed + 1))
    h = recompose(SelectionModel(space, ps, f, g))
    rep = reconstruction_report(h, g)
    assert rep.exact == is_everywhere_mar(g).is_mar


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_normalization_coupling(seed):
    rng = SplitMix64(seed)
    space = random_space(rng)
    kind = rng.choice([MechanismKind.COMMON_OBSERVED, MechanismKind.MONOTONE_DROPOUT])
    ps = default_patterns(kind, space.n) if kind is MechanismKind.MONOTONE_DROPOUT else random_patterns(rng, space.n)
    g = build_mechanism(MechanismSpec(kind, rng.next_u64()), space, ps).mechanism
    assert is_everywhere_mar(g)
    for rj in ps:
        for y1 in space.points():
            for y2 in space.points():
                if not same_observed(y1, y2, tuple(1 - b for b in rj.bits)):
                    continue  # only vary coordinates observed under rj
                change = g(rj, y2) - g(rj, y1)
                rest = sum(g(r, y2) - g(r, y1) for r in ps if r != rj)
                assert change == -rest


def test_modes_give_same_verdicts_on_tables():
    g = linear_mechanism(1)
    for mode in ("sup", "inf"):
        om = observed_mechanism(g, mode=mode)
        verdicts = [all(g(m.r, m.y) == om[e.key] for m in e.members) for e in enumerate_events(BIN2, PS_11_10)]
        assert verdicts == [is_realized_mar(g, e).is_mar for e in enumerate_events(BIN2, PS_11_10)]
        assert om(( 0, 1), P("10")) == om((0, 0), P("10"))
        assert project_observed((0, 1), P("10")) == (0,)
