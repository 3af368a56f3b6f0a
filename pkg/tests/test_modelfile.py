from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finitemar.distribution import (
    FullDensity,
    pattern_mixture_factorize,
    recompose,
    selection_factorize,
    uniform_density,
    validate,
)
from finitemar.errors import ModelFileError
from finitemar.mechanism_lab import MechanismKind, MechanismSpec, generate_model, random_density, random_patterns, random_space
from finitemar.modelfile import load_model, parse_model, serialize_model
from finitemar.rng import SplitMix64
from finitemar.sample_space import DataSpace, PatternSet

MINIMAL = """\
# one binary variable
space
A 0 1
patterns
1
0
density
1 0 1/4
1 1 1/4
0 0 1/4
0 1 1/4
"""


def test_minimal_file():
    m = parse_model(MINIMAL)
    assert m.kind == "density"
    assert len(m.density.table) == 4 and validate(m.density)
    assert m.space.names == ("A",)


def test_bytes_and_crlf_free_input():
    assert parse_model(MINIMAL.encode()).density == parse_model(MINIMAL).density


def error_line(text):
    with pytest.raises(ModelFileError) as info:
        parse_model(text)
    return info.value.line, str(info.value)


def test_wrong_length_pattern_has_line_number():
    text = MINIMAL.replace("patterns\n1\n0\n", "patterns\n1\n10\n")
    line, msg = error_line(text)
    assert line == 6 and msg.startswith("line 6:")


def test_mechanism_row_over_one_is_rejected():
    text = """space
A 0 1
patterns
1
0
selection
marginal
0 1/2
1 1/2
mechanism
0 1 1/2
0 0 1/2
1 1 3/4
1 0 3/8
"""
    line, msg = error_line(text)
    assert "9/8" in msg and "sum to 1" in msg and line is not None


@pytest.mark.parametrize("bad, needle", [
    (MINIMAL.replace("1 0 1/4", "1 0 0.25"), "decimal"),
    (MINIMAL.replace("density", "densities"), "section"),
    (MINIMAL.replace("patterns\n1\n0", "patterns\n0\n1"), "all ones"),
    (MINIMAL.replace("0 1 1/4\n", "0 1 1/4\n0 1 1/4\n"), "duplicate"),
    (MINIMAL.replace("1 1 1/4", "1 1 1/3"), "mass"),
    (MINIMAL.replace("A 0 1", "A 0 1\nA 0 1"), ""),
])
def test_rejections(bad, needle):
    line, msg = error_line(bad)
    assert needle in msg.lower()


def test_check_false_allows_invalid_mass():
    m = parse_model(MINIMAL.replace("1 1 1/4", "1 1 1/3"), check=False)
    assert not validate(m.density)


def test_selection_with_undefined_rows():
    text = """space
A 0 1
patterns
1
0
selection
marginal
0 0
1 1
mechanism
0 1 undefined
0 0 undefined
1 1 2/3
1 0 1/3
"""
    m = parse_model(text)
    assert m.mechanism.undefined_rows() == [(0,)]
    assert serialize_model(m) == text


def test_canonical_form_round_trips():
    canonical = serialize_model(parse_model(MINIMAL))
    assert "#" not in canonical
    assert serialize_model(parse_model(canonical)) == canonical


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**64 - 1))
def test_round_trip_all_three_kinds(seed):
    rng = SplitMix64(seed)
    space = random_space(rng)
    ps = random_patterns(rng, space.n)
    h = random_density(space, ps, rng)
    for obj in (h, selection_factorize(h), pattern_mixture_factorize(h)):
        text = serialize_model(obj)
        m = parse_model(text)
        assert m.density == h
        assert serialize_model(m) == text


def test_generated_selection_round_trip(tmp_path):
    sm, _ = generate_model(MechanismSpec(MechanismKind.MONOTONE_DROPOUT, 4), DataSpace.from_level_counts([3, 2]))
    path = tmp_path / "m.model"
    path.write_text(serialize_model(sm))
    m = load_model(path)
    assert m.mechanism == sm.mechanism
    assert recompose(sm) == m.density


def test_uniform_single_pattern():
    h = uniform_density(DataSpace.from_level_counts([2, 2]), PatternSet.parse(["11"]))
    assert parse_model(serialize_model(h)).density == h
    assert set(h.table.values()) == {F(1, 4)}
    assert isinstance(parse_model(serialize_model(h)).density, FullDensity)
