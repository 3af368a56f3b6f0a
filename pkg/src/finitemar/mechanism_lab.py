"""Mechanism generators, dataset sampling and the complete-case bias demo.

Generators return :class:`~finitemar.distribution.Mechanism` tables that
satisfy ``0 <= g <= 1`` and ``sum_r g(r|y) = 1`` exactly. The three MAR-class
generators are everywhere MAR by construction; :func:`perturb_mnar` breaks
MAR on one chosen event.
"""

from __future__ import annotations

import bisect
import csv
import enum
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence, Union

from .distribution import (
    ZERO,
    FullDensity,
    Mechanism,
    SelectionModel,
    density_fingerprint,
    exact,
    fmt,
    marginal_r,
    marginal_y,
    require_valid,
)
from .errors import GeneratorError, ZeroProbabilityEventError
from .mar_analysis import is_realized_mar
from .rng import SplitMix64, mix
from .sample_space import (
    DataSpace,
    Levels,
    MissingnessPattern,
    ObservableDataEvent,
    PatternSet,
    Point,
    enumerate_events,
    omega,
)

DEFAULT_MAX_DEN = 64


class MechanismKind(enum.Enum):
    CONSTANT = "constant"
    COMMON_OBSERVED = "common-observed"
    MONOTONE_DROPOUT = "monotone"
    PERTURBED_MNAR = "mnar"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class MechanismSpec:
    kind: MechanismKind
    seed: int = 0
    max_den: int = DEFAULT_MAX_DEN
    order: tuple[int, ...] | None = None


@dataclass(frozen=True)
class Hazard:
    """Dropout probability at one step as a table over some earlier variables.

    ``table`` maps the values of ``variables`` (in that order) to a probability.
    """

    variables: tuple[int, ...]
    table: Mapping[tuple[int, ...], Fraction] = field(compare=False)


HazardLike = Union[Fraction, int, str, Hazard, Callable[[Levels], Fraction]]


def _vector(patterns: PatternSet, probs) -> dict[MissingnessPattern, Fraction]:
    if isinstance(probs, Mapping):
        if set(probs) - set(patterns):
            raise GeneratorError("probabilities given for patterns outside the pattern set")
        vec = {r: exact(probs.get(r, 0)) for r in patterns}
    else:
        probs = list(probs)
        if len(probs) != patterns.k:
            raise GeneratorError(f"{len(probs)} probabilities for {patterns.k} patterns")
        vec = {r: exact(p) for r, p in zip(patterns, probs)}
    if any(not 0 <= p <= 1 for p in vec.values()):
        raise GeneratorError("pattern probabilities must lie in [0, 1]")
    total = sum(vec.values(), ZERO)
    if total != 1:
        raise GeneratorError(f"pattern probabilities sum to {fmt(total)}, must sum to 1")
    return vec


def make_constant(space: DataSpace, patterns: PatternSet, probs) -> Mechanism:
    """``g(r | y) = probs[r]`` for every ``y``."""
    vec = _vector(patterns, probs)
    return Mechanism.from_function(space, patterns, lambda r, y: vec[r])


def make_common_observed(space: DataSpace, patterns: PatternSet,
                         table: Mapping[tuple[int, ...], object],
                         variables: Sequence[int] | None = None) -> Mechanism:
    """``g(r | y)`` looked up from the values of variables every pattern observes.

    ``table`` maps value tuples of ``variables`` (default: all commonly
    observed variables, in index order) to a probability vector over the
    patterns.
    """
    common = patterns.common_observed()
    variables = common if variables is None else tuple(variables)
    stray = [i for i in variables if i not in common]
    if stray:
        names = ", ".join(space.variables[i].name for i in stray)
        raise GeneratorError(f"table is keyed on {names}, which some pattern leaves unobserved")
    vectors = {}
    for key in space.subgrid(variables):
        if key not in table:
            raise GeneratorError(f"no probability vector for common values {key}")
        vectors[key] = _vector(patterns, table[key])
    if set(table) - set(vectors):
        raise GeneratorError("table has keys outside the common variables' levels")
    return Mechanism.from_function(space, patterns, lambda r, y: vectors[tuple(y[i] for i in variables)][r])


def monotone_chain(n: int, order: Sequence[int] | None = None,
                   include_all_missing: bool = False) -> PatternSet:
    """Patterns observing the first ``j`` variables of ``order``, ``j = n, ..., 1``."""
    order = tuple(range(n)) if order is None else tuple(order)
    stop = -1 if include_all_missing else 0
    pats = []
    for j in range(n, stop, -1):
        bits = [0] * n
        for i in order[:j]:
            bits[i] = 1
        pats.append(MissingnessPattern(tuple(bits)))
    return PatternSet(tuple(pats))


def _check_order(n: int, order: Sequence[int] | None) -> tuple[int, ...]:
    order = tuple(range(n)) if order is None else tuple(order)
    if sorted(order) != list(range(n)):
        raise GeneratorError(f"order {order} is not a permutation of the variables")
    return order


def _hazard_fn(space: DataSpace, step: int, order: tuple[int, ...],
               hz: HazardLike) -> Callable[[Levels], Fraction]:
    history = order[:step - 1]
    if isinstance(hz, Hazard):
        late = [i for i in hz.variables if i not in history]
        if late:
            names = ", ".join(space.variables[i].name for i in late)
            raise GeneratorError(f"hazard at step {step} depends on {names}, not yet observed at that step")
        values = {}
        for key in space.subgrid(hz.variables):
            if key not in hz.table:
                raise GeneratorError(f"hazard at step {step} has no value for {key}")
            values[key] = exact(hz.table[key])
        pos = [history.index(i) for i in hz.variables]
        return lambda hist: values[tuple(hist[p] for p in pos)]
    if callable(hz):
        return lambda hist: exact(hz(hist))
    const = exact(hz)
    return lambda hist: const


def make_monotone_dropout(space: DataSpace, patterns: PatternSet,
                          hazards: Mapping[int, HazardLike] | Sequence[HazardLike],
                          order: Sequence[int] | None = None) -> Mechanism:
    """Dropout mechanism on a monotone pattern chain.

    ``hazards[j]`` (steps ``1..n``) is the probability of dropping out at
    step ``j``, i.e. of leaving variable ``order[j-1]`` and all later ones
    unobserved, given the unit was still in. It may depend only on
    ``order[:j-1]``; callables receive exactly those values. Missing steps
    have hazard 0. Step 1 feeds the all-missing pattern, so it must be 0
    unless that pattern is in the set.
    """
    n = space.n
    order = _check_order(n, order)
    chain = monotone_chain(n, order, include_all_missing=False)
    zeros = MissingnessPattern((0,) * n)
    allowed = set(chain) | {zeros}
    if not set(patterns) <= allowed or not set(chain) <= set(patterns):
        raise GeneratorError("pattern set is not a monotone dropout chain for this variable order")
    if isinstance(hazards, Mapping):
        steps = dict(hazards)
    else:
        steps = {j + 1: hz for j, hz in enumerate(hazards)}
    if any(j not in range(1, n + 1) for j in steps):
        raise GeneratorError(f"hazard steps must lie in 1..{n}")
    fns = [_hazard_fn(space, j, order, steps.get(j, 0)) for j in range(1, n + 1)]

    # pattern observing the first m variables of the order
    by_m = {}
    for m in range(n + 1):
        bits = [0] * n
        for i in order[:m]:
            bits[i] = 1
        by_m[m] = MissingnessPattern(tuple(bits))

    table = {}
    for y in space.points():
        survive = Fraction(1)
        row = {}
        for j, fn in enumerate(fns, start=1):
            hz = fn(tuple(y[i] for i in order[:j - 1]))
            if not 0 <= hz <= 1:
                raise GeneratorError(f"hazard {fmt(hz)} at step {j} outside [0, 1]")
            row[by_m[j - 1]] = survive * hz
            survive *= 1 - hz
        row[by_m[n]] = survive
        if zeros not in patterns and row[zeros]:
            raise GeneratorError("nonzero step-1 hazard but the all-missing pattern is not in the set")
        for r in patterns:
            table[Point(y, r)] = row[r]
    return Mechanism(space, patterns, table)


def perturb_mnar(g: Mechanism, e: ObservableDataEvent, delta, donor: MissingnessPattern,
                 member: Point | None = None) -> Mechanism:
    """Move ``delta`` of mass from ``donor`` to the event's pattern at one member.

    ``member`` defaults to the first member of ``e``. With ``delta > 0`` the
    result is not MAR on ``e``, provided ``g`` was MAR there.
    """
    delta = exact(delta)
    if delta < 0:
        raise GeneratorError("delta must be non-negative")
    if donor == e.pattern or donor not in g.patterns:
        raise GeneratorError(f"donor pattern {donor} must be another pattern of the set")
    if delta == 0:
        return g
    if len(e.members) < 2:
        raise GeneratorError("a single-point event cannot be made non-MAR")
    if not is_realized_mar(g, e):
        raise GeneratorError("the mechanism is already not MAR on this event")
    member = e.members[0] if member is None else member
    if member not in e.members:
        raise GeneratorError(f"{member} is not a member of the event")
    src = Point(member.y, donor)
    up, down = g(member.r, member.y) + delta, g(donor, member.y) - delta
    if up > 1 or down < 0:
        raise GeneratorError(f"perturbation by {fmt(delta)} pushes g outside [0, 1] "
                             f"({fmt(up)} and {fmt(down)})")
    return g.replace({member: up, src: down})


# -- random construction ----------------------------------------------------


def random_space(rng: SplitMix64, max_vars: int = 3, max_levels: int = 3) -> DataSpace:
    n = rng.randint(1, max_vars)
    return DataSpace.from_level_counts([rng.randint(1, max_levels) for _ in range(n)])


def random_patterns(rng: SplitMix64, n: int, max_k: int = 4) -> PatternSet:
    others = [MissingnessPattern(tuple((v >> (n - 1 - i)) & 1 for i in range(n))) for v in range(2 ** n - 1)]
    k = rng.randint(1, min(max_k, len(others) + 1))
    chosen = []
    for _ in range(k - 1):
        chosen.append(others.pop(rng.below(len(others))))
    return PatternSet((MissingnessPattern.complete(n), *chosen))


def random_marginal(space: DataSpace, rng: SplitMix64, max_den: int = DEFAULT_MAX_DEN,
                    positive: bool = True) -> dict[Levels, Fraction]:
    pts = list(space.points())
    den = max(max_den, 2 * len(pts)) if positive else max_den
    return dict(zip(pts, rng.simplex(len(pts), den, positive=positive)))


def random_density(space: DataSpace, patterns: PatternSet, rng: SplitMix64,
                   max_den: int = DEFAULT_MAX_DEN, positive: bool = False) -> FullDensity:
    pts = list(omega(space, patterns))
    den = max(max_den, 2 * len(pts)) if positive else max_den
    return FullDensity(space, patterns, dict(zip(pts, rng.simplex(len(pts), den, positive=positive))))


def random_mechanism(space: DataSpace, patterns: PatternSet, rng: SplitMix64,
                     max_den: int = DEFAULT_MAX_DEN) -> Mechanism:
    """Each row an independent random probability vector; generally not MAR."""
    table = {}
    for y in space.points():
        for r, v in zip(patterns, rng.simplex(patterns.k, max_den)):
            table[Point(y, r)] = v
    return Mechanism(space, patterns, table)


def default_patterns(kind: MechanismKind, n: int, order: Sequence[int] | None = None) -> PatternSet:
    """Monotone chain for dropout; otherwise every pattern observing the first variable."""
    if kind is MechanismKind.MONOTONE_DROPOUT:
        return monotone_chain(n, order)
    if n == 1:
        return PatternSet.parse(["1", "0"])
    pats = []
    for v in range(2 ** (n - 1) - 1, -1, -1):
        bits = (1,) + tuple((v >> (n - 2 - i)) & 1 for i in range(n - 1))
        pats.append(MissingnessPattern(bits))
    return PatternSet(tuple(pats))


@dataclass(frozen=True, eq=False)
class GeneratedMechanism:
    mechanism: Mechanism
    spec: MechanismSpec
    perturbed_event: ObservableDataEvent | None = None
    perturbed_member: Point | None = None


def _random_common(space, patterns, rng, max_den, positive):
    common = patterns.common_observed()
    table = {key: rng.simplex(patterns.k, max(max_den, 2 * patterns.k) if positive else max_den,
                              positive=positive)
             for key in space.subgrid(common)}
    return make_common_observed(space, patterns, table)


def _random_monotone(space, patterns, rng, max_den, order):
    n = space.n
    order = _check_order(n, order)
    hazards: dict[int, HazardLike] = {}
    zeros = MissingnessPattern((0,) * n)
    hazards[1] = rng.fraction(max_den) if zeros in patterns else 0
    for j in range(2, n + 1):
        history = order[:j - 1]
        # a random subset of the observed history, keeping its order
        used = tuple(i for i in history if rng.below(2))
        hazards[j] = Hazard(used, {key: rng.fraction(max_den) for key in space.subgrid(used)})
    return make_monotone_dropout(space, patterns, hazards, order)


def _perturb_sites(g: Mechanism):
    sites = []
    for e in enumerate_events(g.space, g.patterns):
        if len(e.members) < 2:
            continue
        for m in e.members:
            if g(m.r, m.y) >= 1:
                continue
            for d in g.patterns:
                if d != e.pattern and g(d, m.y) > 0:
                    sites.append((e, m, d))
    return sites


def build_mechanism(spec: MechanismSpec, space: DataSpace, patterns: PatternSet) -> GeneratedMechanism:
    """Draw a mechanism of ``spec.kind`` with rational parameters from ``spec.seed``."""
    rng = SplitMix64(spec.seed)
    kind = spec.kind
    if kind is MechanismKind.CONSTANT:
        g = make_constant(space, patterns, rng.simplex(patterns.k, spec.max_den))
        return GeneratedMechanism(g, spec)
    if kind is MechanismKind.COMMON_OBSERVED:
        return GeneratedMechanism(_random_common(space, patterns, rng, spec.max_den, False), spec)
    if kind is MechanismKind.MONOTONE_DROPOUT:
        return GeneratedMechanism(_random_monotone(space, patterns, rng, spec.max_den, spec.order), spec)
    if kind is MechanismKind.PERTURBED_MNAR:
        base = _random_common(space, patterns, rng, spec.max_den, True)
        sites = _perturb_sites(base)
        if not sites:
            raise GeneratorError("no event with two or more members to perturb")
        e, m, d = rng.choice(sites)
        cap = min(1 - base(m.r, m.y), base(d, m.y))
        delta = cap * Fraction(rng.randint(1, 4), 4)
        return GeneratedMechanism(perturb_mnar(base, e, delta, d, m), spec, e, m)
    raise GeneratorError(f"unknown mechanism kind {kind}")


def generate_model(spec: MechanismSpec, space: DataSpace, patterns: PatternSet | None = None,
                   marginal: Mapping[Levels, Fraction] | None = None) -> tuple[SelectionModel, GeneratedMechanism]:
    """A selection model with a generated mechanism and a strictly positive marginal."""
    patterns = patterns or default_patterns(spec.kind, space.n, spec.order)
    gen = build_mechanism(spec, space, patterns)
    if marginal is None:
        marginal = random_marginal(space, SplitMix64(mix(spec.seed, 1 << 32)), spec.max_den)
    return SelectionModel(space, patterns, marginal, gen.mechanism), gen


# -- sampling and bias ------------------------------------------------------


@dataclass(frozen=True)
class IncompleteDataset:
    """Rows of ``(pattern, ((index, level), ...))``; missing values are absent."""

    space: DataSpace
    patterns: PatternSet
    rows: tuple[tuple[MissingnessPattern, tuple[tuple[int, int], ...]], ...]
    source: str
    seed: int

    def __len__(self) -> int:
        return len(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pattern", *self.space.names])
        for r, obs in self.rows:
            vals = dict(obs)
            w.writerow([str(r), *(vals.get(i, "NA") for i in range(self.space.n))])
        return buf.getvalue()


def sample_dataset(h: FullDensity, n_rows: int, seed: int) -> IncompleteDataset:
    """Draw ``n_rows`` i.i.d. points from ``h`` exactly and drop their missing parts.

    Row ``i`` uses its own SplitMix64 stream seeded with ``mix(seed, i)``, so
    rows are independent of generation order.
    """
    require_valid(h)
    if n_rows < 0:
        raise ValueError("n_rows must be non-negative")
    pts = [p for p in omega(h.space, h.patterns) if h[p]]
    den = math.lcm(*(h[p].denominator for p in pts))
    cum, acc = [], 0
    for p in pts:
        acc += h[p].numerator * (den // h[p].denominator)
        cum.append(acc)
    rows = []
    for i in range(n_rows):
        u = SplitMix64(mix(seed, i)).below(den)
        p = pts[bisect.bisect_right(cum, u)]
        rows.append((p.r, tuple((j, p.y[j]) for j in p.r.observed)))
    return IncompleteDataset(h.space, h.patterns, tuple(rows), density_fingerprint(h), seed)


@dataclass(frozen=True)
class BiasReport:
    variable: str
    complete_case_mean: Fraction
    marginal_mean: Fraction

    @property
    def difference(self) -> Fraction:
        return self.complete_case_mean - self.marginal_mean

    def __iter__(self):
        return iter((self.complete_case_mean, self.marginal_mean, self.difference))


def complete_case_bias(h: FullDensity, var: int | str) -> BiasReport:
    """Mean of one variable among complete cases against its marginal mean."""
    require_valid(h)
    i = h.space.index_of(var) if isinstance(var, str) else var
    if not 0 <= i < h.space.n:
        raise IndexError(f"variable index {i} out of range")
    r1 = h.patterns[0]
    p1 = marginal_r(h)[r1]
    if p1 == 0:
        raise ZeroProbabilityEventError("no probability on complete cases")
    cc = sum((y[i] * h(y, r1) for y in h.space.points()), ZERO) / p1
    f = marginal_y(h)
    mm = sum((y[i] * fy for y, fy in f.items()), ZERO)
    return BiasReport(h.space.variables[i].name, cc, mm)
