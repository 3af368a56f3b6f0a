"""Deciding MAR on observable data events and defining P(R | Y_obs).

MAR with respect to an event means the mechanism ``g`` takes a single value
on that event. ``P(R | Y_obs)`` is defined eventwise as the supremum (or,
equally good for classification, the infimum) of the values ``g`` takes on
the event, so ``P(R | Y_obs, Y_mis) = P(R | Y_obs)`` for every ``Y_mis``
exactly when the event is MAR.

Points where ``g`` is undefined (``f(y) = 0`` in a factorized density) are
excluded from every constancy test and listed in the result.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Mapping

from .distribution import (
    ZERO,
    DensityFamily,
    FullDensity,
    Mechanism,
    ValidationReport,
    fmt,
    marginal_r,
    marginal_y,
    require_valid,
    selection_factorize,
    validate,
)
from .errors import (
    ReconstructionError,
    UndefinedMechanismError,
    ZeroProbabilityEventError,
)
from .sample_space import (
    DataSpace,
    Levels,
    MissingnessPattern,
    ObservableDataEvent,
    PatternSet,
    Point,
    enumerate_events,
    project_observed,
)

Mode = Literal["sup", "inf"]
MODES: tuple[Mode, ...] = ("sup", "inf")


class Verdict(enum.Enum):
    EVERYWHERE_MAR = "EverywhereMAR"
    REALIZED_MAR = "RealizedMAR"
    NOT_MAR = "NotMAR"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RestrictionRange:
    """The set of values ``g`` takes on one event.

    ``values`` is empty only when every member was excluded as undefined.
    """

    event: ObservableDataEvent
    values: frozenset[Fraction]
    per_point: tuple[tuple[Point, Fraction], ...] = field(compare=False)
    excluded: tuple[Point, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class MarVerdict:
    classification: Verdict
    event: ObservableDataEvent | None = None
    witness: tuple[Point, Point] | None = None
    witness_values: tuple[Fraction, Fraction] | None = None
    excluded: tuple[Point, ...] = ()

    @property
    def is_mar(self) -> bool:
        return self.classification is not Verdict.NOT_MAR

    def __bool__(self) -> bool:
        return self.is_mar

    def describe(self, space: DataSpace | None = None) -> str:
        lines = [str(self.classification)]
        if self.event is not None and self.classification is not Verdict.EVERYWHERE_MAR:
            lines.append(f"event: {self.event.describe(space)}")
        if self.witness is not None:
            (a, b), (va, vb) = self.witness, self.witness_values
            lines.append(f"witness: g({a.r}|{a.y}) = {fmt(va)}")
            lines.append(f"witness: g({b.r}|{b.y}) = {fmt(vb)}")
        if self.excluded:
            lines.append(f"excluded (g undefined): {len(self.excluded)} point(s)")
        return "\n".join(lines)


@dataclass(frozen=True, eq=False)
class ObservedMechanism:
    """``P(R | Y_obs)`` as a table keyed by ``(pattern, observed values)``.

    An entry is ``None`` only when ``g`` is undefined on the whole event.
    """

    space: DataSpace
    patterns: PatternSet
    mode: Mode
    table: Mapping[tuple[MissingnessPattern, Levels], Fraction | None]

    def __call__(self, y: Levels, r: MissingnessPattern) -> Fraction | None:
        """Value at the observable datum of the point ``(y, r)``."""
        return self.table[(r, project_observed(y, r))]

    def __getitem__(self, key: tuple[MissingnessPattern, Levels]) -> Fraction | None:
        return self.table[key]

    def __len__(self) -> int:
        return len(self.table)


def restriction_range(g: Mechanism, e: ObservableDataEvent, *,
                      exclude_undefined: bool = False) -> RestrictionRange:
    per_point, excluded = [], []
    for m in e.members:
        v = g.get(m)
        if v is None:
            if not exclude_undefined:
                raise UndefinedMechanismError(f"g is undefined at {m}")
            excluded.append(m)
        else:
            per_point.append((m, v))
    return RestrictionRange(e, frozenset(v for _, v in per_point), tuple(per_point), tuple(excluded))


def _pick(values, mode: Mode) -> Fraction:
    if mode == "sup":
        return max(values)
    if mode == "inf":
        return min(values)
    raise ValueError(f"mode must be 'sup' or 'inf', not {mode!r}")


def p_r_given_yobs(g: Mechanism, e: ObservableDataEvent, mode: Mode = "sup", *,
                   exclude_undefined: bool = True) -> Fraction:
    rr = restriction_range(g, e, exclude_undefined=exclude_undefined)
    if not rr.values:
        raise UndefinedMechanismError(f"g is undefined on the whole event {e.describe()}")
    return _pick(rr.values, mode)


def is_realized_mar(g: Mechanism, e: ObservableDataEvent) -> MarVerdict:
    rr = restriction_range(g, e, exclude_undefined=True)
    if len(rr.values) <= 1:
        return MarVerdict(Verdict.REALIZED_MAR, e, excluded=rr.excluded)
    # canonical witness: first defined member paired with the earliest member that differs
    first, v0 = rr.per_point[0]
    for m, v in rr.per_point[1:]:
        if v != v0:
            return MarVerdict(Verdict.NOT_MAR, e, (first, m), (v0, v), rr.excluded)
    raise AssertionError("unreachable: more than one value but no differing member")


def is_everywhere_mar(g: Mechanism, space: DataSpace | None = None,
                      patterns: PatternSet | None = None) -> MarVerdict:
    space = space or g.space
    patterns = patterns or g.patterns
    excluded: list[Point] = []
    for e in enumerate_events(space, patterns):
        v = is_realized_mar(g, e)
        if not v:
            return v
        excluded.extend(v.excluded)
    return MarVerdict(Verdict.EVERYWHERE_MAR, excluded=tuple(excluded))


def observed_mechanism(g: Mechanism, space: DataSpace | None = None,
                       patterns: PatternSet | None = None, mode: Mode = "sup") -> ObservedMechanism:
    space = space or g.space
    patterns = patterns or g.patterns
    table: dict[tuple[MissingnessPattern, Levels], Fraction | None] = {}
    for e in enumerate_events(space, patterns):
        rr = restriction_range(g, e, exclude_undefined=True)
        table[e.key] = _pick(rr.values, mode) if rr.values else None
    return ObservedMechanism(space, patterns, mode, table)


def standard_equation_witness(g: Mechanism, e: ObservableDataEvent,
                              mode: Mode = "sup") -> Point | None:
    """First member at which ``g`` differs from ``P(R | Y_obs)``, if any."""
    try:
        rhs = p_r_given_yobs(g, e, mode)
    except UndefinedMechanismError:
        return None
    for m in e.members:
        lhs = g.get(m)
        if lhs is not None and lhs != rhs:
            return m
    return None


def standard_equation_holds(g: Mechanism, e: ObservableDataEvent, mode: Mode = "sup") -> bool:
    """``P(R | Y_obs, Y_mis) = P(R | Y_obs)`` for every ``Y_mis`` in the event."""
    return standard_equation_witness(g, e, mode) is None


def _event_mass(h: FullDensity, e: ObservableDataEvent) -> Fraction:
    mass = h.mass(e.members)
    if mass == 0:
        raise ZeroProbabilityEventError(f"event {e.describe(h.space)} has probability 0")
    return mass


@dataclass(frozen=True)
class DrawnAtRandomReport:
    """Per member: ``p(y_mis | y_obs, r)`` against ``f(y_mis | y_obs)``."""

    holds: bool
    rows: tuple[tuple[Point, Fraction, Fraction], ...]

    def __bool__(self) -> bool:
        return self.holds

    @property
    def failures(self) -> tuple[tuple[Point, Fraction, Fraction], ...]:
        return tuple(row for row in self.rows if row[1] != row[2])


def drawn_at_random_report(h: FullDensity, e: ObservableDataEvent,
                           f: Mapping[Levels, Fraction] | None = None) -> DrawnAtRandomReport:
    require_valid(h)
    f = marginal_y(h) if f is None else f
    event_mass = _event_mass(h, e)
    # the y's of the event are exactly the data vectors sharing the observed values
    f_mass = sum((f[m.y] for m in e.members), ZERO)
    rows = tuple((m, h[m] / event_mass, f[m.y] / f_mass) for m in e.members)
    return DrawnAtRandomReport(all(a == b for _, a, b in rows), rows)


def drawn_at_random_check(h: FullDensity, e: ObservableDataEvent,
                          f: Mapping[Levels, Fraction] | None = None) -> bool:
    return drawn_at_random_report(h, e, f).holds


def _component_on_event(h: FullDensity, e: ObservableDataEvent, f, pr):
    require_valid(h)
    _event_mass(h, e)
    f = marginal_y(h) if f is None else f
    pr = marginal_r(h)[e.pattern] if pr is None else pr
    return [(m, h[m] / pr, f[m.y]) for m in e.members]


def shape_constant(h: FullDensity, e: ObservableDataEvent,
                   f: Mapping[Levels, Fraction] | None = None,
                   pr: Fraction | None = None) -> Fraction | None:
    """The ``c`` with ``p(y|r) = c f(y)`` on the event, or ``None`` if there is none."""
    rows = _component_on_event(h, e, f, pr)
    if not _cross_equal(rows):
        return None
    for _, p, fy in rows:
        if fy:
            return p / fy
    raise AssertionError("positive event with zero marginal everywhere")


def _cross_equal(rows) -> bool:
    for i, (_, pi, fi) in enumerate(rows):
        for _, pj, fj in rows[i + 1:]:
            if pi * fj != pj * fi:
                return False
    return True


def shape_proportionality_check(h: FullDensity, e: ObservableDataEvent,
                                f: Mapping[Levels, Fraction] | None = None,
                                pr: Fraction | None = None) -> bool:
    """Pattern component and marginal have the same shape on the event."""
    return _cross_equal(_component_on_event(h, e, f, pr))


def shape_witness(h: FullDensity, e: ObservableDataEvent) -> tuple[Point, Point] | None:
    """Two members whose ratios ``p(y|r) / f(y)`` disagree, if the shapes differ.

    The first member is the earliest one with ``f(y) > 0``.
    """
    rows = _component_on_event(h, e, None, None)
    ref, p0, f0 = next(row for row in rows if row[2])
    for m, p, fy in rows:
        if p * f0 != p0 * fy:
            return ref, m
    return None


def reconstruct_full(f: Mapping[Levels, Fraction], om: ObservedMechanism, *,
                     strict: bool = True) -> FullDensity:
    """``h(y, r) = f(y) * P(R | Y_obs)(y_obs, r)``.

    With ``strict`` the result must pass :func:`validate`; failure means the
    observed mechanism did not come from an everywhere-MAR ``g``.
    """
    table = {}
    for r in om.patterns:
        for y in om.space.points():
            fy = f[y]
            v = om(y, r)
            if v is None:
                if fy:
                    raise ReconstructionError(f"P(R|Y_obs) undefined at ({y}, {r}) where f > 0")
                table[Point(y, r)] = ZERO
            else:
                table[Point(y, r)] = fy * v
    h = FullDensity(om.space, om.patterns, table)
    if strict:
        report = validate(h)
        if not report:
            raise ReconstructionError(f"reconstruction is not a density ({report}); "
                                      "the mechanism was not everywhere MAR")
    return h


@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    exact: bool
    validation: ValidationReport
    mismatches: tuple[Point, ...]
    reconstructed: FullDensity

    def __bool__(self) -> bool:
        return self.exact


def reconstruction_report(h: FullDensity, g: Mechanism | None = None,
                          mode: Mode = "sup") -> ReconstructionReport:
    """Rebuild ``h`` from its marginal and ``P(R | Y_obs)`` and compare."""
    require_valid(h)
    g = selection_factorize(h).mechanism if g is None else g
    rebuilt = reconstruct_full(marginal_y(h), observed_mechanism(g, h.space, h.patterns, mode), strict=False)
    mismatches = tuple(p for p in sorted(rebuilt.table) if rebuilt[p] != h[p])
    return ReconstructionReport(not mismatches, validate(rebuilt), mismatches, rebuilt)


def dependence_support(g: Mechanism, r: MissingnessPattern) -> frozenset[int]:
    """Variables whose single-coordinate changes move ``g(r | y)``."""
    support = set()
    for y in g.space.points():
        base = g.get(Point(y, r))
        if base is None:
            continue
        for i, var in enumerate(g.space.variables):
            if i in support:
                continue
            for level in var.levels:
                if level == y[i]:
                    continue
                other = g.get(Point(y[:i] + (level,) + y[i + 1:], r))
                if other is not None and other != base:
                    support.add(i)
                    break
    return frozenset(support)


@dataclass(frozen=True)
class FamilyMarResult:
    holds: bool
    offending: str | None = None
    verdict: MarVerdict | None = None
    vacuous: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.holds


def family_mar(family: DensityFamily, e: ObservableDataEvent) -> FamilyMarResult:
    """MAR on ``e`` for every member of the family.

    Members whose factorized mechanism is undefined on all of ``e`` are
    counted as vacuously MAR and listed in ``vacuous``.
    """
    vacuous = []
    for label, h in family.members:
        g = selection_factorize(h).mechanism
        v = is_realized_mar(g, e)
        if not v:
            return FamilyMarResult(False, label, v, tuple(vacuous))
        if v.excluded and len(v.excluded) == len(e.members):
            vacuous.append(label)
    return FamilyMarResult(True, vacuous=tuple(vacuous))

