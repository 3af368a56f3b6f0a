"""Exact probability tables on the full sample space and their factorizations.

A full density ``h`` assigns an exact rational to every point ``(y, r)``.
It factors two ways:

    h(y, r) = f(y) g(r | y)          selection model
            = p(r) p(y | r)          pattern mixture

Everything here is ``fractions.Fraction``; there are no tolerances.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import (
    InvalidDensityError,
    InvalidMechanismError,
    InvalidPointError,
    UndefinedMechanismError,
)
from .sample_space import (
    DataSpace,
    Levels,
    MissingnessPattern,
    PatternSet,
    Point,
    check_point,
    omega,
)

ZERO = Fraction(0)
ONE = Fraction(1)


def exact(value) -> Fraction:
    """Coerce ``value`` to a Fraction, refusing anything inexact."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ValueError(f"decimal literal {value!r} is not an exact rational")
        return Fraction(text)
    raise TypeError(f"{type(value).__name__} is not an exact rational")


def as_prob(value) -> Fraction:
    p = exact(value)
    if not 0 <= p <= 1:
        raise InvalidDensityError(f"probability {p} outside [0, 1]")
    return p


def fmt(p: Fraction | None) -> str:
    if p is None:
        return "undefined"
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def _freeze(table: Mapping) -> Mapping:
    return MappingProxyType(dict(table))


@dataclass(frozen=True, eq=False)
class ValidationReport:
    ok: bool
    problems: tuple[str, ...] = ()
    total: Fraction | None = None

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "invalid: " + "; ".join(self.problems)


@dataclass(frozen=True, eq=False)
class FullDensity:
    """A table ``Point -> Fraction`` over the full sample space.

    Construction checks that keys are points of the space and values are
    exact; completeness and total mass are left to :func:`validate`.
    """

    space: DataSpace
    patterns: PatternSet
    table: Mapping[Point, Fraction]

    def __post_init__(self) -> None:
        if self.patterns.arity != self.space.n:
            raise InvalidDensityError("pattern length differs from the number of variables")
        clean = {}
        for p, v in self.table.items():
            check_point(self.space, self.patterns, p)
            clean[p] = exact(v)
        object.__setattr__(self, "table", _freeze(clean))

    def __call__(self, y: Levels, r: MissingnessPattern) -> Fraction:
        return self.table.get(Point(tuple(y), r), ZERO)

    def __getitem__(self, p: Point) -> Fraction:
        return self.table.get(p, ZERO)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FullDensity):
            return NotImplemented
        return (self.space == other.space and self.patterns == other.patterns
                and dict(self.table) == dict(other.table))

    def mass(self, points: Iterable[Point]) -> Fraction:
        return sum((self[p] for p in points), ZERO)


class Mechanism:
    """A missingness mechanism ``g(r | y)`` as a table on the full sample space.

    Entries may be ``None`` ("undefined"), which happens when ``g`` comes from
    factorizing a density with ``f(y) = 0``. A row is either wholly undefined
    or a probability vector over the patterns summing to exactly 1.
    """

    __slots__ = ("space", "patterns", "table")

    def __init__(self, space: DataSpace, patterns: PatternSet,
                 table: Mapping[Point, Fraction | None]):
        if patterns.arity != space.n:
            raise InvalidMechanismError("pattern length differs from the number of variables")
        clean: dict[Point, Fraction | None] = {}
        for y in space.points():
            row = [table.get(Point(y, r), _MISSING) for r in patterns]
            if any(v is _MISSING for v in row):
                raise InvalidMechanismError(f"mechanism has no entry for some pattern at y={y}")
            if all(v is None for v in row):
                for r in patterns:
                    clean[Point(y, r)] = None
                continue
            if any(v is None for v in row):
                raise InvalidMechanismError(f"mechanism row y={y} is partly undefined")
            vals = [exact(v) for v in row]
            for r, v in zip(patterns, vals):
                if not 0 <= v <= 1:
                    raise InvalidMechanismError(f"g({r}|{y}) = {v} outside [0, 1]")
                clean[Point(y, r)] = v
            total = sum(vals, ZERO)
            if total != 1:
                raise InvalidMechanismError(
                    f"pattern probabilities at y={y} sum to {fmt(total)}, must sum to 1")
        extra = set(table) - set(clean)
        if extra:
            raise InvalidPointError(f"mechanism has entries outside the sample space: {sorted(extra)[:3]}")
        self.space = space
        self.patterns = patterns
        self.table = _freeze(clean)

    @classmethod
    def from_function(cls, space: DataSpace, patterns: PatternSet, fn) -> Mechanism:
        """Tabulate ``fn(r, y)`` over the whole sample space."""
        return cls(space, patterns, {p: fn(p.r, p.y) for p in omega(space, patterns)})

    def __call__(self, r: MissingnessPattern, y: Levels) -> Fraction:
        v = self.table[Point(tuple(y), r)]
        if v is None:
            raise UndefinedMechanismError(f"g({r}|{tuple(y)}) is undefined")
        return v

    def get(self, p: Point) -> Fraction | None:
        return self.table[p]

    @property
    def is_total(self) -> bool:
        return all(v is not None for v in self.table.values())

    def undefined_rows(self) -> list[Levels]:
        return [y for y in self.space.points() if self.table[Point(y, self.patterns[0])] is None]

    def replace(self, updates: Mapping[Point, Fraction]) -> Mechanism:
        table = dict(self.table)
        table.update(updates)
        return Mechanism(self.space, self.patterns, table)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mechanism):
            return NotImplemented
        return (self.space == other.space and self.patterns == other.patterns
                and dict(self.table) == dict(other.table))

    def __repr__(self) -> str:
        return f"Mechanism(n={self.space.n}, k={self.patterns.k})"


_MISSING = object()


@dataclass(frozen=True, eq=False)
class SelectionModel:
    """``h = f * g``: a marginal ``f`` over data vectors and a mechanism ``g``."""

    space: DataSpace
    patterns: PatternSet
    marginal: Mapping[Levels, Fraction]
    mechanism: Mechanism

    def __post_init__(self) -> None:
        f = {y: as_prob(self.marginal.get(y, ZERO)) for y in self.space.points()}
        if set(self.marginal) - set(f):
            raise InvalidDensityError("marginal has entries outside the data space")
        if sum(f.values(), ZERO) != 1:
            raise InvalidDensityError(f"marginal sums to {fmt(sum(f.values(), ZERO))}, must sum to 1")
        g = self.mechanism
        if g.space != self.space or g.patterns != self.patterns:
            raise InvalidMechanismError("mechanism is defined on a different sample space")
        for y, fy in f.items():
            if fy > 0 and g.table[Point(y, self.patterns[0])] is None:
                raise UndefinedMechanismError(f"g is undefined at y={y} where f(y) = {fmt(fy)} > 0")
        object.__setattr__(self, "marginal", _freeze(f))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SelectionModel):
            return NotImplemented
        return (self.space == other.space and self.patterns == other.patterns
                and dict(self.marginal) == dict(other.marginal) and self.mechanism == other.mechanism)


@dataclass(frozen=True, eq=False)
class PatternMixture:
    """``h = p(r) * p(y | r)``; components exist only for patterns with ``p(r) > 0``."""

    space: DataSpace
    patterns: PatternSet
    pattern_marginal: Mapping[MissingnessPattern, Fraction]
    components: Mapping[MissingnessPattern, Mapping[Levels, Fraction]]

    def __post_init__(self) -> None:
        pr = {r: as_prob(self.pattern_marginal.get(r, ZERO)) for r in self.patterns}
        if set(self.pattern_marginal) - set(pr):
            raise InvalidDensityError("pattern marginal has patterns outside the pattern set")
        if sum(pr.values(), ZERO) != 1:
            raise InvalidDensityError(f"pattern marginal sums to {fmt(sum(pr.values(), ZERO))}, must sum to 1")
        comps = {}
        for r, w in pr.items():
            if w == 0:
                if r in self.components:
                    raise InvalidDensityError(f"component given for pattern {r} with p(r) = 0")
                continue
            if r not in self.components:
                raise InvalidDensityError(f"missing component for pattern {r}")
            comp = self.components[r]
            if set(comp) - set(self.space.points()):
                raise InvalidDensityError(f"component {r} has entries outside the data space")
            c = {y: as_prob(comp.get(y, ZERO)) for y in self.space.points()}
            if sum(c.values(), ZERO) != 1:
                raise InvalidDensityError(f"component {r} sums to {fmt(sum(c.values(), ZERO))}, must sum to 1")
            comps[r] = _freeze(c)
        object.__setattr__(self, "pattern_marginal", _freeze(pr))
        object.__setattr__(self, "components", _freeze(comps))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PatternMixture):
            return NotImplemented
        return (self.space == other.space and self.patterns == other.patterns
                and dict(self.pattern_marginal) == dict(other.pattern_marginal)
                and {r: dict(c) for r, c in self.components.items()}
                == {r: dict(c) for r, c in other.components.items()})


@dataclass(frozen=True)
class DensityFamily:
    """A finite model of densities; member labels stand in for parameter values."""

    label: str
    members: tuple[tuple[str, FullDensity], ...] = field(compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise InvalidDensityError(f"family {self.label!r} is empty")
        first = self.members[0][1]
        for name, h in self.members[1:]:
            if h.space != first.space or h.patterns != first.patterns:
                raise InvalidDensityError(f"member {name!r} lives on a different sample space")

    @property
    def space(self) -> DataSpace:
        return self.members[0][1].space

    @property
    def patterns(self) -> PatternSet:
        return self.members[0][1].patterns


def uniform_density(space: DataSpace, patterns: PatternSet) -> FullDensity:
    w = Fraction(1, space.size * patterns.k)
    return FullDensity(space, patterns, {p: w for p in omega(space, patterns)})


def validate(h: FullDensity) -> ValidationReport:
    problems = []
    missing = [p for p in omega(h.space, h.patterns) if p not in h.table]
    if missing:
        problems.append(f"incomplete table: {len(missing)} point(s) without an entry, first {missing[0]}")
    bad = [(p, v) for p, v in h.table.items() if not 0 <= v <= 1]
    if bad:
        p, v = bad[0]
        problems.append(f"entry out of [0, 1]: h{p} = {fmt(v)}")
    total = sum(h.table.values(), ZERO)
    if total != 1:
        problems.append(f"mass ≠ 1: total is {fmt(total)}")
    return ValidationReport(not problems, tuple(problems), total)


def require_valid(h: FullDensity) -> None:
    report = validate(h)
    if not report:
        raise InvalidDensityError(str(report))


def marginal_y(h: FullDensity) -> dict[Levels, Fraction]:
    """``f(y) = sum_r h(y, r)``."""
    return {y: sum((h(y, r) for r in h.patterns), ZERO) for y in h.space.points()}


def marginal_r(h: FullDensity) -> dict[MissingnessPattern, Fraction]:
    """``p(r) = sum_y h(y, r)``."""
    return {r: sum((h(y, r) for y in h.space.points()), ZERO) for r in h.patterns}


def selection_factorize(h: FullDensity) -> SelectionModel:
    """Split ``h`` into ``f`` and ``g``; ``g`` is left undefined where ``f(y) = 0``."""
    require_valid(h)
    f = marginal_y(h)
    table: dict[Point, Fraction | None] = {}
    for y, fy in f.items():
        for r in h.patterns:
            table[Point(y, r)] = h(y, r) / fy if fy else None
    return SelectionModel(h.space, h.patterns, f, Mechanism(h.space, h.patterns, table))


def pattern_mixture_factorize(h: FullDensity) -> PatternMixture:
    require_valid(h)
    pr = marginal_r(h)
    comps = {r: {y: h(y, r) / w for y in h.space.points()} for r, w in pr.items() if w}
    return PatternMixture(h.space, h.patterns, pr, comps)


def recompose(sm: SelectionModel) -> FullDensity:
    table = {}
    for p, gv in sm.mechanism.table.items():
        fy = sm.marginal[p.y]
        # 0 * undefined = 0; SelectionModel guarantees g is defined where f > 0
        table[p] = fy * gv if fy else ZERO
    return FullDensity(sm.space, sm.patterns, table)


def recompose_pm(pm: PatternMixture) -> FullDensity:
    table = {}
    for p in omega(pm.space, pm.patterns):
        w = pm.pattern_marginal[p.r]
        table[p] = w * pm.components[p.r][p.y] if w else ZERO
    return FullDensity(pm.space, pm.patterns, table)


def mixture_average(pm: PatternMixture) -> dict[Levels, Fraction]:
    """``sum_r p(r) p(y | r)``, which must equal the marginal ``f(y)``."""
    return {
        y: sum((w * pm.components[r][y] for r, w in pm.pattern_marginal.items() if w), ZERO)
        for y in pm.space.points()
    }


def density_fingerprint(h: FullDensity) -> str:
    """Short content hash identifying a density in dataset provenance."""
    lines = [" ".join(v.name + ":" + ",".join(map(str, v.levels)) for v in h.space.variables)]
    lines.append(" ".join(map(str, h.patterns)))
    for p in sorted(h.table):
        lines.append(f"{p.r} {' '.join(map(str, p.y))} {fmt(h[p])}")
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]
