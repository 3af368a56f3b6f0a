"""Finite data spaces, missingness patterns and observable data events.

The data space is the full product grid of the variables' levels. A point of
the full sample space pairs a complete data vector ``y`` with a missingness
pattern ``r`` (1 = observed). Two points are equivalent when they share the
pattern and agree on the coordinates that pattern observes; the equivalence
classes are the observable data events, which partition the sample space.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import InvalidPointError, InvalidSpaceError

Levels = tuple[int, ...]


@dataclass(frozen=True)
class Variable:
    name: str
    levels: Levels

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.name or any(c.isspace() for c in self.name):
            raise InvalidSpaceError(f"bad variable name {self.name!r}")
        if not self.levels:
            raise InvalidSpaceError(f"variable {self.name} has no levels")
        if any(isinstance(v, bool) or not isinstance(v, int) for v in self.levels):
            raise InvalidSpaceError(f"variable {self.name}: levels must be integers")
        if len(set(self.levels)) != len(self.levels):
            raise InvalidSpaceError(f"variable {self.name}: duplicate level codes")


@dataclass(frozen=True)
class DataSpace:
    """The set of complete data vectors: the product of the variables' levels."""

    variables: tuple[Variable, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        if not self.variables:
            raise InvalidSpaceError("a data space needs at least one variable")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise InvalidSpaceError(f"duplicate variable names in {names}")

    @classmethod
    def from_level_counts(cls, counts: Sequence[int], prefix: str = "Y") -> DataSpace:
        """Variables ``Y1..Yn`` with levels ``0..count-1``."""
        return cls(tuple(Variable(f"{prefix}{i + 1}", tuple(range(c))) for i, c in enumerate(counts)))

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def size(self) -> int:
        out = 1
        for v in self.variables:
            out *= len(v.levels)
        return out

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InvalidSpaceError(f"no variable named {name!r}") from None

    def points(self) -> Iterator[Levels]:
        """All data vectors, in lexicographic order of the level lists."""
        return itertools.product(*(v.levels for v in self.variables))

    def contains(self, y: Sequence[int]) -> bool:
        return len(y) == self.n and all(val in var.levels for val, var in zip(y, self.variables))

    def subgrid(self, indices: Sequence[int]) -> Iterator[Levels]:
        """Every assignment of values to the variables at ``indices``."""
        return itertools.product(*(self.variables[i].levels for i in indices))


@dataclass(frozen=True, order=True)
class MissingnessPattern:
    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "bits", tuple(self.bits))
        if not self.bits:
            raise InvalidSpaceError("empty missingness pattern")
        if any(b not in (0, 1) or isinstance(b, bool) for b in self.bits):
            raise InvalidSpaceError(f"pattern bits must be 0 or 1, got {self.bits}")

    @classmethod
    def parse(cls, text: str) -> MissingnessPattern:
        if not text or set(text) - {"0", "1"}:
            raise InvalidSpaceError(f"not a bitstring: {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def complete(cls, n: int) -> MissingnessPattern:
        return cls((1,) * n)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def observed(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    @property
    def missing(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if not b)

    @property
    def n_observed(self) -> int:
        # r . r
        return sum(b * b for b in self.bits)

    @property
    def is_complete(self) -> bool:
        return all(self.bits)


@dataclass(frozen=True)
class PatternSet:
    """Distinct patterns with the all-ones pattern in slot 0.

    The all-ones pattern must be present; it is moved to the front and the
    rest keep the order they were supplied in.
    """

    patterns: tuple[MissingnessPattern, ...]

    def __post_init__(self) -> None:
        pats = tuple(self.patterns)
        if not pats:
            raise InvalidSpaceError("pattern set is empty")
        n = len(pats[0])
        if any(len(p) != n for p in pats):
            raise InvalidSpaceError("patterns have different lengths")
        if len(set(pats)) != len(pats):
            raise InvalidSpaceError("duplicate patterns")
        full = MissingnessPattern.complete(n)
        if full not in pats:
            raise InvalidSpaceError("the all-ones (complete-case) pattern is required")
        pats = (full,) + tuple(p for p in pats if p != full)
        object.__setattr__(self, "patterns", pats)

    @classmethod
    def parse(cls, texts: Iterable[str]) -> PatternSet:
        return cls(tuple(MissingnessPattern.parse(t) for t in texts))

    def __iter__(self) -> Iterator[MissingnessPattern]:
        return iter(self.patterns)

    def __len__(self) -> int:
        return len(self.patterns)

    def __getitem__(self, i: int) -> MissingnessPattern:
        return self.patterns[i]

    def __contains__(self, r: object) -> bool:
        return r in self.patterns

    @property
    def k(self) -> int:
        return len(self.patterns)

    @property
    def arity(self) -> int:
        return len(self.patterns[0])

    def common_observed(self) -> tuple[int, ...]:
        """Indices observed under every pattern."""
        return tuple(i for i in range(self.arity) if all(p.bits[i] for p in self.patterns))


@dataclass(frozen=True, order=True)
class Point:
    y: Levels
    r: MissingnessPattern

    def __str__(self) -> str:
        return f"(({', '.join(map(str, self.y))}), {self.r})"


@dataclass(frozen=True)
class ObservableDataEvent:
    """All points sharing ``pattern`` and the observed values ``observed_values``.

    ``observed_values`` is a tuple of ``(variable index, level)`` pairs in
    index order; ``assignment`` gives it as a dict.
    """

    pattern: MissingnessPattern
    observed_values: tuple[tuple[int, int], ...]
    members: tuple[Point, ...] = field(compare=False)

    @property
    def assignment(self) -> dict[int, int]:
        return dict(self.observed_values)

    @property
    def observed_tuple(self) -> Levels:
        return tuple(v for _, v in self.observed_values)

    @property
    def key(self) -> tuple[MissingnessPattern, Levels]:
        """The element of the observable data this event corresponds to."""
        return (self.pattern, self.observed_tuple)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, p: object) -> bool:
        return isinstance(p, Point) and p.r == self.pattern and project_observed(p.y, p.r) == self.observed_tuple

    def describe(self, space: DataSpace | None = None) -> str:
        if space is None:
            obs = ", ".join(f"y[{i}]={v}" for i, v in self.observed_values)
        else:
            obs = ", ".join(f"{space.variables[i].name}={v}" for i, v in self.observed_values)
        return f"r={self.pattern} {{{obs}}}"


def _check_lengths(y: Sequence[int], r: MissingnessPattern) -> None:
    if len(y) != len(r):
        raise InvalidPointError(f"data vector of length {len(y)} does not match pattern {r}")


def project_observed(y: Sequence[int], r: MissingnessPattern) -> Levels:
    """Entries of ``y`` that ``r`` observes, in index order."""
    _check_lengths(y, r)
    return tuple(v for v, b in zip(y, r.bits) if b)


def project_missing(y: Sequence[int], r: MissingnessPattern) -> Levels:
    """Entries of ``y`` that ``r`` leaves missing, in index order."""
    _check_lengths(y, r)
    return tuple(v for v, b in zip(y, r.bits) if not b)


def merge(observed: Sequence[int], missing: Sequence[int], r: MissingnessPattern) -> Levels:
    """Inverse of the two projections: reassemble ``y`` from its parts."""
    if len(observed) != r.n_observed or len(missing) != len(r) - r.n_observed:
        raise InvalidPointError(f"parts of lengths {len(observed)}/{len(missing)} do not fit pattern {r}")
    obs, mis = iter(observed), iter(missing)
    return tuple(next(obs) if b else next(mis) for b in r.bits)


def check_point(space: DataSpace, patterns: PatternSet, p: Point) -> None:
    if p.r not in patterns:
        raise InvalidPointError(f"pattern {p.r} is not in the pattern set")
    if not space.contains(p.y):
        raise InvalidPointError(f"{p.y} is not a data vector of the space")


def omega(space: DataSpace, patterns: PatternSet) -> Iterator[Point]:
    """Every point of the full sample space, pattern-major."""
    for r in patterns:
        for y in space.points():
            yield Point(y, r)


def _event(space: DataSpace, r: MissingnessPattern, observed: Levels) -> ObservableDataEvent:
    missing_idx = r.missing
    members = tuple(Point(merge(observed, mis, r), r) for mis in space.subgrid(missing_idx))
    return ObservableDataEvent(r, tuple(zip(r.observed, observed)), members)


def observable_event(space: DataSpace, patterns: PatternSet, p: Point) -> ObservableDataEvent:
    """The observable data event containing ``p``."""
    check_point(space, patterns, p)
    return _event(space, p.r, project_observed(p.y, p.r))


def event_for(space: DataSpace, patterns: PatternSet, r: MissingnessPattern,
              observed: Mapping[int, int] | Sequence[int]) -> ObservableDataEvent:
    """Build an event from a pattern and its observed values.

    ``observed`` is either a mapping from variable index to level or the
    observed values in index order.
    """
    if r not in patterns:
        raise InvalidPointError(f"pattern {r} is not in the pattern set")
    if isinstance(observed, Mapping):
        if set(observed) != set(r.observed):
            raise InvalidPointError(f"observed indices {sorted(observed)} do not match pattern {r}")
        values = tuple(observed[i] for i in r.observed)
    else:
        values = tuple(observed)
        if len(values) != r.n_observed:
            raise InvalidPointError(f"{len(values)} observed values for pattern {r}")
    for i, v in zip(r.observed, values):
        if v not in space.variables[i].levels:
            raise InvalidPointError(f"{v} is not a level of {space.variables[i].name}")
    return _event(space, r, values)


def enumerate_events(space: DataSpace, patterns: PatternSet) -> list[ObservableDataEvent]:
    """The partition of the full sample space into observable data events.

    Ordered by pattern (pattern-set order), then observed values
    lexicographically.
    """
    return [_event(space, r, obs) for r in patterns for obs in space.subgrid(r.observed)]


def ob_equivalent(p1: Point, p2: Point) -> bool:
    if len(p1.y) != len(p2.y) or len(p1.r) != len(p2.r):
        raise InvalidPointError("points come from spaces of different arity")
    return p1.r == p2.r and project_observed(p1.y, p1.r) == project_observed(p2.y, p2.r)
