"""Line-oriented text format for spaces, patterns and full distributions.

Grammar (UTF-8, LF line endings, ``#`` starts a comment, tokens separated
by whitespace, leading indentation ignored)::

    space
    NAME level level ...          one line per variable, integer levels
    patterns
    BITS                          one per line, all-ones first
    then exactly one of:
      density
      BITS level... P             one line per point of the sample space
      selection
      marginal
      level... P
      mechanism
      level... BITS P             P may be the word ``undefined``
      mixture
      pattern-marginal
      BITS P
      component BITS              one block per pattern with p(r) > 0
      level... P

``P`` is an exact rational ``p/q`` (q > 0) or an integer. Decimal literals
are rejected rather than rounded.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Union

from .distribution import (
    ZERO,
    FullDensity,
    Mechanism,
    PatternMixture,
    SelectionModel,
    fmt,
    marginal_y,
    recompose,
    recompose_pm,
    require_valid,
    selection_factorize,
)
from .errors import FiniteMarError, InvalidSpaceError, ModelFileError
from .sample_space import DataSpace, Levels, MissingnessPattern, PatternSet, Point, Variable, omega

_PROB = re.compile(r"^(\d+)(?:/(\d+))?$")
_INT = re.compile(r"^-?\d+$")
_TOP = ("space", "patterns", "density", "selection", "mixture")
_SUB = ("marginal", "mechanism", "pattern-marginal", "component")

ModelObject = Union[FullDensity, SelectionModel, PatternMixture]


@dataclass(frozen=True, eq=False)
class Model:
    """A parsed model file; ``obj`` is whichever form the file supplied."""

    space: DataSpace
    patterns: PatternSet
    obj: ModelObject

    @property
    def kind(self) -> str:
        if isinstance(self.obj, FullDensity):
            return "density"
        if isinstance(self.obj, SelectionModel):
            return "selection"
        return "mixture"

    @cached_property
    def density(self) -> FullDensity:
        if isinstance(self.obj, FullDensity):
            return self.obj
        if isinstance(self.obj, SelectionModel):
            return recompose(self.obj)
        return recompose_pm(self.obj)

    @cached_property
    def mechanism(self) -> Mechanism:
        """The supplied mechanism for selection files, else the factorized one."""
        if isinstance(self.obj, SelectionModel):
            return self.obj.mechanism
        return selection_factorize(self.density).mechanism

    @cached_property
    def marginal(self) -> dict[Levels, Fraction]:
        if isinstance(self.obj, SelectionModel):
            return dict(self.obj.marginal)
        return marginal_y(self.density)


def _prob(tok: str, line: int) -> Fraction:
    m = _PROB.match(tok)
    if not m:
        if re.match(r"^-?[\d.]+([eE][-+]?\d+)?$", tok) and ("." in tok or "e" in tok.lower()):
            raise ModelFileError(f"decimal probability {tok!r} rejected; write an exact rational p/q", line)
        raise ModelFileError(f"{tok!r} is not a probability literal (p/q or integer)", line)
    num, den = int(m.group(1)), int(m.group(2) or 1)
    if den == 0:
        raise ModelFileError(f"{tok!r} has a zero denominator", line)
    value = Fraction(num, den)
    if value > 1:
        raise ModelFileError(f"probability {tok} exceeds 1", line)
    return value


def _level(tok: str, line: int) -> int:
    if not _INT.match(tok):
        raise ModelFileError(f"level {tok!r} is not an integer", line)
    return int(tok)


def _tokenize(text: str):
    for no, raw in enumerate(text.split("\n"), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield no, body.split()


def _is_header(toks: list[str]) -> bool:
    return (len(toks) == 1 and toks[0] in _TOP + _SUB) or (len(toks) == 2 and toks[0] == "component")


class _Parser:
    def __init__(self, text: str):
        self.lines = list(_tokenize(text))
        self.pos = 0

    def peek(self):
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def take(self):
        item = self.lines[self.pos]
        self.pos += 1
        return item

    def expect_header(self, *names: str) -> tuple[int, list[str]]:
        item = self.peek()
        if item is None:
            raise ModelFileError(f"unexpected end of file, expected section {' or '.join(names)}")
        no, toks = item
        if not _is_header(toks):
            if len(toks) == 1:
                raise ModelFileError(f"unknown section {toks[0]!r}", no)
            raise ModelFileError(f"expected section {' or '.join(names)}, found data line", no)
        if toks[0] not in names:
            raise ModelFileError(f"section {toks[0]!r} not allowed here, expected {' or '.join(names)}", no)
        return self.take()

    def body(self):
        """Data lines up to the next header."""
        out = []
        while (item := self.peek()) is not None and not _is_header(item[1]):
            no, toks = item
            if len(toks) == 1 and not set(toks[0]) <= {"0", "1"}:
                raise ModelFileError(f"unknown section {toks[0]!r}", no)
            out.append(self.take())
        return out


def _pattern(tok: str, n: int, patterns: PatternSet | None, line: int) -> MissingnessPattern:
    if not tok or set(tok) - {"0", "1"}:
        raise ModelFileError(f"{tok!r} is not a bitstring", line)
    if len(tok) != n:
        raise ModelFileError(f"pattern {tok} has length {len(tok)}, expected {n}", line)
    r = MissingnessPattern.parse(tok)
    if patterns is not None and r not in patterns:
        raise ModelFileError(f"pattern {tok} is not in the pattern set", line)
    return r


def _levels(toks: list[str], space: DataSpace, line: int) -> Levels:
    y = tuple(_level(t, line) for t in toks)
    for v, var in zip(y, space.variables):
        if v not in var.levels:
            raise ModelFileError(f"{v} is not a level of {var.name}", line)
    return y


def _width(toks, expected, what, line):
    if len(toks) != expected:
        raise ModelFileError(f"{what} line needs {expected} tokens, found {len(toks)}", line)


def parse_model(data: bytes | str, *, check: bool = True) -> Model:
    """Parse a model file.

    With ``check`` a ``density`` table must be complete with total mass 1;
    without it, density defects are left for :func:`~finitemar.distribution.validate`.
    Selection and mixture files are always checked since their objects
    cannot exist otherwise.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelFileError(f"file is not UTF-8: {exc}") from None
    p = _Parser(data)

    head, _ = p.expect_header("space")
    variables = []
    for no, toks in p.body():
        if len(toks) < 2:
            raise ModelFileError("variable line needs a name and at least one level", no)
        try:
            variables.append(Variable(toks[0], tuple(_level(t, no) for t in toks[1:])))
        except InvalidSpaceError as exc:
            raise ModelFileError(str(exc), no) from None
    try:
        space = DataSpace(tuple(variables))
    except InvalidSpaceError as exc:
        raise ModelFileError(str(exc), head) from None
    n = space.n

    head, _ = p.expect_header("patterns")
    pats = []
    for no, toks in p.body():
        _width(toks, 1, "pattern", no)
        r = _pattern(toks[0], n, None, no)
        if r in pats:
            raise ModelFileError(f"duplicate pattern {toks[0]}", no)
        if not pats and not r.is_complete:
            raise ModelFileError("the first pattern must be all ones", no)
        pats.append(r)
    try:
        patterns = PatternSet(tuple(pats))
    except InvalidSpaceError as exc:
        raise ModelFileError(str(exc), head) from None

    head, (kind, *_) = p.expect_header("density", "selection", "mixture")
    try:
        if kind == "density":
            obj = _parse_density(p, space, patterns, head, check)
        elif kind == "selection":
            obj = _parse_selection(p, space, patterns, head)
        else:
            obj = _parse_mixture(p, space, patterns, head)
    except ModelFileError:
        raise
    except FiniteMarError as exc:
        raise ModelFileError(str(exc), head) from None
    if (item := p.peek()) is not None:
        raise ModelFileError(f"unexpected content after the {kind} section", item[0])
    return Model(space, patterns, obj)


def _parse_density(p, space, patterns, head, check):
    n = space.n
    table: dict[Point, Fraction] = {}
    for no, toks in p.body():
        _width(toks, n + 2, "density", no)
        pt = Point(_levels(toks[1:-1], space, no), _pattern(toks[0], n, patterns, no))
        if pt in table:
            raise ModelFileError(f"duplicate entry for {pt}", no)
        table[pt] = _prob(toks[-1], no)
    h = FullDensity(space, patterns, table)
    if check:
        try:
            require_valid(h)
        except FiniteMarError as exc:
            raise ModelFileError(str(exc), head) from None
    return h


def _parse_selection(p, space, patterns, head):
    n = space.n
    mhead, _ = p.expect_header("marginal")
    f: dict[Levels, Fraction] = {}
    for no, toks in p.body():
        _width(toks, n + 1, "marginal", no)
        y = _levels(toks[:-1], space, no)
        if y in f:
            raise ModelFileError(f"duplicate marginal entry for {y}", no)
        f[y] = _prob(toks[-1], no)
    missing = [y for y in space.points() if y not in f]
    if missing:
        raise ModelFileError(f"marginal has no entry for {missing[0]}", mhead)
    total = sum(f.values(), ZERO)
    if total != 1:
        raise ModelFileError(f"marginal sums to {fmt(total)}, must sum to 1", mhead)

    ghead, _ = p.expect_header("mechanism")
    g: dict[Point, Fraction | None] = {}
    first_line: dict[Levels, int] = {}
    for no, toks in p.body():
        _width(toks, n + 2, "mechanism", no)
        y = _levels(toks[:n], space, no)
        pt = Point(y, _pattern(toks[n], n, patterns, no))
        if pt in g:
            raise ModelFileError(f"duplicate mechanism entry for {pt}", no)
        g[pt] = None if toks[-1] == "undefined" else _prob(toks[-1], no)
        first_line.setdefault(y, no)
    for y in space.points():
        row = [Point(y, r) for r in patterns]
        absent = [pt for pt in row if pt not in g]
        if absent:
            raise ModelFileError(f"mechanism has no entry for {absent[0]}", first_line.get(y, ghead))
        vals = [g[pt] for pt in row]
        if all(v is None for v in vals):
            continue
        if any(v is None for v in vals):
            raise ModelFileError(f"mechanism row y={y} is partly undefined", first_line[y])
        total = sum(vals, ZERO)
        if total != 1:
            raise ModelFileError(
                f"mechanism probabilities at y={y} sum to {fmt(total)}; "
                "for each y they must sum to 1 over the patterns", first_line[y])
    return SelectionModel(space, patterns, f, Mechanism(space, patterns, g))


def _parse_mixture(p, space, patterns, head):
    n = space.n
    phead, _ = p.expect_header("pattern-marginal")
    pr: dict[MissingnessPattern, Fraction] = {}
    for no, toks in p.body():
        _width(toks, 2, "pattern-marginal", no)
        r = _pattern(toks[0], n, patterns, no)
        if r in pr:
            raise ModelFileError(f"duplicate pattern-marginal entry for {r}", no)
        pr[r] = _prob(toks[1], no)
    total = sum(pr.values(), ZERO)
    if total != 1:
        raise ModelFileError(f"pattern marginal sums to {fmt(total)}, must sum to 1", phead)
    comps: dict[MissingnessPattern, dict[Levels, Fraction]] = {}
    while p.peek() is not None:
        chead, toks = p.expect_header("component")
        if len(toks) != 2:
            raise ModelFileError("component header needs a pattern", chead)
        r = _pattern(toks[1], n, patterns, chead)
        if r in comps:
            raise ModelFileError(f"duplicate component for {r}", chead)
        if not pr.get(r):
            raise ModelFileError(f"component for pattern {r} whose probability is 0", chead)
        comp: dict[Levels, Fraction] = {}
        for no, dtoks in p.body():
            _width(dtoks, n + 1, "component", no)
            y = _levels(dtoks[:-1], space, no)
            if y in comp:
                raise ModelFileError(f"duplicate component entry for {y}", no)
            comp[y] = _prob(dtoks[-1], no)
        total = sum(comp.values(), ZERO)
        if total != 1:
            raise ModelFileError(f"component {r} sums to {fmt(total)}, must sum to 1", chead)
        comps[r] = comp
    for r, w in pr.items():
        if w and r not in comps:
            raise ModelFileError(f"no component block for pattern {r}", phead)
    return PatternMixture(space, patterns, pr, comps)


def _header(space: DataSpace, patterns: PatternSet) -> list[str]:
    lines = ["space"]
    lines += [" ".join([v.name, *map(str, v.levels)]) for v in space.variables]
    lines.append("patterns")
    lines += [str(r) for r in patterns]
    return lines


def _ys(y: Levels) -> str:
    return " ".join(map(str, y))


def serialize_model(obj: ModelObject | Model) -> str:
    """Canonical text: no comments, no indentation, tables in enumeration order."""
    if isinstance(obj, Model):
        obj = obj.obj
    lines = _header(obj.space, obj.patterns)
    if isinstance(obj, FullDensity):
        lines.append("density")
        lines += [f"{p.r} {_ys(p.y)} {fmt(obj[p])}" for p in omega(obj.space, obj.patterns)]
    elif isinstance(obj, SelectionModel):
        lines += ["selection", "marginal"]
        lines += [f"{_ys(y)} {fmt(obj.marginal[y])}" for y in obj.space.points()]
        lines.append("mechanism")
        for y in obj.space.points():
            lines += [f"{_ys(y)} {r} {fmt(obj.mechanism.get(Point(y, r)))}" for r in obj.patterns]
    elif isinstance(obj, PatternMixture):
        lines += ["mixture", "pattern-marginal"]
        lines += [f"{r} {fmt(obj.pattern_marginal[r])}" for r in obj.patterns]
        for r in obj.patterns:
            if r in obj.components:
                lines.append(f"component {r}")
                lines += [f"{_ys(y)} {fmt(obj.components[r][y])}" for y in obj.space.points()]
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    return "\n".join(lines) + "\n"


def load_model(path, *, check: bool = True) -> Model:
    with open(path, "rb") as fh:
        return parse_model(fh.read(), check=check)
