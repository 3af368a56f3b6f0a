"""Three figure layouts rendered as hand-written SVG or aligned ASCII.

1. full distribution: ``p(r)`` row, one ``p(y|r)`` histogram per pattern
   and the marginal ``f(y)``, with the mixture identity checked exactly;
2. one observable data event inside its stratum, bars showing ``g(r|y)``;
3. ``p(y|r)`` against ``f(y)`` restricted to one event, with the
   proportionality constant when the two have the same shape.

Bar heights are exact probabilities scaled to the tallest bar in the panel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from xml.sax.saxutils import escape

from .distribution import ZERO, fmt, marginal_r, mixture_average, pattern_mixture_factorize
from .errors import FiniteMarError, ZeroProbabilityEventError
from .mar_analysis import (
    drawn_at_random_check,
    is_everywhere_mar,
    is_realized_mar,
    shape_constant,
    shape_witness,
)
from .modelfile import Model
from .sample_space import ObservableDataEvent, Point, enumerate_events

FIGURES = (1, 2, 3)
ASCII_WIDTH = 40


@dataclass
class Histogram:
    title: str
    labels: list[str]
    values: list[Fraction]
    highlight: set[int] = field(default_factory=set)
    note: str = ""


@dataclass
class Panel:
    title: str
    lines: list[str]
    histograms: list[Histogram]
    footer: list[str] = field(default_factory=list)


def _ylabel(y) -> str:
    return ",".join(map(str, y))


def default_event(model: Model) -> ObservableDataEvent:
    """Witness event when ``g`` is not everywhere MAR, else the first positive
    event with two or more members."""
    verdict = is_everywhere_mar(model.mechanism)
    if verdict.event is not None:
        return verdict.event
    events = enumerate_events(model.space, model.patterns)
    h = model.density
    for e in events:
        if len(e.members) > 1 and h.mass(e.members) > 0:
            return e
    for e in events:
        if h.mass(e.members) > 0:
            return e
    return events[0]


def full_distribution_panel(model: Model) -> Panel:
    h = model.density
    pm = pattern_mixture_factorize(h)
    pr = marginal_r(h)
    ys = list(model.space.points())
    labels = [_ylabel(y) for y in ys]
    row = " + ".join(f"p({r})={fmt(pr[r])}" for r in model.patterns)
    lines = [f"{row} = {fmt(sum(pr.values(), ZERO))}"]
    hists = []
    for r in model.patterns:
        if r in pm.components:
            hists.append(Histogram(f"p(y | r={r})", labels, [pm.components[r][y] for y in ys]))
        else:
            hists.append(Histogram(f"p(y | r={r})", labels, [ZERO] * len(ys), note="p(r) = 0: no component"))
    f = model.marginal
    hists.append(Histogram("f(y)", labels, [f[y] for y in ys]))
    identity = mixture_average(pm) == {y: f[y] for y in ys}
    g = model.mechanism
    rows_ok = all(sum((g(r, y) for r in model.patterns), ZERO) == 1
                  for y in ys if g.get(Point(y, model.patterns[0])) is not None)
    footer = [
        "mixture identity f(y) = sum_r p(r) p(y|r): " + ("holds exactly" if identity else "FAILS"),
        "sum_r g(r|y) = 1 for every y: " + ("holds exactly" if rows_ok else "FAILS"),
    ]
    return Panel("Full distribution and its two factorisations", lines, hists, footer)


def event_panel(model: Model, e: ObservableDataEvent) -> Panel:
    g = model.mechanism
    r = e.pattern
    ys = list(model.space.points())
    member_ys = {m.y for m in e.members}
    values = [g.get(Point(y, r)) or ZERO for y in ys]
    hist = Histogram(f"g(r={r} | y) over the stratum r={r}", [_ylabel(y) for y in ys], values,
                     {i for i, y in enumerate(ys) if y in member_ys})
    verdict = is_realized_mar(g, e)
    obs = ", ".join(f"{model.space.variables[i].name}={v}" for i, v in e.observed_values)
    lines = [f"observable data event: r={r}, observed {{{obs or 'nothing'}}}",
             f"{len(e.members)} member(s) marked with *"]
    vals = sorted({g.get(m) for m in e.members if g.get(m) is not None})
    footer = [f"values of g on the event: {{{', '.join(fmt(v) for v in vals)}}}",
              "MAR on this event" if verdict else "not MAR on this event"]
    return Panel("Observable data event within its stratum", lines, [hist], footer)


def shape_panel(model: Model, e: ObservableDataEvent) -> Panel:
    h = model.density
    if h.mass(e.members) == 0:
        raise ZeroProbabilityEventError("figure 3 needs an event of positive probability")
    pr = marginal_r(h)[e.pattern]
    f = model.marginal
    labels = [_ylabel(m.y) for m in e.members]
    comp = [h[m] / pr for m in e.members]
    marg = [f[m.y] for m in e.members]
    c = shape_constant(h, e)
    highlight: set[int] = set()
    if c is not None:
        footer = [f"same shape: p(y|r) = c * f(y) on the event with c = {fmt(c)}"]
    else:
        a, b = shape_witness(h, e)
        ia, ib = e.members.index(a), e.members.index(b)
        highlight = {ia, ib}
        footer = ["not proportional: shapes differ on the event",
                  f"witness bars marked with *: y = {labels[ia]} and y = {labels[ib]}"]
    footer.append("drawn at random: " + ("yes" if drawn_at_random_check(h, e) else "no"))
    lines = [f"event: {e.describe(model.space)}", f"p(r={e.pattern}) = {fmt(pr)}"]
    hists = [Histogram(f"p(y | r={e.pattern}) on the event", labels, comp, highlight),
             Histogram("f(y) on the event", labels, marg, highlight)]
    return Panel("Pattern-mixture component against the marginal", lines, hists, footer)


def build_panel(model: Model, figure: int, event: ObservableDataEvent | None = None) -> Panel:
    if figure == 1:
        return full_distribution_panel(model)
    if figure in (2, 3):
        e = default_event(model) if event is None else event
        return event_panel(model, e) if figure == 2 else shape_panel(model, e)
    raise FiniteMarError(f"unknown figure {figure!r}; choose 1, 2 or 3")


def render_ascii(panel: Panel) -> str:
    out = [panel.title, "=" * len(panel.title), *panel.lines, ""]
    for hist in panel.histograms:
        out.append(hist.title)
        top = max(hist.values, default=ZERO)
        lw = max((len(s) for s in hist.labels), default=0)
        for i, (lab, v) in enumerate(zip(hist.labels, hist.values)):
            n = round(v / top * ASCII_WIDTH) if top else 0
            mark = "*" if i in hist.highlight else " "
            out.append(f" {mark}{lab.rjust(lw)} |{'#' * n}{' ' * (ASCII_WIDTH - n)}| {fmt(v)}")
        if hist.note:
            out.append(f"  ({hist.note})")
        out.append("")
    out += panel.footer
    return "\n".join(out) + "\n"


def render_svg(panel: Panel) -> str:
    bar_w, gap, plot_h, pad = 28, 6, 120, 20
    widths = [len(hh.values) * (bar_w + gap) + gap for hh in panel.histograms]
    width = max([360, *(w + 2 * pad for w in widths)])
    top_lines = len(panel.lines) + 2
    height = pad + top_lines * 16 + len(panel.histograms) * (plot_h + 70) + len(panel.footer) * 16 + pad

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="11">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    y = pad + 4
    parts.append(f'<text x="{pad}" y="{y}" font-size="14" font-weight="bold">{escape(panel.title)}</text>')
    y += 20
    for line in panel.lines:
        parts.append(f'<text x="{pad}" y="{y}">{escape(line)}</text>')
        y += 16
    for hist in panel.histograms:
        y += 14
        parts.append(f'<text x="{pad}" y="{y}" font-weight="bold">{escape(hist.title)}</text>')
        base = y + 10 + plot_h
        top = max(hist.values, default=ZERO)
        parts.append(f'<line x1="{pad}" y1="{base}" x2="{pad + widths[panel.histograms.index(hist)]}" '
                     f'y2="{base}" stroke="black"/>')
        for i, (lab, v) in enumerate(zip(hist.labels, hist.values)):
            bh = float(v / top) * plot_h if top else 0.0
            x = pad + gap + i * (bar_w + gap)
            fill = "#d62728" if i in hist.highlight else "#4c72b0"
            parts.append(f'<rect x="{x}" y="{base - bh:.2f}" width="{bar_w}" height="{bh:.2f}" '
                         f'fill="{fill}"><title>{escape(lab)}: {fmt(v)}</title></rect>')
            parts.append(f'<text x="{x + bar_w / 2:.1f}" y="{base + 12}" text-anchor="middle" '
                         f'font-size="9">{escape(lab)}</text>')
            parts.append(f'<text x="{x + bar_w / 2:.1f}" y="{base - bh - 3:.2f}" text-anchor="middle" '
                         f'font-size="8">{escape(fmt(v))}</text>')
        if hist.note:
            parts.append(f'<text x="{pad}" y="{base + 26}" font-style="italic">{escape(hist.note)}</text>')
        y = base + 40
    for line in panel.footer:
        y += 16
        parts.append(f'<text x="{pad}" y="{y}">{escape(line)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_figure(model: Model, figure: int, fmt_: str = "svg",
                event: ObservableDataEvent | None = None) -> bytes:
    panel = build_panel(model, figure, event)
    if fmt_ == "svg":
        return render_svg(panel).encode()
    if fmt_ == "ascii":
        return render_ascii(panel).encode()
    raise FiniteMarError(f"unknown figure format {fmt_!r}")
