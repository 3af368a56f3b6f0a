"""Command line entry point: ``finitemar <command> ...``.

Exit status: 0 on success, 1 when an assertion command (``validate``,
``check``) finds its property violated, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import __version__
from .distribution import fmt, pattern_mixture_factorize, selection_factorize, validate
from .errors import FiniteMarError, ZeroProbabilityEventError
from .figures import emit_figure
from .mar_analysis import (
    MODES,
    drawn_at_random_report,
    is_everywhere_mar,
    observed_mechanism,
    p_r_given_yobs,
    reconstruction_report,
    shape_proportionality_check,
    shape_witness,
    standard_equation_witness,
)
from .mechanism_lab import (
    DEFAULT_MAX_DEN,
    MechanismKind,
    MechanismSpec,
    complete_case_bias,
    default_patterns,
    generate_model,
    sample_dataset,
)
from .modelfile import load_model, serialize_model
from .sample_space import DataSpace, PatternSet, enumerate_events

PROPERTIES = ("drawn-at-random", "shape", "standard-equation")


def _write(args, text: str | bytes) -> None:
    out = getattr(args, "out", None)
    if out:
        mode = "wb" if isinstance(text, bytes) else "w"
        with open(out, mode) as fh:
            fh.write(text)
    elif isinstance(text, bytes):
        sys.stdout.buffer.write(text)
        sys.stdout.flush()
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    model = load_model(args.file, check=False)
    report = validate(model.density)
    print(report)
    return 0 if report else 1


def cmd_factorize(args) -> int:
    model = load_model(args.file)
    h = model.density
    obj = selection_factorize(h) if args.as_ == "selection" else pattern_mixture_factorize(h)
    _write(args, serialize_model(obj))
    return 0


def cmd_events(args) -> int:
    model = load_model(args.file)
    h = model.density
    print("index\tpattern\tobserved\tmembers\tprobability")
    for i, e in enumerate(enumerate_events(model.space, model.patterns)):
        obs = ",".join(f"{model.space.variables[j].name}={v}" for j, v in e.observed_values) or "-"
        print(f"{i}\t{e.pattern}\t{obs}\t{len(e.members)}\t{fmt(h.mass(e.members))}")
    return 0


def cmd_classify(args) -> int:
    model = load_model(args.file)
    verdict = is_everywhere_mar(model.mechanism)
    print(verdict.describe(model.space))
    return 0


def cmd_pryobs(args) -> int:
    model = load_model(args.file)
    om = observed_mechanism(model.mechanism, mode=args.mode)
    print(f"# P(R|Y_obs) by {args.mode} over each observable data event")
    print("pattern\tobserved\tvalue")
    for e in enumerate_events(model.space, model.patterns):
        obs = ",".join(f"{model.space.variables[j].name}={v}" for j, v in e.observed_values) or "-"
        print(f"{e.pattern}\t{obs}\t{fmt(om[e.key])}")
    return 0


def _fmt_y(model, y) -> str:
    return "(" + ", ".join(f"{v.name}={val}" for v, val in zip(model.space.variables, y)) + ")"


def cmd_check(args) -> int:
    model = load_model(args.file)
    events = enumerate_events(model.space, model.patterns)
    g, h = model.mechanism, model.density
    if args.property == "standard-equation":
        for e in events:
            m = standard_equation_witness(g, e, args.mode)
            if m is not None:
                rhs = p_r_given_yobs(g, e, args.mode)
                ymis = ", ".join(f"{model.space.variables[j].name}={m.y[j]}" for j in e.pattern.missing)
                print(f"fails on event {e.describe(model.space)}")
                print(f"Y_mis = ({ymis}): P(R|Y_obs,Y_mis) = {fmt(g.get(m))} "
                      f"but P(R|Y_obs) = {fmt(rhs)} ({args.mode})")
                return 1
        print(f"standard equation holds on all {len(events)} events ({args.mode})")
        return 0

    checked = skipped = 0
    for e in events:
        try:
            if args.property == "drawn-at-random":
                report = drawn_at_random_report(h, e)
                ok = report.holds
            else:
                ok = shape_proportionality_check(h, e)
        except ZeroProbabilityEventError:
            skipped += 1
            continue
        checked += 1
        if not ok:
            print(f"{args.property} fails on event {e.describe(model.space)}")
            if args.property == "drawn-at-random":
                m, lhs, rhs = report.failures[0]
                print(f"y = {_fmt_y(model, m.y)}: p(y_mis|y_obs,r) = {fmt(lhs)} but f(y_mis|y_obs) = {fmt(rhs)}")
            else:
                a, b = shape_witness(h, e)
                print(f"p(y|r)/f(y) differs between y = {_fmt_y(model, a.y)} and y = {_fmt_y(model, b.y)}")
            return 1
    print(f"{args.property} holds on all {checked} positive-probability events "
          f"({skipped} zero-probability events skipped)")
    return 0


def cmd_reconstruct(args) -> int:
    model = load_model(args.file)
    report = reconstruction_report(model.density, model.mechanism, args.mode)
    if report.exact:
        print(f"exact: f and P(R|Y_obs) ({args.mode}) reconstruct the full density")
    else:
        print(f"mismatch: reconstruction differs at {len(report.mismatches)} point(s); "
              f"reconstructed table is {report.validation}")
        for p in report.mismatches[:10]:
            print(f"  {p}: original {fmt(model.density[p])}, reconstructed {fmt(report.reconstructed[p])}")
    return 0


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def cmd_generate(args) -> int:
    kind = MechanismKind(args.kind)
    space = DataSpace.from_level_counts(_int_list(args.levels))
    order = tuple(_int_list(args.order)) if args.order else None
    patterns = (PatternSet.parse(args.patterns.split(",")) if args.patterns
                else default_patterns(kind, space.n, order))
    spec = MechanismSpec(kind, args.seed, args.max_den, order)
    sm, gen = generate_model(spec, space, patterns)
    header = f"# generated: kind={kind} seed={args.seed} max-den={args.max_den}\n"
    if gen.perturbed_event is not None:
        header += (f"# perturbed event: {gen.perturbed_event.describe(space)} "
                   f"at y={gen.perturbed_member.y}\n")
    _write(args, header + serialize_model(sm))
    return 0


def cmd_sample(args) -> int:
    model = load_model(args.file)
    _write(args, sample_dataset(model.density, args.n, args.seed).to_csv())
    return 0


def cmd_bias(args) -> int:
    model = load_model(args.file)
    rep = complete_case_bias(model.density, args.var)
    print(f"variable\t{rep.variable}")
    print(f"complete-case mean\t{fmt(rep.complete_case_mean)}")
    print(f"marginal mean\t{fmt(rep.marginal_mean)}")
    print(f"difference\t{fmt(rep.difference)}")
    return 0


def cmd_plot(args) -> int:
    model = load_model(args.file)
    fmt_ = args.format or ("svg" if args.out and args.out.endswith(".svg") else "ascii")
    event = None
    if args.event is not None:
        events = enumerate_events(model.space, model.patterns)
        if not 0 <= args.event < len(events):
            raise FiniteMarError(f"event index {args.event} out of range 0..{len(events) - 1}")
        event = events[args.event]
    _write(args, emit_figure(model, args.figure, fmt_, event))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="finitemar", description="Exact MAR analysis of finite full distributions.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        return p

    p = add("validate", cmd_validate, "check completeness and total mass of a density")
    p.add_argument("file")
    p = add("factorize", cmd_factorize, "print the selection or pattern-mixture factorization")
    p.add_argument("file")
    p.add_argument("--as", dest="as_", choices=("selection", "mixture"), required=True)
    p.add_argument("--out")
    p = add("events", cmd_events, "list observable data events with their probabilities")
    p.add_argument("file")
    p = add("classify", cmd_classify, "decide everywhere-MAR; print a witness otherwise")
    p.add_argument("file")
    p = add("pryobs", cmd_pryobs, "tabulate P(R|Y_obs) over the observable data")
    p.add_argument("file")
    p.add_argument("--mode", choices=MODES, default="sup")
    p = add("check", cmd_check, "assert a property on every event (exit 1 if it fails)")
    p.add_argument("file")
    p.add_argument("--property", choices=PROPERTIES, required=True)
    p.add_argument("--mode", choices=MODES, default="sup")
    p = add("reconstruct", cmd_reconstruct, "rebuild h from f and P(R|Y_obs) and compare")
    p.add_argument("file")
    p.add_argument("--mode", choices=MODES, default="sup")
    p = add("generate", cmd_generate, "emit a model file with a generated mechanism")
    p.add_argument("--kind", choices=[k.value for k in MechanismKind], required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--levels", default="2,2", help="level counts per variable, e.g. 2,3")
    p.add_argument("--patterns", help="comma-separated bitstrings; default depends on --kind")
    p.add_argument("--order", help="variable order for monotone dropout, e.g. 1,0")
    p.add_argument("--max-den", type=int, default=DEFAULT_MAX_DEN)
    p.add_argument("--out")
    p = add("sample", cmd_sample, "draw an incomplete dataset as CSV with NA for missing")
    p.add_argument("file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p = add("bias", cmd_bias, "complete-case mean against marginal mean")
    p.add_argument("file")
    p.add_argument("--var", required=True)
    p = add("plot", cmd_plot, "emit figure 1, 2 or 3 as SVG or ASCII")
    p.add_argument("file")
    p.add_argument("--figure", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("svg", "ascii"))
    p.add_argument("--event", type=int, help="event index as listed by 'events'")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (FiniteMarError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
