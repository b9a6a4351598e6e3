"""Command line entry point.

Subcommands: parse, gen, transform, check, emit-smt, render-svg,
pipeline. Exit codes are CI friendly: 0 all properties pass, 1 some
property fails, 2 some result is inconclusive or unknown, 3 usage or
input error. ``SPACEBOUND_SOLVER`` supplies a default solver command.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import dsl, scenarios, smt, svg
from . import terms as T
from .checkers import (
    CheckProperty,
    CheckReport,
    Verdict,
    overall_verdict,
    reports_json,
    reports_text,
    run_pairwise,
)
from .errors import SpaceboundError, UnknownPass
from .timeorder import TimeOrder
from .transforms import (
    Classification,
    EventTrace,
    Mode,
    TimedSpace,
    assign_owner,
    box_abstract,
    geometrize,
    index_by_time,
    merge_intervals,
    normalize,
    resolve_event_relative,
    resolve_events,
    saturate_events,
    strip_owner,
    timed_space_to_term,
    map_entries,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_ERROR = 3


class UsageError(SpaceboundError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we map usage to 3
        raise UsageError(message)


# ---------------------------------------------------------------------------
# input loading
# ---------------------------------------------------------------------------


def _load_documents(paths: Sequence[str]) -> dsl.SourceDocument:
    defs: list[dsl.Definition] = []
    seen: set[str] = set()
    version = dsl.SUPPORTED_VERSION
    unit = None
    for path in paths:
        doc = dsl.parse(Path(path).read_text(encoding="utf-8"))
        unit = unit or doc.unit
        for d in doc.definitions:
            if d.name in seen:
                raise UsageError(f"definition {d.name!r} appears in more than one input")
            seen.add(d.name)
            defs.append(d)
    return dsl.SourceDocument(tuple(defs), version, unit)


def _pick(kind: str, table: dict, name: Optional[str], what: str):
    if name is not None:
        if name not in table:
            raise UsageError(f"no {what} named {name!r}")
        return table[name]
    if len(table) == 1:
        return next(iter(table.values()))
    if not table:
        raise UsageError(f"inputs define no {what}")
    raise UsageError(f"several {what}s defined; pick one with --{kind}")


def _has_event_relative(term: T.Term) -> bool:
    for _, atom in T.iter_atoms(term):
        if isinstance(atom, T.TimePoint) and isinstance(atom.label, T.EventRelative):
            return True
        if isinstance(atom, T.TimeInterval) and (
            isinstance(atom.start, T.EventRelative) or isinstance(atom.end, T.EventRelative)
        ):
            return True
    return False


def _build_space(
    name: str,
    term: T.Term,
    order: TimeOrder,
    *,
    classification: Classification,
    mode: Mode,
    geometry: Optional[dict],
    trace: Optional[EventTrace],
) -> TimedSpace:
    violations = T.validate(term)
    if violations:
        raise UsageError(f"term {name!r} is ill-formed: " + "; ".join(map(str, violations)))
    effective_trace = trace if trace is not None else EventTrace({})
    if _has_event_relative(term):
        if trace is None:
            raise UsageError(
                f"term {name!r} uses event-relative time; provide --trace"
            )
        term = resolve_event_relative(term, effective_trace, order)
    ts = index_by_time(term, order, component=name, classification=classification, mode=mode)
    if ts.pending:
        ts = resolve_events(ts, saturate_events(term, effective_trace))
    if geometry is not None:
        ts = geometrize(ts, geometry)
    return ts


def _spaces_from_args(
    args, doc: dsl.SourceDocument, order: TimeOrder, auto_geometry: bool = True
) -> list[TimedSpace]:
    if args.geometry:
        geometry = _pick("geometry", doc.geometries, args.geometry, "geometry")
    elif auto_geometry and len(doc.geometries) == 1:
        geometry = next(iter(doc.geometries.values()))
    else:
        geometry = None
    if args.trace:
        trace = _pick("trace", doc.traces, args.trace, "trace")
    elif len(doc.traces) == 1:
        trace = next(iter(doc.traces.values()))
    else:
        trace = None
    terms_table = doc.terms
    names = args.components.split(",") if args.components else list(terms_table)
    inner_names = args.inner.split(",") if getattr(args, "inner", None) else []
    outer_names = args.outer.split(",") if getattr(args, "outer", None) else []

    spaces = []
    if getattr(args, "prop", "collision") == "coverage":
        if not inner_names or not outer_names:
            raise UsageError("coverage checking needs --inner and --outer component names")
        selection = [(n, Classification.OCCUPIED, Mode.OVER) for n in inner_names]
        selection += [(n, Classification.COMM_RANGE, Mode.UNDER) for n in outer_names]
    else:
        selection = [(n, Classification.OCCUPIED, Mode.OVER) for n in names]
    for name, classification, mode in selection:
        if name not in terms_table:
            raise UsageError(f"no term named {name!r}")
        spaces.append(
            _build_space(
                name, terms_table[name], order,
                classification=classification, mode=mode,
                geometry=geometry, trace=trace,
            )
        )
    return spaces


def _solver_command(args) -> Optional[str]:
    if getattr(args, "solver_cmd", None):
        return args.solver_cmd
    return os.environ.get("SPACEBOUND_SOLVER") or None


def _exit_code(reports: Sequence[CheckReport]) -> int:
    verdict = overall_verdict(reports)
    if verdict is Verdict.FAIL:
        return EXIT_FAIL
    if verdict is Verdict.INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


def _emit_reports(args, reports: Sequence[CheckReport]) -> int:
    sys.stdout.write(reports_text(reports))
    if getattr(args, "json", None):
        Path(args.json).write_text(reports_json(reports), encoding="utf-8")
    return _exit_code(reports)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_parse(args) -> int:
    doc = _load_documents(args.inputs)
    problems = []
    for name, term in doc.terms.items():
        for v in T.validate(term):
            problems.append(f"{name}: {v}")
    if problems:
        for p in problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_ERROR
    text = dsl.print_document(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def cmd_gen(args) -> int:
    if args.scenario == "forklift":
        doc = scenarios.forklift_document()
    elif args.scenario == "lifting":
        doc = scenarios.lifting_document(args.speed_milli, args.stoppoint)
    elif args.scenario == "rotating":
        doc = scenarios.rotating_document(
            args.cx, args.cy, args.radius, args.arm, args.tool_half, args.steps
        )
    else:
        doc = scenarios.benchmark_document(
            args.pairs, args.timepoints, args.boxes, args.seed, args.force_overlap
        )
    text = dsl.print_document(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def _apply_pass(
    spaces: list[TimedSpace],
    order: TimeOrder,
    doc: dsl.SourceDocument,
    name: str,
    params: list[str],
):
    """Apply one transform pass to every space; check passes return reports."""
    opts = _keyed(params)
    if name == "normalize":
        return [map_entries(ts, normalize) for ts in spaces]
    if name == "ground":
        env = {k: int(v) for k, v in opts.items()}
        return [map_entries(ts, lambda f: T.ground(f, env)) for ts in spaces]
    if name == "geometrize":
        table = _pick("geometry", doc.geometries, params[0] if params else None, "geometry")
        return [geometrize(ts, table) for ts in spaces]
    if name == "resolve-events":
        trace = _pick("trace", doc.traces, params[0] if params else None, "trace")
        return [resolve_events(ts, trace) for ts in spaces]
    if name == "merge-intervals":
        pairs = []
        for p in params:
            if ":" not in p:
                raise UsageError(f"merge-intervals wants FROM:TO pairs, got {p!r}")
            a, b = p.split(":", 1)
            pairs.append((a, b))
        return [merge_intervals(ts, order, pairs) for ts in spaces]
    if name == "box-abstract":
        return [box_abstract(ts) for ts in spaces]
    if name == "assign-owner":
        if len(params) != 1:
            raise UsageError("assign-owner wants exactly one owner name")
        return [map_entries(ts, lambda f: assign_owner(f, params[0])) for ts in spaces]
    if name == "strip-owner":
        return [map_entries(ts, strip_owner) for ts in spaces]
    if name == "check-boxes":
        return run_pairwise(
            spaces, order, CheckProperty.COLLISION_FREE, backend="boxes",
            margin=int(opts.get("margin", 0)), early_exit="early-exit" in params,
        )
    if name == "check-points":
        return run_pairwise(
            spaces, order, CheckProperty.COLLISION_FREE, backend="points",
            step=int(opts.get("step", 1)), early_exit="early-exit" in params,
        )
    if name == "check-coverage":
        return run_pairwise(spaces, order, CheckProperty.COVERAGE)
    raise UnknownPass(name)


_CHECK_PASSES = ("check-boxes", "check-points", "check-coverage")


def _keyed(params: list[str]) -> dict[str, str]:
    return dict(p.split("=", 1) for p in params if "=" in p)


def cmd_transform(args) -> int:
    doc = _load_documents(args.inputs)
    order = _pick("order", doc.timeorders, args.order, "time order")
    spaces = _spaces_from_args(args, doc, order)
    result = _apply_pass(spaces, order, doc, args.pass_name, args.pass_args or [])
    if args.pass_name in _CHECK_PASSES:
        return _emit_reports(args, result)
    out_doc = _spaces_document(result, order)
    text = dsl.print_document(out_doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def _spaces_document(spaces: Sequence[TimedSpace], order: TimeOrder) -> dsl.SourceDocument:
    defs = [
        dsl.Definition(dsl.TERM, ts.component, timed_space_to_term(ts, order))
        for ts in spaces
    ]
    defs.append(dsl.Definition(dsl.TIMEORDER, "order", order))
    return dsl.SourceDocument(tuple(defs))


def cmd_check(args) -> int:
    doc = _load_documents(args.inputs)
    order = _pick("order", doc.timeorders, args.order, "time order")
    spaces = _spaces_from_args(args, doc, order)
    prop = (
        CheckProperty.COVERAGE if args.prop == "coverage" else CheckProperty.COLLISION_FREE
    )

    if args.backend in ("boxes", "points"):
        reports = run_pairwise(
            spaces, order, prop,
            backend=args.backend, margin=args.margin, step=args.step,
            early_exit=args.early_exit, jobs=args.jobs,
        )
        return _emit_reports(args, reports)

    if prop is CheckProperty.COVERAGE:
        raise UsageError("SMT backends cover collision checking only")
    monolithic = args.backend == "smt-mono"
    solver = _solver_command(args)
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    for i in range(len(spaces)):
        for j in range(i + 1, len(spaces)):
            report, docs = smt.check_collision_smt(
                spaces[i], spaces[j], order,
                monolithic=monolithic, solver_command=solver,
                timeout_s=args.solver_timeout, jobs=args.jobs,
            )
            for d in docs:
                (out_dir / smt.document_filename(d, monolithic)).write_text(
                    d.text, encoding="utf-8"
                )
            reports.append(report)
    return _emit_reports(args, reports)


def cmd_emit_smt(args) -> int:
    doc = _load_documents(args.inputs)
    order = _pick("order", doc.timeorders, args.order, "time order")
    spaces = _spaces_from_args(args, doc, order)
    if len(spaces) < 2:
        raise UsageError("emit-smt needs at least two components")
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i in range(len(spaces)):
        for j in range(i + 1, len(spaces)):
            if args.monolithic:
                docs = [smt.emit_monolithic(spaces[i], spaces[j], order)]
            else:
                docs = smt.emit_per_timepoint(spaces[i], spaces[j], order)
            for d in docs:
                path = out_dir / smt.document_filename(d, args.monolithic)
                path.write_text(d.text, encoding="utf-8")
                written.append(path)
    for path in written:
        print(path)
    return EXIT_PASS


def cmd_render_svg(args) -> int:
    doc = _load_documents(args.inputs)
    order = _pick("order", doc.timeorders, args.order, "time order")
    spaces = _spaces_from_args(args, doc, order)
    text = svg.render_svg(spaces, order)
    Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_PASS


def cmd_pipeline(args) -> int:
    doc = _load_documents(args.inputs)
    order = _pick("order", doc.timeorders, args.order, "time order")
    # geometry application is an explicit stage here, not a load-time default
    spaces = _spaces_from_args(args, doc, order, auto_geometry=False)

    stages: list[tuple[str, list[str]]] = []
    for raw in Path(args.pipeline).read_text(encoding="utf-8").splitlines():
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        stages.append((parts[0], parts[1:]))

    if not stages:
        sys.stdout.write(dsl.print_document(doc))
        return EXIT_PASS

    dump_dir = Path(args.dump_dir) if args.dump_dir else None
    if dump_dir:
        dump_dir.mkdir(parents=True, exist_ok=True)

    for i, (name, params) in enumerate(stages):
        try:
            result = _apply_pass(spaces, order, doc, name, params)
        except UnknownPass:
            raise
        except (SpaceboundError, ValueError) as exc:
            raise SpaceboundError(f"[stage {i + 1}: {name}] {exc}") from exc
        if name in _CHECK_PASSES:
            if i + 1 != len(stages):
                raise UsageError(f"check pass {name!r} must be the final stage")
            return _emit_reports(args, result)
        spaces = result
        if dump_dir:
            text = dsl.print_document(_spaces_document(spaces, order))
            (dump_dir / f"{i + 1:02d}-{name}.besd").write_text(text, encoding="utf-8")

    text = dsl.print_document(_spaces_document(spaces, order))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def _add_input_options(p: _Parser, coverage: bool = True) -> None:
    p.add_argument("inputs", nargs="+", help=".besd input files")
    p.add_argument("--order", help="name of the time order definition to use")
    p.add_argument("--components", help="comma separated term names (default: all)")
    p.add_argument("--geometry", help="name of the geometry table for node atoms")
    p.add_argument("--trace", help="name of the event trace definition")
    if coverage:
        p.add_argument(
            "--property", dest="prop", choices=("collision", "coverage"),
            default="collision",
        )
        p.add_argument("--inner", help="occupied components for coverage checking")
        p.add_argument("--outer", help="range components for coverage checking")


def build_parser() -> _Parser:
    parser = _Parser(prog="spacebound", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse, validate and reprint documents")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("gen", help="generate a scenario document")
    p.add_argument(
        "scenario", choices=("forklift", "lifting", "rotating", "benchmark")
    )
    p.add_argument("--speed-milli", type=int, default=1000)
    p.add_argument("--stoppoint", type=int, default=300)
    p.add_argument("--cx", type=int, default=0)
    p.add_argument("--cy", type=int, default=0)
    p.add_argument("--radius", type=int, default=100)
    p.add_argument("--arm", type=int, default=20)
    p.add_argument("--tool-half", type=int, default=3)
    p.add_argument("--steps", type=int, default=16)
    p.add_argument("--pairs", type=int, default=2)
    p.add_argument("--timepoints", type=int, default=100)
    p.add_argument("--boxes", type=int, default=1)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--force-overlap", action="store_true")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("transform", help="apply one pass to the components")
    _add_input_options(p)
    p.add_argument("--pass", dest="pass_name", required=True)
    p.add_argument(
        "--pass-arg", dest="pass_args", action="append",
        help="pass parameter (repeatable), e.g. --pass-arg margin=1",
    )
    p.add_argument("--out")
    p.add_argument("--json")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("check", help="run pairwise property checks")
    _add_input_options(p)
    p.add_argument(
        "--backend", choices=("boxes", "points", "smt-per-t", "smt-mono"),
        default="boxes",
    )
    p.add_argument("--margin", type=int, default=0)
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--early-exit", action="store_true")
    p.add_argument("--jobs", type=int, default=os.cpu_count())
    p.add_argument("--solver-cmd")
    p.add_argument("--solver-timeout", type=float, default=60.0)
    p.add_argument("--out", help="directory for emitted .smt2 scripts")
    p.add_argument("--json", help="write the structured report here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("emit-smt", help="write SMT-LIB2 verification conditions")
    _add_input_options(p, coverage=False)
    p.add_argument("--monolithic", action="store_true")
    p.add_argument("--out", help="output directory (default: current)")
    p.set_defaults(func=cmd_emit_smt)

    p = sub.add_parser("render-svg", help="plot timed spaces to an SVG file")
    _add_input_options(p, coverage=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render_svg)

    p = sub.add_parser("pipeline", help="apply a pass sequence from a file")
    _add_input_options(p)
    p.add_argument("--pipeline", required=True, help="pass list, one per line")
    p.add_argument("--dump-dir", help="dump intermediate .besd documents here")
    p.add_argument("--out")
    p.add_argument("--json")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (SpaceboundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
