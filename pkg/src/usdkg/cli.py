"""Command-line front end: ``usdkg translate | reason | query | stats | gen-tbox-layer | watch``.

Results go to standard output or the ``--out`` file, diagnostics to standard
error. Exit codes:

====  ======================================
0     success (warnings allowed)
1     unexpected internal error
2     usage error (bad flags or config)
3     file could not be read or written
4     usda syntax error
5     composition error
6     schema error (or validation error with ``--strict``)
7     translation error
8     reasoning or query error
9     knowledge-graph file error
10    terminology error
11    joint-update error
====  ======================================
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path as FsPath
from typing import Callable, Sequence, TextIO

from . import __version__
from .composition import load_stage
from .errors import SchemaError, UsdKgError
from .kgstore import Graph, load, parse_updates, scene_prefixes, serialize, stats, to_owl, watch
from .namespaces import DEFAULT_BASE, is_iri
from .reasoner import query_connected, query_instances, saturate
from .schemas import builtin_registry, load_schema_file
from .tbox import TBox, builtin_tbox, generate_tagging_sublayer, load_tbox_file
from .translator import translate
from .usda.writer import format_layer

log = logging.getLogger("usdkg")

EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(UsdKgError):
    exit_code = EXIT_USAGE


# -- helpers -------------------------------------------------------------------------


def _write(path: str | None, text: str, stdout: TextIO) -> None:
    if path is None or path == "-":
        stdout.write(text)
    else:
        FsPath(path).write_text(text, encoding="utf-8")


def _read(path: str, stdin: TextIO) -> str:
    if path == "-":
        return stdin.read()
    return FsPath(path).read_text(encoding="utf-8")


def _tbox(path: str | None) -> TBox:
    return load_tbox_file(path) if path else builtin_tbox()


def _check_base(base: str) -> str:
    if not is_iri(base):
        raise UsageError(f"--base {base!r} is not an absolute IRI")
    return base


def _expand(term: str, graph: Graph) -> str:
    """Accept either a full IRI or a prefixed name declared in the KG file."""
    if term.startswith("<") and term.endswith(">"):
        return term[1:-1]
    prefix, sep, local = term.partition(":")
    if sep and prefix in graph.prefixes:
        return graph.prefixes[prefix] + local
    return term


def _emit_warnings(caught: list[warnings.WarningMessage], stderr: TextIO) -> None:
    for w in caught:
        print(f"warning: {w.category.__name__}: {w.message}", file=stderr)


def _print_stats(graph: Graph, fmt: str, out: TextIO) -> None:
    s = stats(graph)
    if fmt == "json-lines":
        print(json.dumps(s.as_dict(), sort_keys=True), file=out)
    else:
        print(f"nodes\t{s.nodes}", file=out)
        print(f"edges\t{s.edges}", file=out)
        for name, count in s.by_variant.items():
            print(f"{name}\t{count}", file=out)


# -- commands -------------------------------------------------------------------------


def cmd_translate(args: argparse.Namespace, stdin: TextIO, stdout: TextIO, stderr: TextIO) -> int:
    base = _check_base(args.base)
    tbox = _tbox(args.tbox)
    registry = load_schema_file(args.schemas) if args.schemas else builtin_registry()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        stage = load_stage(args.usda)
        errors = 0
        for prim in stage.concrete():
            for diag in registry.validate_prim(prim):
                print(str(diag), file=stderr)
                errors += diag.severity == "error"
        if errors and args.strict:
            raise SchemaError(f"{errors} validation error(s); rerun without --strict to continue")
        abox = translate(stage, tbox, base, registry, strict_tags=args.strict)
    _emit_warnings(caught, stderr)
    graph = Graph(abox, scene_prefixes(base))
    _write(args.out, serialize(graph), stdout)
    if args.owl:
        _write(args.owl, to_owl(graph), stdout)
    if args.stats:
        _print_stats(graph, args.format, stdout)
    log.info("translated %d prims into %d facts", sum(1 for _ in stage.concrete()), len(abox))
    return 0


def cmd_reason(args: argparse.Namespace, stdin: TextIO, stdout: TextIO, stderr: TextIO) -> int:
    graph = load(_read(args.input, stdin))
    tbox = _tbox(args.tbox)
    if args.max_iterations is not None and args.max_iterations < 1:
        raise UsageError("--max-iterations must be positive")
    facts, report = saturate(graph.facts, tbox, max_iterations=args.max_iterations)
    for v in report.violations:
        print(f"violation: {v}", file=stderr)
    _write(args.out, serialize(graph.with_facts(facts)), stdout)
    summary = {"derived": len(report.derived_facts), "iterations": report.iterations,
               "violations": len(report.violations)}
    if args.format == "json-lines":
        print(json.dumps(summary, sort_keys=True), file=stdout if args.out != "-" else stderr)
    else:
        print(f"derived {summary['derived']} facts in {summary['iterations']} iterations, "
              f"{summary['violations']} violation(s)", file=stderr)
    return 0


def cmd_query(args: argparse.Namespace, stdin: TextIO, stdout: TextIO, stderr: TextIO) -> int:
    graph = load(_read(args.input, stdin))
    if args.instances is not None:
        found = sorted(query_instances(graph.facts, _expand(args.instances, graph), _tbox(args.tbox)))
        for ind in found:
            print(json.dumps({"individual": ind}) if args.format == "json-lines" else ind, file=stdout)
    else:
        a, b = (_expand(t, graph) for t in args.connected)
        result = query_connected(graph.facts, a, b)
        if args.format == "json-lines":
            print(json.dumps({"a": a, "b": b, "connected": result}), file=stdout)
        else:
            print("true" if result else "false", file=stdout)
    return 0


def cmd_stats(args: argparse.Namespace, stdin: TextIO, stdout: TextIO, stderr: TextIO) -> int:
    _print_stats(load(_read(args.input, stdin)), args.format, stdout)
    return 0


def cmd_gen_tbox_layer(args: argparse.Namespace, stdin: TextIO, stdout: TextIO, stderr: TextIO) -> int:
    source_id = args.out if args.out and args.out != "-" else "tbox.usda"
    _write(args.out, format_layer(generate_tagging_sublayer(_tbox(args.tbox), source_id)), stdout)
    return 0


def cmd_watch(args: argparse.Namespace, stdin: TextIO, stdout: TextIO, stderr: TextIO) -> int:
    base = _check_base(args.base)
    graph = load(_read(args.kg, stdin))
    tbox = _tbox(args.tbox)
    stream = stdin if args.updates == "-" else open(args.updates, encoding="utf-8")
    try:
        for graph, events in watch(graph, parse_updates(stream), tbox, base,
                                   full=args.full_rematerialize):
            for event in events:
                print(json.dumps(event.as_dict()), file=stdout)
            stdout.flush()
    finally:
        if stream is not stdin:
            stream.close()
    if args.out:
        _write(args.out, serialize(graph), stdout)
    return 0


# -- argument parsing -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="usdkg", description="Build, reason over and query knowledge graphs of usda scenes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser.add_argument("--config", help="JSON file whose keys are long flag names (e.g. base, tbox)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, func: Callable, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_, description=help_)
        p.set_defaults(func=func)
        return p

    def fmt(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("text", "json-lines"), default="text")

    p = add("translate", cmd_translate, "translate a usda scene into a knowledge-graph file")
    p.add_argument("usda", help="root usda layer")
    p.add_argument("--out", required=True, help="KG output file ('-' for stdout)")
    p.add_argument("--tbox", help="terminology file extending the built-in one")
    p.add_argument("--base", default=DEFAULT_BASE, help=f"namespace for prims (default {DEFAULT_BASE})")
    p.add_argument("--schemas", help="schema extension file")
    p.add_argument("--owl", help="also write the ABox in OWL functional syntax to this file")
    p.add_argument("--stats", action="store_true", help="print node and edge counts")
    p.add_argument("--strict", action="store_true",
                   help="fail on validation errors and unresolvable semantic tags")
    fmt(p)

    p = add("reason", cmd_reason, "materialize a KG file under the terminology")
    p.add_argument("--in", dest="input", required=True, help="KG file ('-' for stdin)")
    p.add_argument("--out", required=True, help="materialized KG file ('-' for stdout)")
    p.add_argument("--tbox", help="terminology file extending the built-in one")
    p.add_argument("--max-iterations", type=int, help="iteration cap (default 10 x fact count)")
    fmt(p)

    p = add("query", cmd_query, "query a materialized KG file")
    p.add_argument("--in", dest="input", required=True, help="KG file ('-' for stdin)")
    p.add_argument("--tbox", help="terminology file extending the built-in one")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--instances", metavar="CONCEPT", help="individuals of a concept")
    group.add_argument("--connected", nargs=2, metavar=("A", "B"),
                       help="whether A is transitively connected to B")
    fmt(p)

    p = add("stats", cmd_stats, "count nodes, edges and facts per kind")
    p.add_argument("--in", dest="input", required=True, help="KG file ('-' for stdin)")
    fmt(p)

    p = add("gen-tbox-layer", cmd_gen_tbox_layer, "write the tagging sublayer of the terminology")
    p.add_argument("--tbox", help="terminology file extending the built-in one")
    p.add_argument("--out", default="-", help="usda output file (default stdout)")

    p = add("watch", cmd_watch, "apply joint updates and report state changes")
    p.add_argument("--kg", required=True, help="KG file to start from")
    p.add_argument("--updates", default="-", help="JSON-lines update stream (default stdin)")
    p.add_argument("--tbox", help="terminology file extending the built-in one")
    p.add_argument("--base", default=DEFAULT_BASE, help="namespace used when the KG was built")
    p.add_argument("--out", help="write the final KG here")
    p.add_argument("--full-rematerialize", action="store_true",
                   help="recompute the whole closure after each update")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        config = json.loads(FsPath(args.config).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    if not isinstance(config, dict):
        raise UsageError(f"{args.config}: expected a JSON object")
    sub = next(a for a in parser._subparsers._group_actions if isinstance(a, argparse._SubParsersAction))
    subparser = sub.choices[args.command]
    known = {a.dest for a in subparser._actions}
    defaults = {}
    for key, value in config.items():
        dest = key.replace("-", "_")
        dest = "input" if dest == "in" else dest
        if dest not in known or dest in ("help", "func"):
            raise UsageError(f"{args.config}: unknown key {key!r} for {args.command}")
        defaults[dest] = value
    # flags given on the command line still win over the config file
    subparser.set_defaults(**defaults)
    for action in subparser._actions:
        if action.dest in defaults:
            action.required = False
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None, *, stdin: TextIO | None = None,
         stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdin, stdout, stderr = stdin or sys.stdin, stdout or sys.stdout, stderr or sys.stderr
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: cannot read {exc.filename}: {exc.strerror}", file=stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=stderr,
                        format="%(levelname)s: %(message)s", force=True)
    try:
        return args.func(args, stdin, stdout, stderr)
    except UsdKgError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
