"""Knowledge-graph files, statistics and joint-state updates.

The native file format is line oriented (``docs/kg-format.md``)::

    #kg 1
    @prefix usd: <https://w3id.org/usdkg/usd#> .
    <http://example.org/scene#world.box> usd:hasAPI some usd:PhysicsMassAPI .
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .errors import KGParseError, MalformedUpdate, StaleTimestamp, UnknownJoint, UnknownPrefix, UsdaSyntaxError
from .facts import (
    ConceptAssertion,
    DataAssertion,
    ExistentialAssertion,
    Fact,
    ObjectAssertion,
    OpaqueLiteral,
    literal_datatype_iri,
    subject_of,
    variant_name,
)
from .namespaces import DEFAULT_BASE, DEFAULT_PREFIXES, USDT
from .reasoner import classify_box_states, materialize, saturate
from .tbox import HAS_JOINT_VALUE, HAS_QUALITY, JOINT_STATE, TBox, builtin_tbox
from .translator import iri_of_path, mint_quality
from .usda.model import DATATYPES, AttributeValue, Path
from .usda.parser import parse_value_text

HEADER = "#kg 1"


@dataclass(frozen=True)
class Graph:
    """An immutable snapshot of the knowledge graph.

    ``clock`` holds the last accepted update timestamp per joint IRI; it is
    runtime state and is not written to files.
    """

    facts: frozenset[Fact] = frozenset()
    prefixes: Mapping[str, str] = field(default_factory=lambda: MappingProxyType(dict(DEFAULT_PREFIXES)))
    clock: Mapping[str, int] = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self) -> None:
        object.__setattr__(self, "facts", frozenset(self.facts))
        object.__setattr__(self, "prefixes", MappingProxyType(dict(self.prefixes)))
        object.__setattr__(self, "clock", MappingProxyType(dict(self.clock)))
        if len(set(self.prefixes.values())) != len(self.prefixes):
            raise ValueError("two prefixes map to the same IRI")
        for name in self.prefixes:
            if not _PREFIX_RE.fullmatch(name):
                raise ValueError(f"invalid prefix name {name!r}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.facts == other.facts and dict(self.prefixes) == dict(other.prefixes)

    def __hash__(self) -> int:
        return hash(self.facts)

    def with_facts(self, facts: Iterable[Fact]) -> "Graph":
        return replace(self, facts=frozenset(facts))


def scene_prefixes(base: str = DEFAULT_BASE) -> dict[str, str]:
    """Default prefixes plus ``scene:`` for prim individuals under ``base``."""
    out = dict(DEFAULT_PREFIXES)
    out["scene"] = base if base.endswith(("#", "/")) else base + "#"
    return out


# -- serialization ---------------------------------------------------------------

_PREFIX_RE = re.compile(r"[A-Za-z][A-Za-z0-9_\-]*")
_LOCAL_RE = re.compile(r"[A-Za-z0-9_\-][A-Za-z0-9_.:\-]*")
_TOKEN_RE = re.compile(r'\s*(<[^<>\s]*>|"(?:[^"\\]|\\.)*"(?:\^\^\S+)?|[^\s"]+)')


class _Compactor:
    def __init__(self, prefixes: Mapping[str, str]):
        # longest namespace first so nested namespaces pick the tightest prefix
        self.items = sorted(prefixes.items(), key=lambda kv: (-len(kv[1]), kv[0]))

    def __call__(self, iri: str) -> str:
        for name, ns in self.items:
            if iri.startswith(ns):
                local = iri[len(ns):]
                if _LOCAL_RE.fullmatch(local) and not local.endswith("."):
                    return f"{name}:{local}"
        return f"<{iri}>"


def _fact_line(f: Fact, term: _Compactor) -> str:
    if isinstance(f, ConceptAssertion):
        return f"{term(f.individual)} a {term(f.concept)} ."
    if isinstance(f, ExistentialAssertion):
        return f"{term(f.individual)} {term(f.property)} some {term(f.filler)} ."
    if isinstance(f, ObjectAssertion):
        return f"{term(f.subject)} {term(f.property)} {term(f.object)} ."
    lex = json.dumps(f.literal.text())
    return f"{term(f.subject)} {term(f.property)} {lex}^^{term(literal_datatype_iri(f.literal))} ."


def serialize(graph: Graph) -> str:
    """Deterministic text form: header, sorted prefixes, then sorted fact lines."""
    term = _Compactor(graph.prefixes)
    lines = [HEADER]
    lines += [f"@prefix {name}: <{ns}> ." for name, ns in sorted(graph.prefixes.items())]
    lines += sorted(_fact_line(f, term) for f in graph.facts)
    return "\n".join(lines) + "\n"


def load(doc: str) -> Graph:
    """Parse a document written by :func:`serialize` or by hand.

    Raises:
        KGParseError: malformed line (carries the 1-based line number).
        UnknownPrefix: a prefixed name uses an undeclared prefix.
    """
    lines = doc.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise KGParseError(f"missing {HEADER!r} header", 1)
    prefixes: dict[str, str] = {}
    facts: set[Fact] = set()
    for lineno, raw in enumerate(lines[1:], 2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = _tokens(line, lineno)
        if tokens[-1] != ".":
            raise KGParseError("statement must end with ' .'", lineno)
        tokens = tokens[:-1]
        if tokens[0] == "@prefix":
            if len(tokens) != 3 or not tokens[1].endswith(":") or not tokens[2].startswith("<"):
                raise KGParseError("expected: @prefix name: <iri> .", lineno)
            name = tokens[1][:-1]
            if not _PREFIX_RE.fullmatch(name):
                raise KGParseError(f"invalid prefix name {name!r}", lineno)
            if name in prefixes:
                raise KGParseError(f"prefix {name!r} declared twice", lineno)
            prefixes[name] = tokens[2][1:-1]
            continue
        facts.add(_parse_fact(tokens, prefixes, lineno))
    try:
        return Graph(frozenset(facts), prefixes)
    except ValueError as exc:
        raise KGParseError(str(exc), 1) from None


def _tokens(line: str, lineno: int) -> list[str]:
    out, pos = [], 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if m is None:
            if line[pos:].strip():
                raise KGParseError(f"cannot read {line[pos:]!r}", lineno)
            break
        out.append(m.group(1))
        pos = m.end()
    return out


def _iri(token: str, prefixes: Mapping[str, str], lineno: int) -> str:
    if token.startswith("<") and token.endswith(">"):
        return token[1:-1]
    name, sep, local = token.partition(":")
    if not sep or not _PREFIX_RE.fullmatch(name):
        raise KGParseError(f"expected an IRI, got {token!r}", lineno)
    if name not in prefixes:
        raise UnknownPrefix(name, lineno)
    return prefixes[name] + local


def _literal(token: str, prefixes: Mapping[str, str], lineno: int):
    quoted, sep, dt_token = token.rpartition("^^")
    if not sep:
        raise KGParseError("literal needs a ^^datatype", lineno)
    try:
        lexical = json.loads(quoted)
    except json.JSONDecodeError:
        raise KGParseError(f"bad literal {quoted}", lineno) from None
    dt = _iri(dt_token, prefixes, lineno)
    tag = dt[len(USDT):] if dt.startswith(USDT) else None
    if tag in DATATYPES:
        try:
            return parse_value_text(lexical, tag)
        except (UsdaSyntaxError, ValueError) as exc:
            raise KGParseError(f"{lexical!r} is not a valid {tag}: {exc}", lineno) from None
    return OpaqueLiteral(lexical, dt)


def _parse_fact(tokens: list[str], prefixes: Mapping[str, str], lineno: int) -> Fact:
    if len(tokens) == 3 and tokens[1] == "a":
        return ConceptAssertion(_iri(tokens[0], prefixes, lineno), _iri(tokens[2], prefixes, lineno))
    if len(tokens) == 4 and tokens[2] == "some":
        s, p, c = (_iri(tokens[i], prefixes, lineno) for i in (0, 1, 3))
        return ExistentialAssertion(s, p, c)
    if len(tokens) == 3:
        s, p = _iri(tokens[0], prefixes, lineno), _iri(tokens[1], prefixes, lineno)
        if tokens[2].startswith('"'):
            return DataAssertion(s, p, _literal(tokens[2], prefixes, lineno))
        return ObjectAssertion(s, p, _iri(tokens[2], prefixes, lineno))
    raise KGParseError(f"expected 3 or 4 terms, got {len(tokens)}", lineno)


def to_owl(graph: Graph, ontology_iri: str | None = None) -> str:
    """The ABox in OWL 2 functional-style syntax, for external reasoners."""

    def lit(f: DataAssertion) -> str:
        text = f.literal.text().replace("\\", "\\\\").replace('"', '\\"')
        return f'"{text}"^^<{literal_datatype_iri(f.literal)}>'

    lines = [f"Prefix({name}:=<{ns}>)" for name, ns in sorted(graph.prefixes.items())]
    lines.append(f"Ontology(<{ontology_iri}>" if ontology_iri else "Ontology(")
    body = []
    for f in graph.facts:
        if isinstance(f, ConceptAssertion):
            body.append(f"ClassAssertion(<{f.concept}> <{f.individual}>)")
        elif isinstance(f, ExistentialAssertion):
            body.append(f"ClassAssertion(ObjectSomeValuesFrom(<{f.property}> <{f.filler}>) "
                        f"<{f.individual}>)")
        elif isinstance(f, ObjectAssertion):
            body.append(f"ObjectPropertyAssertion(<{f.property}> <{f.subject}> <{f.object}>)")
        else:
            body.append(f"DataPropertyAssertion(<{f.property}> <{f.subject}> {lit(f)})")
    lines += sorted(body)
    lines.append(")")
    return "\n".join(lines) + "\n"


# -- statistics ----------------------------------------------------------------------


@dataclass(frozen=True)
class Stats:
    nodes: int
    edges: int
    by_variant: Mapping[str, int]

    def as_dict(self) -> dict:
        return {"nodes": self.nodes, "edges": self.edges, "facts_by_variant": dict(self.by_variant)}


def stats(graph: Graph | Iterable[Fact]) -> Stats:
    """Node count: distinct IRIs in subject or object position (classes included,
    literals excluded). Edge count: number of facts."""
    facts = graph.facts if isinstance(graph, Graph) else frozenset(graph)
    nodes: set[str] = set()
    by_variant = {cls.__name__: 0 for cls in (ConceptAssertion, ExistentialAssertion,
                                               ObjectAssertion, DataAssertion)}
    for f in facts:
        by_variant[variant_name(f)] += 1
        nodes.add(subject_of(f))
        if isinstance(f, ConceptAssertion):
            nodes.add(f.concept)
        elif isinstance(f, ExistentialAssertion):
            nodes.add(f.filler)
        elif isinstance(f, ObjectAssertion):
            nodes.add(f.object)
    return Stats(len(nodes), len(facts), MappingProxyType(by_variant))


# -- joint-state updates ---------------------------------------------------------------


@dataclass(frozen=True)
class JointUpdate:
    path: Path
    value: float
    ts: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError("joint value must be finite")


def parse_updates(lines: Iterable[str]) -> Iterator[JointUpdate]:
    """Read newline-delimited JSON records ``{"path": ..., "value": ..., "ts": ...}``."""
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rec = json.loads(line)
            path = Path.parse(rec["path"])
            value, ts = rec["value"], rec["ts"]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError("value must be a number")
            if isinstance(ts, bool) or not isinstance(ts, int):
                raise TypeError("ts must be an integer")
            yield JointUpdate(path, float(value), ts)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, UsdaSyntaxError) as exc:
            raise MalformedUpdate(str(exc), lineno) from None


def _state_concepts(tbox: TBox) -> frozenset[str]:
    return frozenset({r.target for r in tbox.rules} | {lr.state for lr in tbox.liftings})


def apply_joint_update(graph: Graph, update: JointUpdate, base: str = DEFAULT_BASE,
                       tbox: TBox | None = None) -> Graph:
    """Replace a joint's value and drop the state labels it may have changed.

    The joint's value lives on its joint-state quality individual. Removed
    labels are those on the joint itself and on every individual linked to it
    through a lifting rule's property. Call :func:`refresh` afterwards.

    Raises:
        UnknownJoint: no fact mentions the joint's individual.
        StaleTimestamp: ``update.ts`` is not after the joint's last timestamp.
    """
    tbox = tbox if tbox is not None else builtin_tbox()
    joint = iri_of_path(update.path, base)
    if not any(subject_of(f) == joint for f in graph.facts):
        raise UnknownJoint(str(update.path))
    last = graph.clock.get(joint)
    if last is not None and update.ts <= last:
        raise StaleTimestamp(str(update.path), update.ts, last)

    q = mint_quality(joint, JOINT_STATE)
    states = _state_concepts(tbox)
    vias = {lr.via for lr in tbox.liftings}
    subject_kinds = frozenset().union(*(tbox.descendants(lr.subject) for lr in tbox.liftings))
    linked = {f.subject for f in graph.facts
              if isinstance(f, ObjectAssertion) and f.property in vias and f.object == joint}
    affected = {joint} | {f.individual for f in graph.facts
                          if isinstance(f, ConceptAssertion) and f.individual in linked
                          and f.concept in subject_kinds}
    keep = {f for f in graph.facts
            if not (isinstance(f, DataAssertion) and f.subject == q and f.property == HAS_JOINT_VALUE)
            and not (isinstance(f, ConceptAssertion) and f.concept in states
                     and f.individual in affected)}
    keep.add(ObjectAssertion(joint, HAS_QUALITY, q))
    keep.add(DataAssertion(q, HAS_JOINT_VALUE, AttributeValue("float", update.value)))
    clock = dict(graph.clock)
    clock[joint] = update.ts
    return Graph(frozenset(keep), graph.prefixes, clock)


def refresh(graph: Graph, tbox: TBox, *, touched: Iterable[str] = (), full: bool = False) -> Graph:
    """Bring a graph back to its closure after updates.

    Incremental mode replays only the joint-state facts of the ``touched``
    joints and recomputes lifted states. ``full`` drops every state label and
    recomputes the closure from scratch.
    """
    if full:
        states = _state_concepts(tbox)
        facts, _ = saturate((f for f in graph.facts
                             if not (isinstance(f, ConceptAssertion) and f.concept in states)), tbox)
        return replace(graph, facts=facts)
    touched = set(touched)
    qualities = {mint_quality(j, JOINT_STATE) for j in touched}
    replay = {f for f in graph.facts
              if (isinstance(f, ObjectAssertion) and f.subject in touched and f.property == HAS_QUALITY)
              or (isinstance(f, DataAssertion) and f.subject in qualities
                  and f.property == HAS_JOINT_VALUE)}
    facts = set(graph.facts)
    facts |= materialize(facts - replay, tbox, delta=replay).derived_facts
    lifted = classify_box_states(facts, tbox) - facts
    if lifted:
        facts |= lifted
        facts |= materialize(facts - lifted, tbox, delta=lifted).derived_facts
    return replace(graph, facts=frozenset(facts))


def state_labels(graph: Graph | Iterable[Fact], tbox: TBox) -> dict[str, frozenset[str]]:
    """Open/closed style labels per individual (only individuals with a label)."""
    facts = graph.facts if isinstance(graph, Graph) else graph
    states = _state_concepts(tbox)
    out: dict[str, set[str]] = {}
    for f in facts:
        if isinstance(f, ConceptAssertion) and f.concept in states:
            out.setdefault(f.individual, set()).add(f.concept)
    return {k: frozenset(v) for k, v in out.items()}


@dataclass(frozen=True)
class StateEvent:
    """A change of an individual's state labels caused by one update."""

    individual: str
    before: frozenset[str]
    after: frozenset[str]
    ts: int

    @property
    def kind(self) -> str:
        return "reclassified" if self.after else "unlabeled"

    def as_dict(self) -> dict:
        def label(s: frozenset[str]) -> str | None:
            return "+".join(sorted(c.rsplit("#", 1)[-1] for c in s)) or None

        return {"event": self.kind, "individual": self.individual,
                "from": label(self.before), "to": label(self.after), "ts": self.ts}


def watch(graph: Graph, updates: Iterable[JointUpdate], tbox: TBox, base: str = DEFAULT_BASE,
          *, full: bool = False) -> Iterator[tuple[Graph, list[StateEvent]]]:
    """Apply updates one at a time, yielding each new snapshot with its label changes.

    The starting graph is saturated first, so a merely translated graph is fine.
    """
    graph = refresh(graph, tbox, full=True)
    labels = state_labels(graph, tbox)
    for update in updates:
        graph = apply_joint_update(graph, update, base, tbox)
        graph = refresh(graph, tbox, touched={iri_of_path(update.path, base)}, full=full)
        new_labels = state_labels(graph, tbox)
        events = [StateEvent(ind, labels.get(ind, frozenset()), new_labels.get(ind, frozenset()),
                             update.ts)
                  for ind in sorted(set(labels) | set(new_labels))
                  if labels.get(ind, frozenset()) != new_labels.get(ind, frozenset())]
        labels = new_labels
        yield graph, events


__all__ = [
    "Graph", "HEADER", "JointUpdate", "StateEvent", "Stats", "apply_joint_update", "load",
    "parse_updates", "refresh", "scene_prefixes", "serialize", "state_labels", "stats", "to_owl",
    "watch",
]
