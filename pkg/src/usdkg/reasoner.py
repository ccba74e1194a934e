"""Forward-chaining materialization over the terminology's Horn fragment.

Every fact is processed once, in generations: when a fact is processed it is
joined against everything derived so far, so each rule body is matched as
soon as its last atom arrives. The generation count is reported as the
iteration count.

Box open/closed lifting is universally quantified over a box's joints and
therefore not monotone; it lives in :func:`classify_box_states` and is never
part of the fixpoint computed by :func:`materialize`.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .errors import CapExceeded, UnknownConcept
from .facts import ConceptAssertion, DataAssertion, Fact, Literal, ObjectAssertion
from .namespaces import local_name
from .tbox import HAS_TRANSITIVE_CONNECTION, TBox
from .usda.model import AttributeValue


def schema_individual(concept: str) -> str:
    """Canonical witness standing for "some instance of ``concept``"."""
    return concept + ".witness"


@dataclass(frozen=True, order=True)
class Violation:
    axiom: str
    individuals: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.axiom}: {', '.join(self.individuals)}"


@dataclass(frozen=True)
class InferenceReport:
    derived_facts: frozenset[Fact]
    iterations: int
    violations: tuple[Violation, ...] = field(default=())


def _numeric(lit: Literal) -> float | None:
    if isinstance(lit, AttributeValue) and lit.is_numeric:
        return lit.as_float()
    return None


class _Index:
    def __init__(self) -> None:
        self.facts: set[Fact] = set()
        self.types: dict[str, set[str]] = defaultdict(set)
        self.out: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
        self.inn: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
        self.data: dict[str, dict[str, set[Literal]]] = defaultdict(lambda: defaultdict(set))

    def add(self, f: Fact) -> bool:
        if f in self.facts:
            return False
        self.facts.add(f)
        if isinstance(f, ConceptAssertion):
            self.types[f.individual].add(f.concept)
        elif isinstance(f, ObjectAssertion):
            self.out[f.property][f.subject].add(f.object)
            self.inn[f.property][f.object].add(f.subject)
        elif isinstance(f, DataAssertion):
            self.data[f.property][f.subject].add(f.literal)
        return True

    def forward(self, node: str, chain: Iterable[str]) -> set[str]:
        frontier = {node}
        for p in chain:
            edges = self.out.get(p, {})
            frontier = {o for n in frontier for o in edges.get(n, ())}
            if not frontier:
                break
        return frontier

    def backward(self, node: str, chain: tuple[str, ...]) -> set[str]:
        frontier = {node}
        for p in reversed(chain):
            edges = self.inn.get(p, {})
            frontier = {s for n in frontier for s in edges.get(n, ())}
            if not frontier:
                break
        return frontier


class _Rules:
    """Terminology compiled into trigger tables."""

    def __init__(self, tbox: TBox):
        self.tbox = tbox
        self.inverse: dict[str, set[str]] = defaultdict(set)
        for ax in tbox.properties.values():
            if ax.inverse_of:
                self.inverse[ax.iri].add(ax.inverse_of)
                self.inverse[ax.inverse_of].add(ax.iri)
        self.restrict_by_concept = defaultdict(list)
        self.restrict_by_property = defaultdict(list)
        for r in tbox.restrictions:
            self.restrict_by_concept[r.concept].append(r)
            self.restrict_by_property[r.property].append(r)
        self.chain_by_concept = defaultdict(list)
        self.chain_by_guard = defaultdict(list)
        self.chain_by_property = defaultdict(list)
        for ct in tbox.chain_typings:
            self.chain_by_concept[ct.concept].append(ct)
            self.chain_by_guard[ct.guard].append(ct)
            for k, p in enumerate(ct.chain):
                self.chain_by_property[p].append((ct, k))
        self.rule_by_data = defaultdict(list)
        self.rule_by_object = defaultdict(list)
        for rule in tbox.rules:
            self.rule_by_data[rule.chain[-1]].append(rule)
            for k, p in enumerate(rule.chain[:-1]):
                self.rule_by_object[p].append((rule, k))
        self._sup: dict[str, frozenset[str]] = {}
        self._anc: dict[str, frozenset[str]] = {}

    def superproperties(self, p: str) -> frozenset[str]:
        s = self._sup.get(p)
        if s is None:
            s = self._sup[p] = self.tbox.property_ancestors(p) - {p}
        return s

    def superconcepts(self, c: str) -> frozenset[str]:
        s = self._anc.get(c)
        if s is None:
            s = self._anc[c] = self.tbox.ancestors(c) - {c}
        return s

    def consequences(self, f: Fact, ix: _Index) -> Iterable[Fact]:
        if isinstance(f, ConceptAssertion):
            yield from self._concept(f, ix)
        elif isinstance(f, ObjectAssertion):
            yield from self._object(f, ix)
        elif isinstance(f, DataAssertion):
            yield from self._data(f, ix)
        else:
            w = schema_individual(f.filler)
            yield ObjectAssertion(f.individual, f.property, w)
            yield ConceptAssertion(w, f.filler)

    def _concept(self, f: ConceptAssertion, ix: _Index) -> Iterable[Fact]:
        i, c = f.individual, f.concept
        for a in self.superconcepts(c):
            yield ConceptAssertion(i, a)
        for r in self.restrict_by_concept.get(c, ()):
            for o in ix.out.get(r.property, {}).get(i, ()):
                yield ConceptAssertion(o, r.filler)
        for ct in self.chain_by_concept.get(c, ()):
            for y in ix.forward(i, ct.chain):
                if ct.guard in ix.types.get(y, ()):
                    yield ConceptAssertion(y, ct.target)
        for ct in self.chain_by_guard.get(c, ()):
            if any(ct.concept in ix.types.get(x, ()) for x in ix.backward(i, ct.chain)):
                yield ConceptAssertion(i, ct.target)

    def _object(self, f: ObjectAssertion, ix: _Index) -> Iterable[Fact]:
        s, p, o = f.subject, f.property, f.object
        for q in self.superproperties(p):
            yield ObjectAssertion(s, q, o)
        for q in self.inverse.get(p, ()):
            yield ObjectAssertion(o, q, s)
        ax = self.tbox.properties.get(p)
        if ax is not None:
            if ax.symmetric:
                yield ObjectAssertion(o, p, s)
            if ax.transitive:
                for x in tuple(ix.inn[p].get(s, ())):
                    yield ObjectAssertion(x, p, o)
                for y in tuple(ix.out[p].get(o, ())):
                    yield ObjectAssertion(s, p, y)
            if ax.domain:
                yield ConceptAssertion(s, ax.domain)
            if ax.range:
                yield ConceptAssertion(o, ax.range)
        types_s = ix.types.get(s, ())
        for r in self.restrict_by_property.get(p, ()):
            if r.concept in types_s:
                yield ConceptAssertion(o, r.filler)
        for ct, k in self.chain_by_property.get(p, ()):
            starts = [x for x in ix.backward(s, ct.chain[:k]) if ct.concept in ix.types.get(x, ())]
            if starts:
                for y in ix.forward(o, ct.chain[k + 1:]):
                    if ct.guard in ix.types.get(y, ()):
                        yield ConceptAssertion(y, ct.target)
        for rule, k in self.rule_by_object.get(p, ()):
            starts = ix.backward(s, rule.chain[:k])
            if not starts:
                continue
            values = ix.data.get(rule.chain[-1], {})
            ends = ix.forward(o, rule.chain[k + 1:-1])
            if any(self._passes(rule, lit) for e in ends for lit in values.get(e, ())):
                for x in starts:
                    yield ConceptAssertion(x, rule.target)

    def _data(self, f: DataAssertion, ix: _Index) -> Iterable[Fact]:
        s, p = f.subject, f.property
        for q in self.superproperties(p):
            yield DataAssertion(s, q, f.literal)
        ax = self.tbox.properties.get(p)
        if ax is not None and ax.domain:
            yield ConceptAssertion(s, ax.domain)
        for rule in self.rule_by_data.get(p, ()):
            if self._passes(rule, f.literal):
                for x in ix.backward(s, rule.chain[:-1]):
                    yield ConceptAssertion(x, rule.target)

    @staticmethod
    def _passes(rule, lit: Literal) -> bool:
        v = _numeric(lit)
        return v is not None and rule.holds(v)


def materialize(
    abox: Iterable[Fact],
    tbox: TBox,
    *,
    delta: Iterable[Fact] | None = None,
    max_iterations: int | None = None,
) -> InferenceReport:
    """Least fixpoint of the terminology's rules over ``abox``.

    Args:
        abox: input facts.
        tbox: terminology supplying the rules.
        delta: incremental mode. ``abox`` is then taken to be closed already
            and only consequences of the new ``delta`` facts are computed.
        max_iterations: generation cap; defaults to ten times the input size.

    Raises:
        CapExceeded: the fixpoint was not reached within the cap.
    """
    base = set(abox)
    new = set(delta) - base if delta is not None else set()
    inputs = base | new
    cap = max_iterations if max_iterations is not None else max(1, 10 * len(inputs))
    rules = _Rules(tbox)
    ix = _Index()
    for f in inputs:
        ix.add(f)
    frontier = sorted(new if delta is not None else base, key=lambda f: f.sort_key())
    iterations = 0
    while True:
        iterations += 1
        if iterations > cap:
            raise CapExceeded(cap)
        nxt = []
        for f in frontier:
            for g in list(rules.consequences(f, ix)):
                if ix.add(g):
                    nxt.append(g)
        if not nxt:
            break
        frontier = nxt
    derived = frozenset(ix.facts - inputs)
    return InferenceReport(derived, iterations, tuple(check_consistency(ix.facts, tbox)))


def classify_box_states(abox: Iterable[Fact], tbox: TBox) -> set[ConceptAssertion]:
    """Lift member states onto subjects; a subject with mixed or no members gets nothing."""
    facts = abox if isinstance(abox, (set, frozenset)) else set(abox)
    types: dict[str, set[str]] = defaultdict(set)
    out: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
    for f in facts:
        if isinstance(f, ConceptAssertion):
            types[f.individual].add(f.concept)
        elif isinstance(f, ObjectAssertion):
            out[f.property][f.subject].add(f.object)
    result: set[ConceptAssertion] = set()
    for rule in tbox.liftings:
        subject_kinds = tbox.descendants(rule.subject)
        member_kinds = tbox.descendants(rule.member)
        state_kinds = tbox.descendants(rule.state)
        for ind, kinds in list(types.items()):
            if not kinds & subject_kinds:
                continue
            members = [j for j in out[rule.via].get(ind, ()) if types.get(j, set()) & member_kinds]
            if members and all(types[j] & state_kinds for j in members):
                result.add(ConceptAssertion(ind, rule.state))
    return result


def saturate(abox: Iterable[Fact], tbox: TBox, *, max_iterations: int | None = None
             ) -> tuple[frozenset[Fact], InferenceReport]:
    """Materialize, lift box states, and materialize their consequences.

    Returns the complete fact set and the report of the first pass.
    """
    facts = set(abox)
    report = materialize(facts, tbox, max_iterations=max_iterations)
    facts |= report.derived_facts
    states = classify_box_states(facts, tbox) - facts
    if states:
        facts |= states
        facts |= materialize(facts - states, tbox, delta=states).derived_facts
        report = InferenceReport(frozenset(facts) - set(abox), report.iterations,
                                 tuple(check_consistency(facts, tbox)))
    return frozenset(facts), report


def check_consistency(abox: Iterable[Fact], tbox: TBox) -> list[Violation]:
    """Cardinality, disjointness and functionality violations of a materialized ABox."""
    types: dict[str, set[str]] = defaultdict(set)
    out: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
    data: dict[str, dict[str, set[Literal]]] = defaultdict(lambda: defaultdict(set))
    for f in abox:
        if isinstance(f, ConceptAssertion):
            types[f.individual].add(f.concept)
        elif isinstance(f, ObjectAssertion):
            out[f.property][f.subject].add(f.object)
        elif isinstance(f, DataAssertion):
            data[f.property][f.subject].add(f.literal)

    def is_a(ind: str, concept: str) -> bool:
        return bool(types.get(ind, set()) & tbox.descendants(concept))

    violations = []
    for ax in tbox.properties.values():
        if ax.max_cardinality is not None:
            n, c = ax.max_cardinality
            axiom = f"max-cardinality({ax.local_name},{n},{local_name(c)})"
            for s, objs in out.get(ax.iri, {}).items():
                fillers = sorted(o for o in objs if is_a(o, c))
                if len(fillers) > n:
                    violations.append(Violation(axiom, (s, *fillers)))
        if ax.functional:
            table = data.get(ax.iri, {}) if ax.data else out.get(ax.iri, {})
            for s, vals in table.items():
                if len(vals) > 1:
                    violations.append(Violation(f"functional({ax.local_name})", (s,)))
    for d in tbox.disjoint:
        for ind in types:
            if is_a(ind, d.first) and is_a(ind, d.second):
                violations.append(Violation(d.axiom_id, (ind,)))
    return sorted(violations)


def query_instances(abox: Iterable[Fact], concept: str, tbox: TBox) -> set[str]:
    """Individuals asserted to be ``concept`` or one of its subconcepts."""
    if concept not in tbox.concepts:
        raise UnknownConcept(concept)
    kinds = tbox.descendants(concept)
    return {f.individual for f in abox if isinstance(f, ConceptAssertion) and f.concept in kinds}


def query_connected(abox: Iterable[Fact], a: str, b: str) -> bool:
    target = ObjectAssertion(a, HAS_TRANSITIVE_CONNECTION, b)
    if isinstance(abox, (set, frozenset)):
        return target in abox
    return any(f == target for f in abox)


__all__ = [
    "InferenceReport", "Violation", "check_consistency", "classify_box_states", "materialize",
    "query_connected", "query_instances", "saturate", "schema_individual",
]
