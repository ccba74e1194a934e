"""Terminology: concepts, property axioms and rules, plus the tagging layer.

The built-in terminology covers the scene-description ontology (prims,
qualities, schemas, connectedness) and the box open/closed theory. User
terminology files extend it; see ``docs/terminology.md`` for the syntax.
"""

from __future__ import annotations

import hashlib
import math
import re
import shlex
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path as FsPath
from typing import Iterable

from .errors import EmptyNamespace, RedefinitionOfBuiltin, TBoxError, TerminologyParseError
from .namespaces import BOX, DUL, USD, local_name
from .usda.model import ROOT, AttributeValue, Layer, Path, PrimSpec, Property, Specifier

GE = ">="
LT = "<"


@dataclass(frozen=True)
class Concept:
    iri: str
    namespace: str
    local_name: str
    parents: frozenset[str] = frozenset()


@dataclass(frozen=True)
class PropertyAxioms:
    iri: str
    parents: frozenset[str] = frozenset()
    symmetric: bool = False
    transitive: bool = False
    functional: bool = False
    data: bool = False
    inverse_of: str | None = None
    domain: str | None = None
    range: str | None = None
    max_cardinality: tuple[int, str] | None = None

    @property
    def local_name(self) -> str:
        return local_name(self.iri)


@dataclass(frozen=True)
class ClassificationRule:
    """``target(x)`` when a value reached from x along ``chain`` passes the threshold.

    All chain members but the last are object properties; the last is a data
    property with numeric values.
    """

    target: str
    chain: tuple[str, ...]
    comparator: str
    threshold: float

    def __post_init__(self) -> None:
        if self.comparator not in (GE, LT):
            raise ValueError(f"comparator must be >= or <, not {self.comparator!r}")
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite")
        if not self.chain:
            raise ValueError("empty property chain")

    def holds(self, value: float) -> bool:
        return value >= self.threshold if self.comparator == GE else value < self.threshold


@dataclass(frozen=True)
class AllValuesFrom:
    """Every ``property`` filler of an instance of ``concept`` is a ``filler``."""

    concept: str
    property: str
    filler: str


@dataclass(frozen=True)
class ChainTyping:
    """``target(y)`` for y reached from a ``concept`` instance along ``chain`` when ``guard(y)``."""

    concept: str
    chain: tuple[str, ...]
    guard: str
    target: str


@dataclass(frozen=True)
class LiftingRule:
    """A ``subject`` instance is ``state`` when all ``member`` individuals reachable
    over ``via`` are ``state``, and there is at least one."""

    subject: str
    state: str
    via: str
    member: str


@dataclass(frozen=True)
class Disjointness:
    first: str
    second: str

    @property
    def axiom_id(self) -> str:
        return f"disjoint({local_name(self.first)},{local_name(self.second)})"


@dataclass(frozen=True)
class TBox:
    concepts: dict[str, Concept] = field(default_factory=dict)
    properties: dict[str, PropertyAxioms] = field(default_factory=dict)
    rules: tuple[ClassificationRule, ...] = ()
    restrictions: tuple[AllValuesFrom, ...] = ()
    chain_typings: tuple[ChainTyping, ...] = ()
    liftings: tuple[LiftingRule, ...] = ()
    disjoint: tuple[Disjointness, ...] = ()
    builtin: frozenset[str] = frozenset()

    def __hash__(self) -> int:
        return id(self)

    # -- names -------------------------------------------------------------

    @cached_property
    def names(self) -> dict[str, str]:
        """Local name to IRI for every concept and property."""
        out: dict[str, str] = {}
        for iri in list(self.concepts) + list(self.properties):
            out.setdefault(local_name(iri), iri)
        return out

    # -- concept hierarchy -------------------------------------------------

    @cached_property
    def _ancestors(self) -> dict[str, frozenset[str]]:
        memo: dict[str, frozenset[str]] = {}

        def up(c: str, trail: tuple[str, ...]) -> frozenset[str]:
            if c in memo:
                return memo[c]
            if c in trail:
                raise TBoxError("concept hierarchy cycle: " + " -> ".join(trail + (c,)))
            acc = {c}
            concept = self.concepts.get(c)
            if concept is not None:
                for p in concept.parents:
                    acc |= up(p, trail + (c,))
            memo[c] = frozenset(acc)
            return memo[c]

        for c in self.concepts:
            up(c, ())
        return memo

    def ancestors(self, concept: str) -> frozenset[str]:
        """Reflexive set of superconcepts."""
        return self._ancestors.get(concept, frozenset({concept}))

    @cached_property
    def _descendants(self) -> dict[str, frozenset[str]]:
        down: dict[str, set[str]] = {c: set() for c in self.concepts}
        for c, ancs in self._ancestors.items():
            for a in ancs:
                down.setdefault(a, set()).add(c)
        return {c: frozenset(s) for c, s in down.items()}

    def descendants(self, concept: str) -> frozenset[str]:
        """Reflexive set of subconcepts."""
        return self._descendants.get(concept, frozenset({concept}))

    def is_subconcept(self, sub: str, sup: str) -> bool:
        return sup in self.ancestors(sub)

    # -- property hierarchy ------------------------------------------------

    @cached_property
    def _property_ancestors(self) -> dict[str, frozenset[str]]:
        memo: dict[str, frozenset[str]] = {}

        def up(p: str, trail: tuple[str, ...]) -> frozenset[str]:
            if p in memo:
                return memo[p]
            if p in trail:
                raise TBoxError("property hierarchy cycle: " + " -> ".join(trail + (p,)))
            acc = {p}
            ax = self.properties.get(p)
            if ax is not None:
                for q in ax.parents:
                    acc |= up(q, trail + (p,))
            memo[p] = frozenset(acc)
            return memo[p]

        for p in self.properties:
            up(p, ())
        return memo

    def property_ancestors(self, prop: str) -> frozenset[str]:
        return self._property_ancestors.get(prop, frozenset({prop}))

    def axioms(self, prop: str) -> PropertyAxioms | None:
        return self.properties.get(prop)

    def consistency_problems(self) -> list[str]:
        """Structural defects of the terminology itself (empty when sound)."""
        problems = []
        for ax in self.properties.values():
            if ax.symmetric and ax.functional:
                problems.append(f"{ax.iri} is both symmetric and functional")
            if any(ax.iri in self.property_ancestors(q) for q in ax.parents):
                problems.append(f"{ax.iri} is its own ancestor")
        for c in self.concepts:
            for p in self.concepts[c].parents:
                if c in self.ancestors(p):
                    problems.append(f"{c} is its own strict ancestor")
        return problems


# -- built-in terminology ------------------------------------------------------

_CONCEPTS = [
    (DUL, "Object", ()),
    (DUL, "PhysicalObject", ("Object",)),
    (DUL, "Quality", ()),
    (DUL, "Description", ()),
    (USD, "Prim", ("Object",)),
    (USD, "Shape", ("Quality",)),
    (USD, "CubeShape", ("Shape",)),
    (USD, "Mass", ("Quality",)),
    (USD, "Color", ("Quality",)),
    (USD, "JointState", ("Quality",)),
    (USD, "WithXform", ("PhysicalObject",)),
    (USD, "Joint", ("Object",)),
    (USD, "TypedSchema", ("Description",)),
    (USD, "APISchema", ("Description",)),
    (USD, "Xformable", ("TypedSchema",)),
    (USD, "Xform", ("Xformable",)),
    (USD, "Gprim", ("Xformable",)),
    (USD, "Cube", ("Gprim",)),
    (USD, "PhysicsJoint", ("TypedSchema",)),
    (USD, "PhysicsRevoluteJoint", ("PhysicsJoint",)),
    (USD, "PhysicsMassAPI", ("APISchema",)),
    (USD, "RdfAPI", ("APISchema",)),
    (USD, "SemanticTagAPI", ("APISchema",)),
    (USD, "JointStateAPI", ("APISchema",)),
    (BOX, "Box", ("PhysicalObject",)),
    (BOX, "Flap", ("PhysicalObject",)),
    (BOX, "Opened", ()),
    (BOX, "Closed", ()),
]

# (namespace, name, keyword arguments with names in place of IRIs)
_PROPERTIES = [
    (DUL, "hasQuality", {"range": "Quality", "max_cardinality": (1, "Shape")}),
    (DUL, "hasPart", {"transitive": True}),
    (DUL, "describes", {}),
    (USD, "hasShape", {"parents": ("hasQuality",), "domain": "PhysicalObject", "range": "Shape"}),
    (USD, "hasSchema", {"domain": "Prim"}),
    (USD, "hasTypedSchema", {"parents": ("hasSchema",)}),
    (USD, "hasAPI", {"parents": ("hasSchema",)}),
    (USD, "isSchemaOf", {"parents": ("describes",), "inverse_of": "hasSchema"}),
    (USD, "hasConnection", {"parents": ("hasTransitiveConnection",), "symmetric": True}),
    (USD, "hasTransitiveConnection", {"transitive": True}),
    (USD, "physics:body0", {"parents": ("hasConnection",)}),
    (USD, "physics:body1", {"parents": ("hasConnection",)}),
    (USD, "hasJointValue", {"data": True, "functional": True, "domain": "JointState"}),
]

# attribute properties and the quality they quantify
_ATTRIBUTE_DOMAINS = {
    "Shape": ("xformOpOrder", "xformOp:transform", "xformOp:translate", "xformOp:orient",
              "xformOp:scale", "size"),
    "Color": ("primvars:displayColor", "primvars:displayOpacity"),
    "Mass": ("physics:mass", "physics:centerOfMass", "physics:density"),
}

JOINT_THRESHOLD = 0.1


def builtin_tbox() -> TBox:
    iri = {name: ns + name for ns, name, _ in _CONCEPTS}
    iri.update({name: ns + name for ns, name, _ in _PROPERTIES})
    concepts = {
        iri[name]: Concept(iri[name], ns, name, frozenset(iri[p] for p in parents))
        for ns, name, parents in _CONCEPTS
    }
    properties = {}
    for ns, name, kw in _PROPERTIES:
        kw = dict(kw)
        kw["parents"] = frozenset(iri[p] for p in kw.get("parents", ()))
        for key in ("domain", "range", "inverse_of"):
            if key in kw:
                kw[key] = iri[kw[key]]
        if "max_cardinality" in kw:
            n, c = kw["max_cardinality"]
            kw["max_cardinality"] = (n, iri[c])
        properties[iri[name]] = PropertyAxioms(iri[name], **kw)
    for quality, names in _ATTRIBUTE_DOMAINS.items():
        for name in names:
            properties[USD + name] = PropertyAxioms(USD + name, data=True, domain=iri[quality])

    has_quality, joint_value = iri["hasQuality"], iri["hasJointValue"]
    connected = iri["hasTransitiveConnection"]
    builtin = frozenset(concepts) | frozenset(properties)
    return TBox(
        concepts=concepts,
        properties=properties,
        rules=(
            ClassificationRule(iri["Opened"], (has_quality, joint_value), GE, JOINT_THRESHOLD),
            ClassificationRule(iri["Closed"], (has_quality, joint_value), LT, JOINT_THRESHOLD),
        ),
        restrictions=(
            AllValuesFrom(iri["Xformable"], iri["isSchemaOf"], iri["PhysicalObject"]),
            AllValuesFrom(iri["Xformable"], iri["isSchemaOf"], iri["WithXform"]),
            AllValuesFrom(iri["PhysicsJoint"], iri["isSchemaOf"], iri["Joint"]),
        ),
        chain_typings=(
            ChainTyping(iri["Cube"], (iri["isSchemaOf"], has_quality), iri["Shape"], iri["CubeShape"]),
        ),
        liftings=(
            LiftingRule(iri["Box"], iri["Opened"], connected, iri["Joint"]),
            LiftingRule(iri["Box"], iri["Closed"], connected, iri["Joint"]),
        ),
        disjoint=(Disjointness(iri["Opened"], iri["Closed"]),),
        builtin=builtin,
    )


# well-known IRIs of the built-in terminology
HAS_PART = DUL + "hasPart"
HAS_QUALITY = DUL + "hasQuality"
QUALITY = DUL + "Quality"
PHYSICAL_OBJECT = DUL + "PhysicalObject"
HAS_TYPED_SCHEMA = USD + "hasTypedSchema"
HAS_API = USD + "hasAPI"
HAS_CONNECTION = USD + "hasConnection"
HAS_TRANSITIVE_CONNECTION = USD + "hasTransitiveConnection"
HAS_JOINT_VALUE = USD + "hasJointValue"
JOINT = USD + "Joint"
JOINT_STATE = USD + "JointState"
SHAPE = USD + "Shape"
OPENED = BOX + "Opened"
CLOSED = BOX + "Closed"
BOX_CONCEPT = BOX + "Box"
FLAP = BOX + "Flap"


# -- terminology files -----------------------------------------------------------

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_:\-]*\Z")


def load_tbox(doc: str, base: TBox | None = None) -> TBox:
    """Extend the built-in terminology (or ``base``) with declarations from ``doc``.

    Raises:
        TerminologyParseError: on syntax errors or unresolved names.
        RedefinitionOfBuiltin: when a declaration reuses a built-in name or IRI.
    """
    base = base if base is not None else builtin_tbox()
    statements = _tokenize_terminology(doc)

    # first pass: every declared name gets an IRI so later references may point forward
    names = dict(base.names)
    declared: dict[str, int] = {}
    default_ns = USD
    for lineno, words in statements:
        head = words[0]
        if head == "default-namespace":
            if len(words) != 2:
                raise TerminologyParseError("default-namespace takes one IRI", lineno)
            default_ns = words[1]
            continue
        if head not in ("concept", "property"):
            continue
        if len(words) < 2 or not _NAME_RE.match(words[1]):
            raise TerminologyParseError(f"{head} needs a name", lineno)
        name = words[1]
        ns = _option(words, "namespace", lineno)
        if head == "concept" and ns is None:
            raise TerminologyParseError(f"concept {name} needs a namespace", lineno)
        ns = ns if ns is not None else default_ns
        iri = ns + name
        if name in base.names or iri in base.builtin or iri in base.concepts or iri in base.properties:
            raise RedefinitionOfBuiltin(base.names.get(name, iri))
        if name in declared:
            raise TerminologyParseError(f"{name} is declared twice (first on line {declared[name]})",
                                        lineno)
        declared[name] = lineno
        names[name] = iri

    def ref(name: str, lineno: int) -> str:
        if name.startswith("<") and name.endswith(">"):
            return name[1:-1]
        if name not in names:
            raise TerminologyParseError(f"unknown name {name!r}", lineno)
        return names[name]

    concepts = dict(base.concepts)
    properties = dict(base.properties)
    rules = list(base.rules)
    restrictions = list(base.restrictions)
    chain_typings = list(base.chain_typings)
    liftings = list(base.liftings)
    disjoint = list(base.disjoint)
    default_ns = USD
    for lineno, words in statements:
        head = words[0]
        if head == "default-namespace":
            default_ns = words[1]
        elif head == "concept":
            name = words[1]
            ns = _option(words, "namespace", lineno)
            parents = _multi(words, "subclass-of")
            _only_keywords(words[2:], {"namespace": 1, "subclass-of": -1}, lineno)
            if not ns:
                raise EmptyNamespace(name)
            concepts[ns + name] = Concept(ns + name, ns, name,
                                          frozenset(ref(p, lineno) for p in parents))
        elif head == "property":
            name = words[1]
            ns = _option(words, "namespace", lineno) or default_ns
            _only_keywords(words[2:], {"namespace": 1, "subproperty-of": -1, "symmetric": 0,
                                       "transitive": 0, "functional": 0, "data": 0,
                                       "inverse-of": 1, "domain": 1, "range": 1, "max": 2},
                           lineno)
            max_c = None
            if "max" in words:
                i = words.index("max")
                try:
                    count = int(words[i + 1])
                except (IndexError, ValueError):
                    raise TerminologyParseError("max needs a count and a concept", lineno) from None
                if count < 0:
                    raise TerminologyParseError("max count must be non-negative", lineno)
                max_c = (count, ref(words[i + 2], lineno))
            inv = _option(words, "inverse-of", lineno)
            dom = _option(words, "domain", lineno)
            rng = _option(words, "range", lineno)
            properties[ns + name] = PropertyAxioms(
                ns + name,
                parents=frozenset(ref(p, lineno) for p in _multi(words, "subproperty-of")),
                symmetric="symmetric" in words,
                transitive="transitive" in words,
                functional="functional" in words,
                data="data" in words,
                inverse_of=ref(inv, lineno) if inv else None,
                domain=ref(dom, lineno) if dom else None,
                range=ref(rng, lineno) if rng else None,
                max_cardinality=max_c,
            )
        elif head == "rule":
            # rule CONCEPT when P1.P2 CMP NUMBER
            if len(words) != 6 or words[2] != "when":
                raise TerminologyParseError("expected: rule CONCEPT when CHAIN CMP NUMBER", lineno)
            try:
                threshold = float(words[5])
                rule = ClassificationRule(ref(words[1], lineno),
                                          tuple(ref(p, lineno) for p in words[3].split(".")),
                                          words[4], threshold)
            except ValueError as exc:
                raise TerminologyParseError(str(exc), lineno) from None
            rules.append(rule)
        elif head == "restrict":
            # restrict CONCEPT all PROPERTY CONCEPT
            if len(words) != 5 or words[2] != "all":
                raise TerminologyParseError("expected: restrict CONCEPT all PROPERTY CONCEPT", lineno)
            restrictions.append(AllValuesFrom(ref(words[1], lineno), ref(words[3], lineno),
                                              ref(words[4], lineno)))
        elif head == "classify":
            # classify CONCEPT via P1.P2 when GUARD as TARGET
            if len(words) != 8 or words[2] != "via" or words[4] != "when" or words[6] != "as":
                raise TerminologyParseError(
                    "expected: classify CONCEPT via CHAIN when CONCEPT as CONCEPT", lineno)
            chain_typings.append(ChainTyping(
                ref(words[1], lineno), tuple(ref(p, lineno) for p in words[3].split(".")),
                ref(words[5], lineno), ref(words[7], lineno)))
        elif head == "lift":
            # lift SUBJECT as STATE via PROPERTY over MEMBER
            if len(words) != 8 or words[2] != "as" or words[4] != "via" or words[6] != "over":
                raise TerminologyParseError(
                    "expected: lift CONCEPT as CONCEPT via PROPERTY over CONCEPT", lineno)
            liftings.append(LiftingRule(ref(words[1], lineno), ref(words[3], lineno),
                                        ref(words[5], lineno), ref(words[7], lineno)))
        elif head == "disjoint":
            if len(words) != 3:
                raise TerminologyParseError("expected: disjoint CONCEPT CONCEPT", lineno)
            disjoint.append(Disjointness(ref(words[1], lineno), ref(words[2], lineno)))
        else:
            raise TerminologyParseError(f"unknown declaration {head!r}", lineno)

    tbox = TBox(concepts, properties, tuple(rules), tuple(restrictions), tuple(chain_typings),
                tuple(liftings), tuple(disjoint), base.builtin)
    tbox.ancestors(next(iter(concepts), ""))  # surfaces hierarchy cycles now
    tbox.property_ancestors("")
    return tbox


def load_tbox_file(path: str | FsPath, base: TBox | None = None) -> TBox:
    return load_tbox(FsPath(path).read_text(encoding="utf-8"), base)


def _tokenize_terminology(doc: str) -> list[tuple[int, list[str]]]:
    out = []
    for lineno, raw in enumerate(doc.splitlines(), 1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        try:
            words = shlex.split(line)
        except ValueError as exc:
            raise TerminologyParseError(str(exc), lineno) from None
        out.append((lineno, words))
    return out


def _strip_comment(line: str) -> str:
    # '#' starts a comment unless it sits inside an IRI (no whitespace before it)
    for i, ch in enumerate(line):
        if ch == "#" and (i == 0 or line[i - 1].isspace()):
            return line[:i]
    return line


def _option(words: list[str], key: str, lineno: int) -> str | None:
    if key not in words:
        return None
    i = words.index(key)
    if i + 1 >= len(words):
        raise TerminologyParseError(f"{key} needs an argument", lineno)
    return words[i + 1]


_KEYWORDS = {"namespace", "subclass-of", "subproperty-of", "symmetric", "transitive",
             "functional", "data", "inverse-of", "domain", "range", "max"}


def _multi(words: list[str], key: str) -> list[str]:
    if key not in words:
        return []
    out = []
    for w in words[words.index(key) + 1:]:
        if w in _KEYWORDS:
            break
        out.append(w)
    return out


def _only_keywords(words: list[str], allowed: dict[str, int], lineno: int) -> None:
    i = 0
    while i < len(words):
        w = words[i]
        if w not in allowed:
            raise TerminologyParseError(f"unexpected {w!r}", lineno)
        arity = allowed[w]
        if arity < 0:
            i += 1
            while i < len(words) and words[i] not in _KEYWORDS:
                i += 1
        else:
            i += 1 + arity


# -- tagging sublayer --------------------------------------------------------------

RDF_NAMESPACE = "rdf:namespace"
RDF_CONCEPT_NAME = "rdf:conceptName"


def _prim_name(concept: Concept) -> str:
    base = re.sub(r"[^A-Za-z0-9_]", "_", concept.local_name) or "_"
    return "_class_" + base


def tagging_paths(tbox: TBox) -> dict[str, Path]:
    """Class-prim path of every concept in the tagging layer."""
    by_name: dict[str, list[Concept]] = {}
    for c in tbox.concepts.values():
        by_name.setdefault(_prim_name(c), []).append(c)
    names: dict[str, str] = {}
    for name, group in by_name.items():
        if len(group) == 1:
            names[group[0].iri] = name
        else:
            for c in group:
                names[c.iri] = name + "_" + hashlib.sha1(c.iri.encode()).hexdigest()[:8]

    paths: dict[str, Path] = {}

    def path_of(iri: str, trail: tuple[str, ...]) -> Path:
        if iri in paths:
            return paths[iri]
        if iri in trail:
            raise TBoxError("concept hierarchy cycle at " + iri)
        parents = sorted(p for p in tbox.concepts[iri].parents if p in tbox.concepts)
        parent_path = path_of(parents[0], trail + (iri,)) if parents else ROOT
        paths[iri] = parent_path.child(names[iri])
        return paths[iri]

    for iri in sorted(tbox.concepts):
        path_of(iri, ())
    return paths


def generate_tagging_sublayer(tbox: TBox, source_id: str = "tbox.usda") -> Layer:
    """One class prim per concept, nested along the (first) parent, carrying RdfAPI data."""
    for c in tbox.concepts.values():
        if not c.namespace:
            raise EmptyNamespace(c.iri)
    paths = tagging_paths(tbox)
    specs: dict[str, PrimSpec] = {}
    for iri in sorted(tbox.concepts, key=lambda i: paths[i].segments):
        c = tbox.concepts[iri]
        parents = sorted(p for p in c.parents if p in tbox.concepts)
        specs[iri] = PrimSpec(
            Specifier.CLS,
            None,
            paths[iri],
            api_schemas=["RdfAPI"],
            inherits=[paths[p] for p in parents[1:]],
            properties=[
                Property(RDF_NAMESPACE, AttributeValue("string", c.namespace)),
                Property(RDF_CONCEPT_NAME, AttributeValue("string", c.local_name)),
            ],
        )
    layer = Layer(source_id=source_id)
    by_path = {spec.path: spec for spec in specs.values()}
    for path in sorted(by_path, key=lambda p: p.segments):
        spec = by_path[path]
        if len(path.segments) == 1:
            layer.root_prims.append(spec)
        else:
            by_path[path.parent].children.append(spec)
    return layer


def iter_concepts(tbox: TBox) -> Iterable[Concept]:
    return (tbox.concepts[i] for i in sorted(tbox.concepts))
