"""Translate a composed stage into ABox facts.

For every concrete prim: its typed schema and API schemas become existential
assertions, concrete children become ``hasPart`` edges, semantic tags become
concept assertions, relationships become object-property edges and
attributes become data values on a per-prim, per-quality individual.
"""

from __future__ import annotations

import warnings
from urllib.parse import quote, unquote

from .composition import Stage
from .errors import DanglingTag
from .facts import ConceptAssertion, DataAssertion, ExistentialAssertion, Fact, ObjectAssertion
from .namespaces import DEFAULT_BASE, USD, local_name
from .schemas import SchemaRegistry, builtin_registry
from .tbox import HAS_API, HAS_PART, HAS_QUALITY, HAS_TYPED_SCHEMA, QUALITY, TBox
from .usda.model import Path, Specifier

SEMANTIC_LABEL = "semanticTag:semanticLabel"
_NAMESPACE_KEYS = ("rdf:namespace", "rdf:ns")
_NAME_KEYS = ("rdf:conceptName", "rdf:name")


class DanglingRelationTarget(UserWarning):
    """A relationship points at a path with no prim; the edge is still emitted."""


class DanglingTagWarning(UserWarning):
    """A semantic tag could not be resolved and was skipped."""


class UnknownTagConcept(UserWarning):
    """A semantic tag names a concept the terminology does not define."""


def _join(base: str) -> str:
    return base if base.endswith(("#", "/")) else base + "#"


def iri_of_path(path: Path, base: str = DEFAULT_BASE) -> str:
    """``/world/box`` becomes ``<base>#world.box``; injective on prim paths."""
    if path.is_root:
        raise ValueError("the pseudo-root has no IRI")
    return _join(base) + ".".join(quote(seg, safe="") for seg in path.segments)


def path_of_iri(iri: str, base: str = DEFAULT_BASE) -> Path:
    """Inverse of :func:`iri_of_path`."""
    prefix = _join(base)
    if not iri.startswith(prefix):
        raise ValueError(f"{iri} is not under {prefix}")
    return Path(tuple(unquote(seg) for seg in iri[len(prefix):].split(".")))


def schema_iri(name: str) -> str:
    return USD + name


def mint_quality(prim_iri: str, quality_kind: str) -> str:
    """Deterministic quality individual of one prim for one quality concept.

    The ``-`` separator cannot occur in an encoded path, so minted IRIs never
    collide with prim IRIs.
    """
    return f"{prim_iri}.quality-{local_name(quality_kind)}"


def resolve_tag(stage: Stage, target: Path) -> tuple[str, str]:
    """(namespace, concept name) carried by the class prim at ``target``."""
    prim = stage.get(target)
    if prim is None:
        raise DanglingTag("?", str(target), "does not exist")
    if prim.specifier is not Specifier.CLS:
        raise DanglingTag("?", str(target), "is not a class prim")
    ns = next((prim.get(k) for k in _NAMESPACE_KEYS if prim.get(k) is not None), None)
    name = next((prim.get(k) for k in _NAME_KEYS if prim.get(k) is not None), None)
    if ns is None or name is None:
        raise DanglingTag("?", str(target), "lacks rdf:namespace/rdf:conceptName")
    return str(ns.value.payload), str(name.value.payload)


def translate(
    stage: Stage,
    tbox: TBox | None = None,
    base: str = DEFAULT_BASE,
    registry: SchemaRegistry | None = None,
    *,
    strict_tags: bool = True,
) -> frozenset[Fact]:
    """Build the ABox of a composed stage.

    Args:
        stage: composed stage, including the class prims that tags point at.
        tbox: when given, tags naming concepts outside it raise a warning.
        base: namespace for prim individuals.
        registry: schema registry used for quality bindings and property IRIs.
        strict_tags: raise :class:`DanglingTag` on unresolvable tags; when
            false, warn and skip them.
    """
    registry = registry if registry is not None else builtin_registry()
    abox: set[Fact] = set()
    for prim in stage.concrete():
        i = iri_of_path(prim.path, base)
        if prim.type_name is not None:
            abox.add(ExistentialAssertion(i, HAS_TYPED_SCHEMA, schema_iri(prim.type_name)))
        for child_path in prim.child_paths:
            if stage[child_path].is_concrete:
                abox.add(ObjectAssertion(i, HAS_PART, iri_of_path(child_path, base)))
        for api in prim.api_schemas:
            abox.add(ExistentialAssertion(i, HAS_API, schema_iri(api)))
        for prop in prim.properties:
            if prop.name == SEMANTIC_LABEL and prop.is_relationship:
                for target in prop.value.payload:
                    try:
                        ns, name = resolve_tag(stage, target)
                    except DanglingTag as exc:
                        err = DanglingTag(str(prim.path), str(target), str(exc).split(" ", 3)[-1])
                        if strict_tags:
                            raise err from None
                        warnings.warn(str(err), DanglingTagWarning, stacklevel=2)
                        continue
                    if tbox is not None and ns + name not in tbox.concepts:
                        warnings.warn(f"{prim.path}: tag concept {ns + name} is not in the terminology",
                                      UnknownTagConcept, stacklevel=2)
                    abox.add(ConceptAssertion(i, ns + name))
            elif prop.is_relationship:
                p = registry.property_iri(prop.name)
                for target in prop.value.payload:
                    if target not in stage:
                        warnings.warn(f"{prim.path}.{prop.name}: no prim at {target}",
                                      DanglingRelationTarget, stacklevel=2)
                    abox.add(ObjectAssertion(i, p, iri_of_path(target, base)))
            else:
                kind = registry.quality_binding(prop.name) or QUALITY
                q = mint_quality(i, kind)
                abox.add(ObjectAssertion(i, HAS_QUALITY, q))
                abox.add(DataAssertion(q, registry.property_iri(prop.name), prop.value))
    return frozenset(abox)
