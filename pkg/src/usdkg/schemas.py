"""Typed and API schema definitions, and validation of composed prims against them."""

from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Iterable, Iterator

from .composition import ComposedPrim
from .errors import DuplicateSchema, SchemaFileError, UnknownParent
from .namespaces import DEFAULT_PREFIXES, DUL, USD
from .usda.model import DATATYPES, REL

TYPED = "typed"
API = "api"

SHAPE = USD + "Shape"
MASS = USD + "Mass"
COLOR = USD + "Color"
JOINT_STATE = USD + "JointState"
JOINT_VALUE = USD + "hasJointValue"


@dataclass(frozen=True)
class PropertySig:
    name: str
    datatype: str  # a usda datatype tag, or "rel"
    required: bool = False
    iri: str | None = None  # knowledge-graph property, when not USD ⊕ name


@dataclass(frozen=True)
class SchemaDef:
    name: str
    kind: str
    properties: tuple[PropertySig, ...] = ()
    applies_to: str | None = None
    quality_binding: str | None = None
    parent: str | None = None
    abstract: bool = False

    def __post_init__(self) -> None:
        if self.kind not in (TYPED, API):
            raise ValueError(f"schema kind must be 'typed' or 'api', not {self.kind!r}")
        names = [p.name for p in self.properties]
        if len(names) != len(set(names)):
            raise ValueError(f"schema {self.name} declares a property twice")


@dataclass(frozen=True, order=True)
class Diagnostic:
    path: str
    property: str
    code: str
    severity: str
    message: str = field(compare=False)

    def __str__(self) -> str:
        where = self.path + (f".{self.property}" if self.property else "")
        return f"{self.severity}: {where}: {self.code}: {self.message}"


class SchemaRegistry:
    """Immutable collection of schema definitions; :meth:`register` returns a copy."""

    def __init__(self, defs: Iterable[SchemaDef] = ()):
        self._defs: dict[str, SchemaDef] = {}
        for d in defs:
            self._check_new(d)
            self._defs[d.name] = d

    def _check_new(self, d: SchemaDef) -> None:
        if d.name in self._defs:
            raise DuplicateSchema(d.name)
        if d.parent is not None:
            parent = self._defs.get(d.parent)
            if parent is None or parent.kind != d.kind:
                raise UnknownParent(d.parent)

    def register(self, d: SchemaDef) -> "SchemaRegistry":
        new = SchemaRegistry()
        new._defs = dict(self._defs)
        new._check_new(d)
        new._defs[d.name] = d
        return new

    def get(self, name: str) -> SchemaDef | None:
        return self._defs.get(name)

    def __contains__(self, name: object) -> bool:
        return name in self._defs

    def __iter__(self) -> Iterator[SchemaDef]:
        return iter(self._defs.values())

    def __len__(self) -> int:
        return len(self._defs)

    def ancestry(self, name: str) -> list[SchemaDef]:
        """The schema followed by its ancestors, nearest first."""
        out = []
        d = self._defs.get(name)
        while d is not None:
            out.append(d)
            d = self._defs.get(d.parent) if d.parent else None
        return out

    def signatures(self, name: str) -> dict[str, PropertySig]:
        sigs: dict[str, PropertySig] = {}
        for d in self.ancestry(name):
            for sig in d.properties:
                sigs.setdefault(sig.name, sig)
        return sigs

    def _declaring(self, prop_name: str) -> tuple[SchemaDef, PropertySig] | None:
        index = self.__dict__.get("_index")
        if index is None:
            index = {}
            for d in self._defs.values():
                for sig in d.properties:
                    index.setdefault(sig.name, (d, sig))
            self._index = index
        return index.get(prop_name)

    def quality_binding(self, prop_name: str) -> str | None:
        """Quality concept that the first schema declaring ``prop_name`` binds it to."""
        found = self._declaring(prop_name)
        if found is None:
            return None
        d = found[0]
        for anc in self.ancestry(d.name):
            if anc.quality_binding:
                return anc.quality_binding
        return None

    def property_iri(self, prop_name: str) -> str:
        found = self._declaring(prop_name)
        if found is not None and found[1].iri:
            return found[1].iri
        return USD + prop_name

    def validate_prim(self, prim: ComposedPrim) -> list[Diagnostic]:
        return validate_prim(prim, self)


def _sig(name: str, datatype: str, **kw) -> PropertySig:
    return PropertySig(name, datatype, **kw)


_BUILTINS = (
    SchemaDef("Xformable", TYPED, (
        _sig("xformOpOrder", "token[]"),
        _sig("xformOp:transform", "matrix4d"),
        _sig("xformOp:translate", "float3"),
        _sig("xformOp:orient", "quatf"),
        _sig("xformOp:scale", "float3"),
    ), applies_to=DUL + "PhysicalObject", quality_binding=SHAPE, abstract=True),
    SchemaDef("Xform", TYPED, parent="Xformable"),
    SchemaDef("Gprim", TYPED, (
        _sig("primvars:displayColor", "color3f[]"),
        _sig("primvars:displayOpacity", "float[]"),
    ), quality_binding=COLOR, parent="Xformable"),
    SchemaDef("Cube", TYPED, (_sig("size", "double"),), quality_binding=SHAPE, parent="Gprim"),
    SchemaDef("PhysicsJoint", TYPED, (
        _sig("physics:body0", "rel"),
        _sig("physics:body1", "rel"),
        _sig("physics:localPos0", "point3f"),
        _sig("physics:localPos1", "point3f"),
        _sig("physics:localRot0", "quatf"),
        _sig("physics:localRot1", "quatf"),
        _sig("physics:jointEnabled", "bool"),
    ), applies_to=USD + "Joint"),
    SchemaDef("PhysicsRevoluteJoint", TYPED, (
        _sig("physics:axis", "token"),
        _sig("physics:lowerLimit", "float"),
        _sig("physics:upperLimit", "float"),
    ), parent="PhysicsJoint"),
    SchemaDef("PhysicsMassAPI", API, (
        _sig("physics:mass", "float"),
        _sig("physics:centerOfMass", "point3f"),
        _sig("physics:density", "float"),
    ), quality_binding=MASS),
    SchemaDef("RdfAPI", API, (
        _sig("rdf:namespace", "string"),
        _sig("rdf:conceptName", "string"),
    )),
    SchemaDef("SemanticTagAPI", API, (_sig("semanticTag:semanticLabel", "rel"),)),
    SchemaDef("JointStateAPI", API, (
        _sig("jointState:value", "float", iri=JOINT_VALUE),
    ), quality_binding=JOINT_STATE),
)


def builtin_registry() -> SchemaRegistry:
    return SchemaRegistry(_BUILTINS)


def register_schema(registry: SchemaRegistry, d: SchemaDef) -> SchemaRegistry:
    return registry.register(d)


def validate_prim(prim: ComposedPrim, registry: SchemaRegistry) -> list[Diagnostic]:
    """Check a composed prim's properties against its typed and applied schemas.

    Undeclared properties are warnings (they are still translated); datatype
    mismatches and unknown schema names are errors.
    """
    path = str(prim.path)
    diags: list[Diagnostic] = []
    sigs: dict[str, PropertySig] = {}
    names = ([prim.type_name] if prim.type_name else []) + list(prim.api_schemas)
    for name in names:
        d = registry.get(name)
        if d is None:
            diags.append(Diagnostic(path, "", "UnknownSchema", "error", f"unknown schema {name!r}"))
            continue
        expected_kind = TYPED if name == prim.type_name else API
        if d.kind != expected_kind:
            diags.append(Diagnostic(path, "", "SchemaKindMismatch", "error",
                                    f"{name} is a {d.kind} schema"))
        for sig_name, sig in registry.signatures(name).items():
            sigs.setdefault(sig_name, sig)
    present = set()
    for prop in prim.properties:
        present.add(prop.name)
        sig = sigs.get(prop.name)
        if sig is None:
            diags.append(Diagnostic(path, prop.name, "UndeclaredProperty", "warn",
                                    "not declared by the prim's typed or applied schemas"))
            continue
        actual = "rel" if prop.value.datatype == REL else prop.value.datatype
        if actual != sig.datatype:
            diags.append(Diagnostic(path, prop.name, "DatatypeMismatch", "error",
                                    f"declared as {sig.datatype}, found {actual}"))
    for sig_name, sig in sigs.items():
        if sig.required and sig_name not in present:
            diags.append(Diagnostic(path, sig_name, "MissingRequiredProperty", "warn",
                                    "required by schema but absent"))
    return sorted(diags)


# -- schema extension files ---------------------------------------------------


def _expand(term: str, line: int) -> str:
    if term.startswith("<") and term.endswith(">"):
        return term[1:-1]
    prefix, sep, rest = term.partition(":")
    if sep and prefix in DEFAULT_PREFIXES:
        return DEFAULT_PREFIXES[prefix] + rest
    raise SchemaFileError(f"expected <iri> or prefixed name, got {term!r}", line)


# '#' starts a comment only at line start or after whitespace, so IRIs keep fragments
_COMMENT = re.compile(r"(^|\s)#.*")


def parse_schema_file(text: str, registry: SchemaRegistry | None = None) -> SchemaRegistry:
    """Extend ``registry`` (default: built-ins) with declarations from ``text``.

    The format is line oriented: a ``typed NAME ...`` or ``api NAME ...`` line
    opens a schema, indented ``property NAME DATATYPE ...`` lines follow.
    ``docs/schema-files.md`` has the grammar.
    """
    registry = registry if registry is not None else builtin_registry()
    pending: list[tuple[dict, list[PropertySig], int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _COMMENT.sub("", raw).strip()
        if not line:
            continue
        try:
            words = shlex.split(line)
        except ValueError as exc:
            raise SchemaFileError(str(exc), lineno) from None
        head = words[0]
        if head in (TYPED, API):
            if len(words) < 2:
                raise SchemaFileError("schema name missing", lineno)
            spec = {"name": words[1], "kind": head}
            i = 2
            while i < len(words):
                w = words[i]
                if w == "abstract":
                    spec["abstract"] = True
                    i += 1
                elif w in ("parent", "quality", "applies-to") and i + 1 < len(words):
                    arg = words[i + 1]
                    if w == "parent":
                        spec["parent"] = arg
                    elif w == "quality":
                        spec["quality_binding"] = _expand(arg, lineno)
                    else:
                        spec["applies_to"] = _expand(arg, lineno)
                    i += 2
                else:
                    raise SchemaFileError(f"unexpected {w!r}", lineno)
            pending.append((spec, [], lineno))
        elif head == "property":
            if not pending:
                raise SchemaFileError("property outside a schema block", lineno)
            if len(words) < 3:
                raise SchemaFileError("property needs a name and a datatype", lineno)
            name, datatype = words[1], words[2]
            if datatype != "rel" and datatype not in DATATYPES:
                raise SchemaFileError(f"unknown datatype {datatype!r}", lineno)
            kw: dict = {}
            i = 3
            while i < len(words):
                if words[i] == "required":
                    kw["required"] = True
                    i += 1
                elif words[i] == "iri" and i + 1 < len(words):
                    kw["iri"] = _expand(words[i + 1], lineno)
                    i += 2
                else:
                    raise SchemaFileError(f"unexpected {words[i]!r}", lineno)
            pending[-1][1].append(PropertySig(name, datatype, **kw))
        else:
            raise SchemaFileError(f"unknown declaration {head!r}", lineno)
    for spec, props, lineno in pending:
        try:
            registry = registry.register(SchemaDef(properties=tuple(props), **spec))
        except ValueError as exc:
            raise SchemaFileError(str(exc), lineno) from None
    return registry


def load_schema_file(path: str | FsPath, registry: SchemaRegistry | None = None) -> SchemaRegistry:
    return parse_schema_file(FsPath(path).read_text(encoding="utf-8"), registry)


__all__ = [
    "API", "COLOR", "Diagnostic", "JOINT_STATE", "JOINT_VALUE", "MASS", "PropertySig",
    "SHAPE", "SchemaDef", "SchemaRegistry", "TYPED", "builtin_registry", "load_schema_file",
    "parse_schema_file", "register_schema", "validate_prim",
]
