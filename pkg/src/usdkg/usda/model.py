"""Uncomposed scene description: paths, values, properties, prim specs, layers."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Any, Union

from ..errors import ArityMismatch, MalformedPath

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def is_valid_name(name: str) -> bool:
    return bool(_NAME_RE.match(name))


@dataclass(frozen=True, order=True)
class Path:
    """An absolute prim path; the empty segment tuple is the pseudo-root ``/``."""

    segments: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for seg in self.segments:
            if not isinstance(seg, str) or not _NAME_RE.match(seg):
                raise MalformedPath("/" + "/".join(map(str, self.segments)))

    @classmethod
    def parse(cls, text: str) -> "Path":
        if not text.startswith("/"):
            raise MalformedPath(text)
        if text == "/":
            return ROOT
        body = text[1:]
        segments = tuple(body.split("/"))
        if any(not _NAME_RE.match(s) for s in segments):
            raise MalformedPath(text)
        return cls(segments)

    @property
    def is_root(self) -> bool:
        return not self.segments

    @property
    def name(self) -> str:
        return self.segments[-1] if self.segments else ""

    @property
    def parent(self) -> "Path":
        if not self.segments:
            raise ValueError("the root path has no parent")
        return Path(self.segments[:-1])

    def child(self, name: str) -> "Path":
        return Path(self.segments + (name,))

    def is_prefix_of(self, other: "Path") -> bool:
        return other.segments[: len(self.segments)] == self.segments

    def __str__(self) -> str:
        return "/" + "/".join(self.segments)

    def __repr__(self) -> str:
        return f"Path({str(self)!r})"


ROOT = Path(())


# datatype tag -> (kind, arity); arity None means variable length
SCALAR_TYPES = {"token", "string", "float", "double", "bool"}
TUPLE_ARITY = {"float3": 3, "point3f": 3, "float4": 4, "quatf": 4, "matrix4d": 16}
ARRAY_TYPES = {"token[]": "token", "float[]": "float", "color3f[]": "color3f"}
REL = "rel-paths"
DATATYPES = frozenset(SCALAR_TYPES | set(TUPLE_ARITY) | set(ARRAY_TYPES) | {REL})
NUMERIC_SCALARS = {"float", "double"}

Payload = Union[str, float, bool, tuple]


@dataclass(frozen=True)
class AttributeValue:
    """A typed value.

    Payload shapes: ``str`` for token/string, ``float`` for float/double,
    ``bool`` for bool, a flat tuple of floats for fixed-arity tuples
    (matrix4d is 16 floats, row-major), a tuple of items for arrays
    (``color3f[]`` items are 3-tuples) and a tuple of :class:`Path` for
    relationship targets.
    """

    datatype: str
    payload: Any

    def __post_init__(self) -> None:
        dt, p = self.datatype, self.payload
        if dt not in DATATYPES:
            raise ValueError(f"unsupported datatype {dt!r}")
        if dt in TUPLE_ARITY:
            if not isinstance(p, tuple) or len(p) != TUPLE_ARITY[dt]:
                raise ArityMismatch(TUPLE_ARITY[dt], len(p) if isinstance(p, tuple) else 1, what=dt)
        elif dt == "color3f[]":
            for item in p:
                if len(item) != 3:
                    raise ArityMismatch(3, len(item), what="color3f")
        elif dt == REL:
            if not all(isinstance(x, Path) and not x.is_root for x in p):
                raise MalformedPath(repr(p))

    @property
    def is_numeric(self) -> bool:
        return self.datatype in NUMERIC_SCALARS and not isinstance(self.payload, bool)

    def as_float(self) -> float:
        if not self.is_numeric:
            raise TypeError(f"{self.datatype} value is not a numeric scalar")
        return float(self.payload)

    def text(self) -> str:
        """Canonical usda text of the value (also the KG lexical form)."""
        return format_value(self)


def _fmt_num(x: float) -> str:
    if math.isinf(x) or math.isnan(x):
        raise ValueError("non-finite numbers have no usda form")
    if x == int(x) and abs(x) < 1e16:
        return str(int(x)) if x != 0 or math.copysign(1, x) > 0 else "-0.0"
    return repr(float(x))


def _fmt_str(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def format_value(value: AttributeValue) -> str:
    dt, p = value.datatype, value.payload
    if dt in ("token", "string"):
        return _fmt_str(p)
    if dt in NUMERIC_SCALARS:
        return _fmt_num(p)
    if dt == "bool":
        return "true" if p else "false"
    if dt == "matrix4d":
        rows = [p[i:i + 4] for i in range(0, 16, 4)]
        return "(" + ", ".join("(" + ", ".join(_fmt_num(x) for x in r) + ")" for r in rows) + ")"
    if dt in TUPLE_ARITY:
        return "(" + ", ".join(_fmt_num(x) for x in p) + ")"
    if dt == "token[]":
        return "[" + ", ".join(_fmt_str(x) for x in p) + "]"
    if dt == "float[]":
        return "[" + ", ".join(_fmt_num(x) for x in p) + "]"
    if dt == "color3f[]":
        return "[" + ", ".join("(" + ", ".join(_fmt_num(x) for x in c) + ")" for c in p) + "]"
    if dt == REL:
        if len(p) == 1:
            return f"<{p[0]}>"
        return "[" + ", ".join(f"<{x}>" for x in p) + "]"
    raise AssertionError(dt)


class PropertyKind(enum.Enum):
    ATTRIBUTE = "attribute"
    RELATIONSHIP = "relationship"


@dataclass(frozen=True)
class Property:
    name: str
    value: AttributeValue

    @property
    def kind(self) -> PropertyKind:
        if self.value.datatype == REL:
            return PropertyKind.RELATIONSHIP
        return PropertyKind.ATTRIBUTE

    @property
    def is_relationship(self) -> bool:
        return self.value.datatype == REL


class Specifier(enum.Enum):
    DEF = "def"
    OVER = "over"
    CLS = "class"


@dataclass
class PrimSpec:
    specifier: Specifier
    type_name: str | None
    path: Path
    children: list["PrimSpec"] = field(default_factory=list)
    api_schemas: list[str] = field(default_factory=list)
    inherits: list[Path] = field(default_factory=list)
    properties: list[Property] = field(default_factory=list)

    def get(self, name: str) -> Property | None:
        for prop in self.properties:
            if prop.name == name:
                return prop
        return None

    def walk(self):
        """Yield this spec and all descendants, pre-order."""
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class Layer:
    source_id: str = "<memory>"
    sublayer_refs: list[str] = field(default_factory=list)
    root_prims: list[PrimSpec] = field(default_factory=list)

    def walk(self):
        for prim in self.root_prims:
            yield from prim.walk()

    def structure(self) -> tuple:
        """Field-by-field comparable form that ignores ``source_id``."""
        return (tuple(self.sublayer_refs), tuple(_spec_tuple(p) for p in self.root_prims))


def _spec_tuple(spec: PrimSpec) -> tuple:
    return (
        spec.specifier,
        spec.type_name,
        spec.path,
        tuple(spec.api_schemas),
        tuple(spec.inherits),
        tuple(spec.properties),
        tuple(_spec_tuple(c) for c in spec.children),
    )
