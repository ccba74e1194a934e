"""Sublayer and inherits composition: layers in, a flat :class:`Stage` out.

Strength order is root layer first, then its sublayers in declaration order,
depth first. Within one prim, opinions from any layer beat opinions reached
through inherits arcs.
"""

from __future__ import annotations

import posixpath
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path as FsPath
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, Union

from .errors import (
    ConflictingTypedSchema,
    InheritCycle,
    InheritTargetNotClass,
    InheritTargetNotFound,
    PrimNotFound,
    SublayerCycle,
    SublayerNotFound,
)
from .usda.model import Layer, Path, PrimSpec, Property, Specifier
from .usda.parser import parse_file, parse_text

Loader = Callable[[str], Layer]


class CompositionWarning(UserWarning):
    """Non-fatal composition problem, e.g. an ``over`` with nothing to override."""


# -- layer stacks -------------------------------------------------------------


def resolve_identifier(ref: str, referrer: str) -> str:
    """Resolve a sublayer reference relative to the referring layer's directory."""
    if posixpath.isabs(ref) or referrer.startswith("<"):
        return posixpath.normpath(ref)
    return posixpath.normpath(posixpath.join(posixpath.dirname(referrer), ref))


class FileLoader:
    """Load sublayers from disk."""

    def __call__(self, identifier: str) -> Layer:
        try:
            return parse_file(identifier)
        except (FileNotFoundError, IsADirectoryError):
            raise SublayerNotFound(identifier) from None


class MemoryLoader:
    """Load sublayers from a mapping of identifier to usda text or Layer."""

    def __init__(self, layers: Mapping[str, Union[str, Layer]]):
        self._layers = {posixpath.normpath(k): v for k, v in layers.items()}

    def __call__(self, identifier: str) -> Layer:
        try:
            item = self._layers[posixpath.normpath(identifier)]
        except KeyError:
            raise SublayerNotFound(identifier) from None
        if isinstance(item, Layer):
            return item
        return parse_text(item, identifier)


@dataclass
class LayerStack:
    layers: list[Layer] = field(default_factory=list)

    @property
    def identifiers(self) -> list[str]:
        return [layer.source_id for layer in self.layers]


def resolve_sublayers(root: Layer, loader: Loader) -> LayerStack:
    """Collect ``root`` and every reachable sublayer, strongest first.

    A layer reached twice through different branches is kept at its first
    position; reaching a layer that is still on the current branch is a cycle.
    """
    root_id = posixpath.normpath(root.source_id) if not root.source_id.startswith("<") else root.source_id
    stack = LayerStack([root])
    seen = {root_id}

    def visit(layer: Layer, layer_id: str, chain: list[str]) -> None:
        for ref in layer.sublayer_refs:
            ident = resolve_identifier(ref, layer_id)
            if ident in chain:
                raise SublayerCycle(chain + [ident])
            if ident in seen:
                continue
            try:
                sub = loader(ident)
            except SublayerNotFound:
                raise
            except (FileNotFoundError, KeyError):
                raise SublayerNotFound(ident) from None
            if sub.source_id != ident:
                sub = replace(sub, source_id=ident)
            seen.add(ident)
            stack.layers.append(sub)
            visit(sub, ident, chain + [ident])

    visit(root, root_id, [root_id])
    return stack


# -- composed stage -------------------------------------------------------------


@dataclass(frozen=True)
class ComposedPrim:
    specifier: Specifier
    type_name: str | None
    path: Path
    child_paths: tuple[Path, ...]
    api_schemas: tuple[str, ...]
    properties: tuple[Property, ...]
    inherits: tuple[Path, ...] = ()

    @property
    def is_concrete(self) -> bool:
        return self.specifier is Specifier.DEF

    def get(self, name: str) -> Property | None:
        for prop in self.properties:
            if prop.name == name:
                return prop
        return None


class Stage(Mapping[Path, ComposedPrim]):
    """Read-only map from path to composed prim, iterated in path order."""

    def __init__(self, prims: Iterable[ComposedPrim]):
        ordered = sorted(prims, key=lambda p: p.path.segments)
        self._prims = MappingProxyType({p.path: p for p in ordered})

    def __getitem__(self, path: Path) -> ComposedPrim:
        return self._prims[path]

    def __iter__(self) -> Iterator[Path]:
        return iter(self._prims)

    def __len__(self) -> int:
        return len(self._prims)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Stage):
            return NotImplemented
        return dict(self._prims) == dict(other._prims)

    __hash__ = None  # type: ignore[assignment]

    @property
    def prims(self) -> Mapping[Path, ComposedPrim]:
        return self._prims

    def concrete(self) -> Iterator[ComposedPrim]:
        return (p for p in self._prims.values() if p.is_concrete)


def _merge_properties(*groups: Iterable[Property]) -> list[Property]:
    """First opinion per name wins; order follows first appearance."""
    out: dict[str, Property] = {}
    for group in groups:
        for prop in group:
            out.setdefault(prop.name, prop)
    return list(out.values())


def _merge_names(*groups: Iterable) -> list:
    out: dict = {}
    for group in groups:
        for item in group:
            out.setdefault(item, None)
    return list(out)


@dataclass
class _Merged:
    specifier: Specifier
    type_name: str | None
    api_schemas: list[str]
    inherits: list[Path]
    properties: list[Property]


def compose_stage(stack: LayerStack) -> Stage:
    """Flatten a layer stack into a :class:`Stage`.

    Raises:
        ConflictingTypedSchema: when layers name different typed schemas for a path.
        InheritTargetNotFound, InheritTargetNotClass, InheritCycle: on bad inherits arcs.
    """
    opinions: dict[Path, list[PrimSpec]] = {}
    for layer in stack.layers:
        for spec in layer.walk():
            opinions.setdefault(spec.path, []).append(spec)

    merged: dict[Path, _Merged] = {}
    for path in sorted(opinions, key=lambda p: (len(p.segments), p.segments)):
        specs = opinions[path]
        if len(path.segments) > 1 and path.parent not in merged:
            warnings.warn(f"{path}: dropped because its parent prim does not exist",
                          CompositionWarning, stacklevel=2)
            continue
        kinds = {s.specifier for s in specs}
        if Specifier.DEF in kinds:
            specifier = Specifier.DEF
        elif Specifier.CLS in kinds:
            specifier = Specifier.CLS
        else:
            warnings.warn(f"{path}: 'over' without any def or class opinion; prim dropped",
                          CompositionWarning, stacklevel=2)
            continue
        type_name = None
        for s in specs:
            if s.type_name is None:
                continue
            if type_name is None:
                type_name = s.type_name
            elif s.type_name != type_name:
                raise ConflictingTypedSchema(str(path), (type_name, s.type_name))
        merged[path] = _Merged(
            specifier,
            type_name,
            _merge_names(*(s.api_schemas for s in specs)),
            _merge_names(*(s.inherits for s in specs)),
            _merge_properties(*(s.properties for s in specs)),
        )

    resolved: dict[Path, tuple[list[Property], list[str]]] = {}

    def resolve(path: Path, chain: list[Path]) -> tuple[list[Property], list[str]]:
        if path in resolved:
            return resolved[path]
        m = merged[path]
        prop_groups = [m.properties]
        api_groups = [m.api_schemas]
        for target in m.inherits:
            if target in chain or target == path:
                raise InheritCycle([str(p) for p in chain + [path, target]])
            if target not in merged:
                raise InheritTargetNotFound(str(path), str(target))
            if merged[target].specifier is not Specifier.CLS:
                raise InheritTargetNotClass(str(path), str(target))
            props, apis = resolve(target, chain + [path])
            prop_groups.append(props)
            api_groups.append(apis)
        result = (_merge_properties(*prop_groups), _merge_names(*api_groups))
        resolved[path] = result
        return result

    children: dict[Path, list[Path]] = {p: [] for p in merged}
    for path in merged:
        if len(path.segments) > 1:
            children[path.parent].append(path)

    prims = []
    for path, m in merged.items():
        props, apis = resolve(path, [])
        prims.append(ComposedPrim(
            specifier=m.specifier,
            type_name=m.type_name,
            path=path,
            child_paths=tuple(sorted(children[path])),
            api_schemas=tuple(apis),
            properties=tuple(props),
            inherits=tuple(m.inherits),
        ))
    return Stage(prims)


def resolve_inherits(spec: PrimSpec, stage: Stage) -> list[Property]:
    """Properties of ``spec`` after applying its inherits arcs against ``stage``.

    Local opinions win; earlier targets are stronger than later ones. Class
    prims in ``stage`` are already composed, so chains through them are
    followed transitively.
    """
    groups: list[Iterable[Property]] = [spec.properties]
    for target in spec.inherits:
        if target == spec.path:
            raise InheritCycle([str(spec.path), str(target)])
        prim = stage.get(target)
        if prim is None:
            raise InheritTargetNotFound(str(spec.path), str(target))
        if prim.specifier is not Specifier.CLS:
            raise InheritTargetNotClass(str(spec.path), str(target))
        groups.append(prim.properties)
    return _merge_properties(*groups)


def resolve_path(stage: Stage, path: Path | str) -> ComposedPrim:
    """Exact-match lookup; the pseudo-root is not a prim."""
    if isinstance(path, str):
        path = Path.parse(path)
    try:
        return stage[path]
    except KeyError:
        raise PrimNotFound(str(path)) from None


def load_stage(source: str | FsPath | Layer, loader: Loader | None = None) -> Stage:
    """Parse (if needed), resolve sublayers and compose in one call."""
    root = source if isinstance(source, Layer) else parse_file(source)
    return compose_stage(resolve_sublayers(root, loader or FileLoader()))
