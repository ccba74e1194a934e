"""Print layers back to usda text."""

from __future__ import annotations

from .model import REL, Layer, PrimSpec, Property, _fmt_str

INDENT = "    "


def format_layer(layer: Layer) -> str:
    lines = ["#usda 1.0"]
    if layer.sublayer_refs:
        lines.append("(")
        lines.append(INDENT + "subLayers = [")
        for ref in layer.sublayer_refs:
            lines.append(INDENT * 2 + f"@{ref}@,")
        lines.append(INDENT + "]")
        lines.append(")")
    for prim in layer.root_prims:
        lines.append("")
        _format_prim(prim, 0, lines)
    return "\n".join(lines) + "\n"


def _format_prim(spec: PrimSpec, depth: int, lines: list[str]) -> None:
    pad = INDENT * depth
    head = spec.specifier.value
    if spec.type_name:
        head += f" {spec.type_name}"
    head += f' "{spec.path.name}"'
    if spec.api_schemas or spec.inherits:
        lines.append(pad + head + " (")
        if spec.api_schemas:
            names = ", ".join(_fmt_str(s) for s in spec.api_schemas)
            lines.append(pad + INDENT + f"prepend apiSchemas = [{names}]")
        if spec.inherits:
            targets = ", ".join(f"<{p}>" for p in spec.inherits)
            lines.append(pad + INDENT + f"inherits = [{targets}]")
        lines.append(pad + ")")
    else:
        lines.append(pad + head)
    lines.append(pad + "{")
    for prop in spec.properties:
        lines.append(pad + INDENT + format_property(prop))
    for child in spec.children:
        if spec.properties or child is not spec.children[0]:
            lines.append("")
        _format_prim(child, depth + 1, lines)
    lines.append(pad + "}")


def format_property(prop: Property) -> str:
    if prop.value.datatype == REL:
        return f"rel {prop.name} = {prop.value.text()}"
    return f"{prop.value.datatype} {prop.name} = {prop.value.text()}"

