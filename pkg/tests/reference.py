"""Random scene descriptions plus a naive, self-contained ABox reference.

The reference works from the generator's own description of the scene, not
from a parsed or composed stage, and spells out namespaces and the
attribute-to-quality table by hand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from hypothesis import strategies as st

NS_USD = "https://w3id.org/usdkg/usd#"
NS_DUL = "http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#"
BASE = "http://example.org/scene#"

# attribute name -> (datatype, quality local name or None for the generic quality)
ATTRIBUTES = {
    "size": ("double", "Shape"),
    "xformOp:translate": ("float3", "Shape"),
    "xformOpOrder": ("token[]", "Shape"),
    "primvars:displayColor": ("color3f[]", "Color"),
    "physics:mass": ("float", "Mass"),
    "physics:density": ("float", "Mass"),
    "jointState:value": ("float", "JointState"),
    "physics:axis": ("token", None),
    "label": ("string", None),
    "enabled": ("bool", None),
    "custom:weights": ("float[]", None),
}
RELATIONS = ["physics:body0", "physics:body1", "custom:link"]
TYPES = [None, "Xform", "Cube", "PhysicsRevoluteJoint", "Mesh"]
APIS = ["PhysicsMassAPI", "JointStateAPI", "GraspAPI"]
TAGS = [("http://ex.org/kitchen#", "Cup"), ("http://ex.org/kitchen#", "Drawer"), (NS_USD, "Thing")]


@dataclass
class PrimDesc:
    segments: tuple[str, ...]
    concrete: bool
    type_name: str | None
    apis: list[str]
    attributes: dict[str, object]
    relations: dict[str, list[tuple[str, ...]]]
    tags: list[int] = field(default_factory=list)


def _payload(datatype: str):
    f = st.floats(allow_nan=False, allow_infinity=False, width=32)
    return {
        "double": f, "float": f, "bool": st.booleans(),
        "token": st.text(alphabet="abcxyz XYZ", max_size=4),
        "string": st.text(alphabet="abc \"\\é", max_size=4),
        "float3": st.tuples(f, f, f),
        "token[]": st.lists(st.sampled_from(["a", "xformOp:translate"]), max_size=2).map(tuple),
        "float[]": st.lists(f, max_size=2).map(tuple),
        "color3f[]": st.lists(st.tuples(f, f, f), max_size=2).map(tuple),
    }[datatype]


@st.composite
def scenes(draw, max_prims: int = 12) -> list[PrimDesc]:
    n = draw(st.integers(1, max_prims))
    prims: list[PrimDesc] = []
    for k in range(n):
        parent = draw(st.integers(-1, k - 1)) if k else -1
        segs = (prims[parent].segments if parent >= 0 else ()) + (f"p{k}",)
        attr_names = draw(st.lists(st.sampled_from(sorted(ATTRIBUTES)), max_size=3, unique=True))
        prims.append(PrimDesc(
            segments=segs,
            concrete=draw(st.integers(0, 5)) > 0,
            type_name=draw(st.sampled_from(TYPES)),
            apis=draw(st.lists(st.sampled_from(APIS), max_size=2, unique=True)),
            attributes={a: draw(_payload(ATTRIBUTES[a][0])) for a in attr_names},
            relations={},
            tags=draw(st.lists(st.integers(0, len(TAGS) - 1), max_size=2, unique=True)),
        ))
    # relation targets may point anywhere, including at paths with no prim
    pool = [p.segments for p in prims] + [("missing",)]
    for p in prims:
        for r in draw(st.lists(st.sampled_from(RELATIONS), max_size=2, unique=True)):
            p.relations[r] = draw(st.lists(st.sampled_from(pool), min_size=1, max_size=2, unique=True))
    return prims


# -- usda text --------------------------------------------------------------------


def _num(x: float) -> str:
    return repr(float(x))


def _str(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _value(datatype: str, v) -> str:
    if datatype in ("double", "float"):
        return _num(v)
    if datatype == "bool":
        return "true" if v else "false"
    if datatype in ("token", "string"):
        return _str(v)
    if datatype == "float3":
        return "(" + ", ".join(map(_num, v)) + ")"
    if datatype == "token[]":
        return "[" + ", ".join(map(_str, v)) + "]"
    if datatype == "float[]":
        return "[" + ", ".join(map(_num, v)) + "]"
    return "[" + ", ".join("(" + ", ".join(map(_num, c)) + ")" for c in v) + "]"


def _path(segs) -> str:
    return "/" + "/".join(segs)


def scene_usda(prims: list[PrimDesc], tag_layer: str = "tags.usda") -> str:
    children: dict[tuple, list[PrimDesc]] = {}
    for p in prims:
        children.setdefault(p.segments[:-1], []).append(p)
    out = ["#usda 1.0", "(", f"    subLayers = [@{tag_layer}@]", ")"]

    def emit(p: PrimDesc, depth: int) -> None:
        pad = "    " * depth
        spec = "def" if p.concrete else "class"
        head = f'{pad}{spec} {p.type_name + " " if p.type_name else ""}"{p.segments[-1]}"'
        apis = p.apis + (["SemanticTagAPI"] if p.tags else [])
        if apis:
            out.append(head + " (")
            out.append(f"{pad}    prepend apiSchemas = [{', '.join(map(_str, apis))}]")
            out.append(f"{pad}) {{")
        else:
            out.append(head + " {")
        for name, v in p.attributes.items():
            out.append(f"{pad}    {ATTRIBUTES[name][0]} {name} = {_value(ATTRIBUTES[name][0], v)}")
        for name, targets in p.relations.items():
            out.append(f"{pad}    rel {name} = [{', '.join('<' + _path(t) + '>' for t in targets)}]")
        if p.tags:
            targets = ", ".join(f"</_tags/_{TAGS[t][1]}>" for t in p.tags)
            out.append(f"{pad}    rel semanticTag:semanticLabel = [{targets}]")
        for c in children.get(p.segments, []):
            emit(c, depth + 1)
        out.append(pad + "}")

    for p in children.get((), []):
        emit(p, 0)
    return "\n".join(out) + "\n"


def tag_layer_usda() -> str:
    out = ["#usda 1.0", 'class "_tags" {']
    for ns, name in TAGS:
        out += [f'    class "_{name}" {{',
                f"        string rdf:namespace = {_str(ns)}",
                f"        string rdf:conceptName = {_str(name)}",
                "    }"]
    return "\n".join(out + ["}"]) + "\n"


# -- reference translation ------------------------------------------------------------


def reference_abox(prims: list[PrimDesc]) -> set[tuple]:
    """Facts as plain tuples, computed straight from the scene description."""
    iri = {p.segments: BASE + ".".join(p.segments) for p in prims}
    concrete = {p.segments for p in prims if p.concrete}
    facts: set[tuple] = set()
    for p in prims:
        if not p.concrete:
            continue
        me = iri[p.segments]
        if p.type_name:
            facts.add(("some", me, NS_USD + "hasTypedSchema", NS_USD + p.type_name))
        for api in p.apis + (["SemanticTagAPI"] if p.tags else []):
            facts.add(("some", me, NS_USD + "hasAPI", NS_USD + api))
        if len(p.segments) > 1 and p.segments[:-1] in concrete:
            facts.add(("edge", iri[p.segments[:-1]], NS_DUL + "hasPart", me))
        for t in p.tags:
            ns, name = TAGS[t]
            facts.add(("type", me, ns + name))
        for name, targets in p.relations.items():
            for t in targets:
                facts.add(("edge", me, NS_USD + name, BASE + ".".join(t)))
        for name, v in p.attributes.items():
            datatype, quality = ATTRIBUTES[name]
            q = me + ".quality-" + (quality or "Quality")
            prop = NS_USD + ("hasJointValue" if name == "jointState:value" else name)
            facts.add(("edge", me, NS_DUL + "hasQuality", q))
            if datatype in ("double", "float"):
                v = float(v)
            elif datatype in ("float3",):
                v = tuple(map(float, v))
            facts.add(("value", q, prop, datatype, v))
    return facts


def as_tuples(abox) -> set[tuple]:
    """Library facts in the reference's tuple form."""
    out = set()
    for f in abox:
        kind = type(f).__name__
        if kind == "ConceptAssertion":
            out.add(("type", f.individual, f.concept))
        elif kind == "ExistentialAssertion":
            out.add(("some", f.individual, f.property, f.filler))
        elif kind == "ObjectAssertion":
            out.add(("edge", f.subject, f.property, f.object))
        else:
            out.add(("value", f.subject, f.property, f.literal.datatype, f.literal.payload))
    return out
