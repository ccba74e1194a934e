import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usdkg import errors
from usdkg.composition import CompositionWarning, LayerStack, compose_stage
from usdkg.namespaces import BOX, DUL, USD
from usdkg.tbox import (
    GE,
    LT,
    TBox,
    Concept,
    builtin_tbox,
    generate_tagging_sublayer,
    load_tbox,
    tagging_paths,
)
from usdkg.translator import resolve_tag
from usdkg.usda import Path, Specifier, format_layer, parse_text

EX = "http://ex.org/onto#"


def test_has_shape_parent():
    tb = builtin_tbox()
    assert tb.properties[USD + "hasShape"].parents == {DUL + "hasQuality"}


def test_transitive_connection_flag():
    ax = builtin_tbox().axioms(USD + "hasTransitiveConnection")
    assert ax.transitive and not ax.symmetric


def test_connection_axioms():
    tb = builtin_tbox()
    assert tb.property_ancestors(USD + "physics:body0") >= {USD + "hasConnection",
                                                            USD + "hasTransitiveConnection"}
    assert tb.axioms(USD + "hasConnection").symmetric


def test_joint_rules():
    rules = {(r.target, r.comparator, r.threshold) for r in builtin_tbox().rules}
    assert rules == {(BOX + "Opened", GE, 0.1), (BOX + "Closed", LT, 0.1)}


def test_has_shape_domain_range_and_cardinality():
    ax = builtin_tbox().axioms(USD + "hasShape")
    assert (ax.domain, ax.range) == (DUL + "PhysicalObject", USD + "Shape")
    assert builtin_tbox().axioms(DUL + "hasQuality").max_cardinality == (1, USD + "Shape")


def test_builtin_is_consistent():
    assert builtin_tbox().consistency_problems() == []


def test_cube_shape_is_a_shape():
    tb = builtin_tbox()
    assert tb.is_subconcept(USD + "CubeShape", USD + "Shape")
    assert tb.is_subconcept(USD + "Shape", DUL + "Quality")
    assert tb.is_subconcept(USD + "Prim", DUL + "Object")


# -- terminology documents ---------------------------------------------------


def test_load_milk():
    tb = load_tbox(f"concept Milk namespace {EX} subclass-of PhysicalObject\n")
    assert tb.concepts[EX + "Milk"].parents == {DUL + "PhysicalObject"}
    assert tb.is_subconcept(EX + "Milk", DUL + "Object")


def test_redefining_builtin():
    with pytest.raises(errors.RedefinitionOfBuiltin):
        load_tbox("property hasShape\n")


def test_chain_of_ten():
    doc = f"concept C0 namespace {EX} subclass-of PhysicalObject\n" + "".join(
        f"concept C{i} namespace {EX} subclass-of C{i - 1}\n" for i in range(1, 10))
    tb = load_tbox(doc)
    builtin_above = builtin_tbox().ancestors(DUL + "PhysicalObject")
    assert tb.ancestors(EX + "C9") == {EX + f"C{i}" for i in range(10)} | builtin_above
    assert len(tb.ancestors(EX + "C9")) == 10 + len(builtin_above)


def test_property_rule_and_forward_reference():
    tb = load_tbox(
        f"default-namespace {EX}\n"
        "property hasLid subproperty-of hasPart range Lid   # Lid comes later\n"
        f"concept Lid namespace {EX}\n"
        "property lidAngle data\n"
        "rule Opened when hasLid.lidAngle >= 0.5\n"
    )
    assert tb.properties[EX + "hasLid"].range == EX + "Lid"
    assert tb.rules[-1].chain == (EX + "hasLid", EX + "lidAngle")


@pytest.mark.parametrize("doc, line", [
    ("concept A\n", 1),
    ("\nconcept A namespace http://x# subclass-of Nowhere\n", 2),
    ("rule Opened when hasQuality.hasJointValue ~ 0.1\n", 1),
    ("frobnicate A\n", 1),
    ('concept A namespace "http://x#\n', 1),
])
def test_terminology_errors(doc, line):
    with pytest.raises(errors.TerminologyParseError) as info:
        load_tbox(doc)
    assert info.value.line == line


# -- tagging layer -------------------------------------------------------------


def compose(layer):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CompositionWarning)
        return compose_stage(LayerStack([layer]))


def test_single_concept_layer():
    tb = TBox(concepts={EX + "Box": Concept(EX + "Box", EX, "Box")})
    layer = parse_text(format_layer(generate_tagging_sublayer(tb)))
    (prim,) = layer.root_prims
    assert prim.specifier is Specifier.CLS and prim.children == []
    assert prim.get("rdf:namespace").value.payload == EX
    assert prim.get("rdf:conceptName").value.payload == "Box"


def test_empty_tbox_layer():
    assert generate_tagging_sublayer(TBox()).root_prims == []


def test_flap_nested_under_physical_object():
    paths = tagging_paths(builtin_tbox())
    assert paths[DUL + "PhysicalObject"].is_prefix_of(paths[BOX + "Flap"])
    assert paths[BOX + "Flap"] == Path.parse("/_class_Object/_class_PhysicalObject/_class_Flap")


def test_empty_namespace():
    with pytest.raises(errors.EmptyNamespace):
        generate_tagging_sublayer(TBox(concepts={"Box": Concept("Box", "", "Box")}))


def test_name_collision_gets_suffix():
    a, b = "http://a.org#", "http://b.org#"
    tb = TBox(concepts={a + "Cup": Concept(a + "Cup", a, "Cup"), b + "Cup": Concept(b + "Cup", b, "Cup")})
    names = {p.name for p in tagging_paths(tb).values()}
    assert len(names) == 2 and all(n.startswith("_class_Cup_") for n in names)


def tagging_roundtrip(tb: TBox) -> dict[str, tuple[str, str]]:
    stage = compose(parse_text(format_layer(generate_tagging_sublayer(tb))))
    return {iri: resolve_tag(stage, path) for iri, path in tagging_paths(tb).items()}


def test_builtin_tagging_roundtrip():
    tb = builtin_tbox()
    assert tagging_roundtrip(tb) == {c.iri: (c.namespace, c.local_name) for c in tb.concepts.values()}


# -- random hierarchies ------------------------------------------------------------


@st.composite
def dags(draw):
    n = draw(st.integers(1, 12))
    parents = [draw(st.sets(st.integers(0, i - 1), max_size=3)) if i else set() for i in range(n)]
    namespaces = draw(st.lists(st.sampled_from([EX, "http://b.org/x/", "urn:c:"]), min_size=n, max_size=n))
    concepts = {}
    for i in range(n):
        iri = f"{namespaces[i]}K{i}"
        concepts[iri] = (i, iri, namespaces[i], {f"{namespaces[j]}K{j}" for j in parents[i]})
    return TBox(concepts={iri: Concept(iri, ns, f"K{i}", frozenset(ps))
                          for i, iri, ns, ps in concepts.values()})


def reach(tb: TBox) -> dict[str, set[str]]:
    """Reflexive-transitive parent closure by Warshall's algorithm."""
    nodes = list(tb.concepts)
    r = {a: {a} | set(tb.concepts[a].parents) for a in nodes}
    for k in nodes:
        for i in nodes:
            if k in r[i]:
                r[i] |= r[k]
    return r


@settings(max_examples=200, deadline=None)
@given(dags())
def test_subsumption_matches_warshall(tb):
    oracle = reach(tb)
    for a in tb.concepts:
        assert tb.ancestors(a) == oracle[a]
        assert tb.is_subconcept(a, a)
        for b in tb.ancestors(a):
            for c in tb.ancestors(b):
                assert tb.is_subconcept(a, c)


@settings(max_examples=200, deadline=None)
@given(dags())
def test_random_tagging_roundtrip(tb):
    assert tagging_roundtrip(tb) == {c.iri: (c.namespace, c.local_name) for c in tb.concepts.values()}
    stage = compose(generate_tagging_sublayer(tb))
    assert all(not p.is_concrete for p in stage.values())
