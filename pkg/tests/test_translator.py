import warnings
from pathlib import Path as FsPath

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import names
from reference import as_tuples, reference_abox, scene_usda, scenes, tag_layer_usda
from usdkg import errors
from usdkg.composition import MemoryLoader, compose_stage, load_stage, resolve_sublayers
from usdkg.facts import ConceptAssertion, DataAssertion, ExistentialAssertion, ObjectAssertion
from usdkg.namespaces import BOX, DUL, USD
from usdkg.tbox import builtin_tbox
from usdkg.translator import (
    DanglingRelationTarget,
    DanglingTagWarning,
    UnknownTagConcept,
    iri_of_path,
    mint_quality,
    path_of_iri,
    translate,
)
from usdkg.usda import AttributeValue, Path, parse_text

FIXTURES = FsPath(__file__).parent / "fixtures" / "usda"
S = "http://example.org/scene#"


def stage_from(text: str, extra: dict[str, str] | None = None):
    loader = MemoryLoader({"tags.usda": tag_layer_usda(), **(extra or {})})
    return compose_stage(resolve_sublayers(parse_text(text, "root.usda"), loader))


def translate_scene(prims):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DanglingRelationTarget)
        return translate(stage_from(scene_usda(prims)))


@settings(max_examples=300, deadline=None)
@given(scenes())
def test_matches_naive_reference(prims):
    assert as_tuples(translate_scene(prims)) == reference_abox(prims)


@settings(max_examples=100, deadline=None)
@given(scenes())
def test_fact_counts(prims):
    abox = translate_scene(prims)
    live = [p for p in prims if p.concrete]
    by_type = {t: sum(isinstance(f, t) for f in abox) for t in
               (ExistentialAssertion, ConceptAssertion, ObjectAssertion, DataAssertion)}
    assert by_type[ExistentialAssertion] == sum(
        (p.type_name is not None) + len(p.apis) + bool(p.tags) for p in live)
    assert by_type[DataAssertion] == sum(len(p.attributes) for p in live)
    assert by_type[ConceptAssertion] == len({(p.segments, t) for p in live for t in p.tags})


@settings(max_examples=50, deadline=None)
@given(scenes())
def test_translation_is_deterministic(prims):
    assert translate_scene(prims) == translate_scene(prims)


# -- basic box fixture --------------------------------------------------------


def test_box_basic_contents():
    abox = translate(load_stage(FIXTURES / "box_basic.usda"))
    assert ObjectAssertion(S + "world", DUL + "hasPart", S + "world.box") in abox
    assert ObjectAssertion(S + "world.box", DUL + "hasPart", S + "world.box.box_flap_1_joint") in abox
    assert ExistentialAssertion(S + "world.box", USD + "hasAPI", USD + "PhysicsMassAPI") in abox
    assert ObjectAssertion(S + "world.box.box_flap_1_joint", USD + "physics:body0", S + "world.box") in abox
    assert DataAssertion(S + "world.box.quality-Mass", USD + "physics:mass",
                         AttributeValue("float", 2.79)) in abox


def test_box_scene_has_no_class_prim_facts():
    abox = translate(load_stage(FIXTURES / "box_scene.usda"), builtin_tbox())
    assert not any("_class_" in (getattr(f, "subject", None) or getattr(f, "individual")) for f in abox)
    assert ConceptAssertion(S + "world.box", BOX + "Box") in abox
    assert ConceptAssertion(S + "world.box_flap_2", BOX + "Flap") in abox
    assert len(abox) == 55


# -- IRIs -----------------------------------------------------------------------


@pytest.mark.parametrize("kind, expected", [
    (USD + "Shape", S + "world.box.quality-Shape"),
    (USD + "Mass", S + "world.box.quality-Mass"),
    (DUL + "Quality", S + "world.box.quality-Quality"),
])
def test_mint_quality(kind, expected):
    assert mint_quality(S + "world.box", kind) == expected


@given(st.lists(names, min_size=1, max_size=4), st.lists(names, min_size=1, max_size=4))
def test_path_iris_are_injective(a, b):
    pa, pb = Path(tuple(a)), Path(tuple(b))
    assert path_of_iri(iri_of_path(pa)) == pa
    assert (iri_of_path(pa) == iri_of_path(pb)) == (pa == pb)
    assert ".quality-" not in iri_of_path(pa)


def test_root_has_no_iri():
    with pytest.raises(ValueError):
        iri_of_path(Path(()))


def test_custom_base():
    assert iri_of_path(Path.parse("/a/b"), "urn:k/") == "urn:k/a.b"
    assert iri_of_path(Path.parse("/a"), "http://h/x#") == "http://h/x#a"


# -- tags and relationships ----------------------------------------------------------

DANGLING = '#usda 1.0\ndef "x" (\n    prepend apiSchemas = ["SemanticTagAPI"]\n) {\n' \
           "    rel semanticTag:semanticLabel = </nowhere>\n}\n"


def test_dangling_tag_strict():
    with pytest.raises(errors.DanglingTag) as info:
        translate(compose_stage(resolve_sublayers(parse_text(DANGLING), MemoryLoader({}))))
    assert info.value.exit_code == 7


def test_dangling_tag_lenient():
    stage = compose_stage(resolve_sublayers(parse_text(DANGLING), MemoryLoader({})))
    with pytest.warns(DanglingTagWarning):
        abox = translate(stage, strict_tags=False)
    assert not any(isinstance(f, ConceptAssertion) for f in abox)


def test_tag_to_def_prim_is_dangling():
    text = '#usda 1.0\ndef "c" {}\ndef "x" {\n    rel semanticTag:semanticLabel = </c>\n}\n'
    with pytest.raises(errors.DanglingTag):
        translate(compose_stage(resolve_sublayers(parse_text(text), MemoryLoader({}))))


def test_unknown_tag_concept_warns():
    text = '#usda 1.0\n(\n    subLayers = [@tags.usda@]\n)\ndef "x" {\n' \
           "    rel semanticTag:semanticLabel = </_tags/_Cup>\n}\n"
    with pytest.warns(UnknownTagConcept):
        abox = translate(stage_from(text), builtin_tbox())
    assert ConceptAssertion(S + "x", "http://ex.org/kitchen#Cup") in abox


def test_dangling_relation_still_emitted():
    text = '#usda 1.0\ndef "x" {\n    rel custom:link = </gone>\n}\n'
    with pytest.warns(DanglingRelationTarget):
        abox = translate(compose_stage(resolve_sublayers(parse_text(text), MemoryLoader({}))))
    assert abox == {ObjectAssertion(S + "x", USD + "custom:link", S + "gone")}
