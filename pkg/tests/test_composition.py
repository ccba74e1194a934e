import warnings
from dataclasses import replace
from pathlib import Path as FsPath

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import layers
from usdkg import errors
from usdkg.composition import (
    CompositionWarning,
    LayerStack,
    MemoryLoader,
    compose_stage,
    load_stage,
    resolve_path,
    resolve_sublayers,
)
from usdkg.usda import Layer, Path, PrimSpec, Specifier, parse_text
from usdkg.usda.model import AttributeValue

BOX_BASIC = FsPath(__file__).parent / "fixtures" / "usda" / "box_basic.usda"


def stage_of(*texts: str):
    names = [f"l{i}.usda" for i in range(len(texts))]
    root = parse_text(texts[0], names[0])
    root = replace(root, sublayer_refs=names[1:])
    loader = MemoryLoader(dict(zip(names[1:], texts[1:])))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CompositionWarning)
        return compose_stage(resolve_sublayers(root, loader))


def value(stage, path, name):
    prop = resolve_path(stage, path).get(name)
    return None if prop is None else prop.value.payload


# -- sublayers ------------------------------------------------------------------


def test_root_without_sublayers_is_whole_stack():
    root = parse_text('#usda 1.0\ndef "a" {}\n', "root.usda")
    stack = resolve_sublayers(root, MemoryLoader({}))
    assert stack.identifiers == ["root.usda"]


def test_sublayer_cycle():
    loader = MemoryLoader({
        "a.usda": "#usda 1.0\n(\n    subLayers = [@b.usda@]\n)\n",
        "b.usda": "#usda 1.0\n(\n    subLayers = [@a.usda@]\n)\n",
    })
    with pytest.raises(errors.SublayerCycle) as info:
        resolve_sublayers(loader("a.usda"), loader)
    assert info.value.chain == ["a.usda", "b.usda", "a.usda"]


def test_missing_sublayer():
    root = parse_text("#usda 1.0\n(\n    subLayers = [@gone.usda@]\n)\n", "root.usda")
    with pytest.raises(errors.SublayerNotFound):
        resolve_sublayers(root, MemoryLoader({}))


def test_relative_sublayer_resolution():
    loader = MemoryLoader({
        "dir/a.usda": "#usda 1.0\n(\n    subLayers = [@./sub/b.usda@]\n)\n",
        "dir/sub/b.usda": '#usda 1.0\ndef "x" {}\n',
    })
    stack = resolve_sublayers(loader("dir/a.usda"), loader)
    assert stack.identifiers == ["dir/a.usda", "dir/sub/b.usda"]


# -- composition ---------------------------------------------------------------


def test_strongest_opinion_wins():
    stage = stage_of(
        '#usda 1.0\ndef Xform "b" {\n    float physics:mass = 2.79\n}\n',
        '#usda 1.0\nover "b" {\n    float physics:mass = 1.0\n    float3 color = (1, 0, 0)\n}\n',
    )
    assert value(stage, "/b", "physics:mass") == 2.79
    assert value(stage, "/b", "color") == (1.0, 0.0, 0.0)


def test_over_alone_is_dropped_with_warning():
    with pytest.warns(CompositionWarning):
        stage = compose_stage(LayerStack([parse_text('#usda 1.0\nover "ghost" {}\n')]))
    assert len(stage) == 0


def test_def_in_weaker_layer_makes_concrete():
    stage = stage_of('#usda 1.0\nover "b" {}\n', '#usda 1.0\ndef "b" {}\n')
    assert resolve_path(stage, "/b").is_concrete


def test_conflicting_typed_schema():
    with pytest.raises(errors.ConflictingTypedSchema):
        stage_of('#usda 1.0\ndef Xform "b" {}\n', '#usda 1.0\ndef Cube "b" {}\n')


def test_box_basic_has_seven_prims():
    stage = load_stage(BOX_BASIC)
    assert [str(p) for p in stage] == [
        "/world", "/world/box", "/world/box/box_flap_1_joint", "/world/box/box_flap_2_joint",
        "/world/box/geom_1", "/world/box_flap_1", "/world/box_flap_2",
    ]
    assert value(stage, "/world/box", "physics:mass") == 2.79


def test_resolve_path_boundaries():
    stage = load_stage(BOX_BASIC)
    with pytest.raises(errors.PrimNotFound):
        resolve_path(stage, "/")
    with pytest.raises(errors.PrimNotFound):
        resolve_path(stage, "/nope")


# -- inherits ------------------------------------------------------------------


def test_inherited_property():
    stage = stage_of('#usda 1.0\nclass "c" {\n    float mass = 5.0\n}\ndef "d" (\n    inherits = </c>\n) {}\n')
    assert value(stage, "/d", "mass") == 5.0
    assert not resolve_path(stage, "/c").is_concrete


def test_local_beats_inherited():
    stage = stage_of('#usda 1.0\nclass "c" {\n    float mass = 5.0\n}\n'
                     'def "d" (\n    inherits = </c>\n) {\n    float mass = 2.0\n}\n')
    assert value(stage, "/d", "mass") == 2.0


def test_transitive_inherits_and_api_union():
    stage = stage_of(
        '#usda 1.0\n'
        'class "c2" (\n    prepend apiSchemas = ["PhysicsMassAPI"]\n) {\n    token color = "red"\n}\n'
        'class "c1" (\n    inherits = </c2>\n) {}\n'
        'def "d" (\n    inherits = </c1>\n) {}\n'
    )
    assert value(stage, "/d", "color") == "red"
    assert resolve_path(stage, "/d").api_schemas == ("PhysicsMassAPI",)


def test_earlier_inherits_target_is_stronger():
    stage = stage_of('#usda 1.0\nclass "a" {\n    float m = 1\n}\nclass "b" {\n    float m = 2\n}\n'
                     'def "d" (\n    inherits = [</a>, </b>]\n) {}\n')
    assert value(stage, "/d", "m") == 1.0


@pytest.mark.parametrize("text, error", [
    ('def "d" (\n    inherits = </missing>\n) {}\n', errors.InheritTargetNotFound),
    ('def "x" {}\ndef "d" (\n    inherits = </x>\n) {}\n', errors.InheritTargetNotClass),
    ('class "a" (\n    inherits = </b>\n) {}\nclass "b" (\n    inherits = </a>\n) {}\n', errors.InheritCycle),
])
def test_inherits_errors(text, error):
    with pytest.raises(error):
        stage_of("#usda 1.0\n" + text)


# -- properties ------------------------------------------------------------------


def _plain(spec: PrimSpec) -> PrimSpec:
    # no inherits arcs and no typed schema, so every random stack composes
    return PrimSpec(spec.specifier, None, spec.path, [_plain(c) for c in spec.children],
                    spec.api_schemas, [], spec.properties)


stacks = st.lists(layers(), min_size=1, max_size=3).map(
    lambda ls: [Layer(f"l{i}.usda", [], [_plain(p) for p in layer.root_prims]) for i, layer in enumerate(ls)])


def compose_quietly(stack: list[Layer]):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CompositionWarning)
        return compose_stage(LayerStack(list(stack)))


def expected_paths(stack: list[Layer]) -> set[Path]:
    """Paths with a def or class opinion whose ancestors all survive too."""
    kinds: dict[Path, set[Specifier]] = {}
    for layer in stack:
        for spec in layer.walk():
            kinds.setdefault(spec.path, set()).add(spec.specifier)
    alive = {p for p, k in kinds.items() if k & {Specifier.DEF, Specifier.CLS}}
    return {p for p in alive
            if all(Path(p.segments[:i]) in alive for i in range(1, len(p.segments)))}


def strongest(stack: list[Layer], path: Path, name: str) -> AttributeValue | None:
    for layer in stack:
        for spec in layer.walk():
            if spec.path == path:
                for prop in spec.properties:
                    if prop.name == name:
                        return prop.value
    return None


@settings(max_examples=80, deadline=None)
@given(stacks)
def test_strongest_opinion_oracle(stack):
    stage = compose_quietly(stack)
    for path, prim in stage.items():
        for prop in prim.properties:
            assert prop.value == strongest(stack, path, prop.name)


@settings(max_examples=80, deadline=None)
@given(stacks, layers())
def test_weaker_layer_never_overrides(stack, extra):
    weaker = Layer("extra.usda", [], [_plain(p) for p in extra.root_prims])
    before = compose_quietly(stack)
    after = compose_quietly(stack + [weaker])
    for path, prim in before.items():
        for prop in prim.properties:
            assert after[path].get(prop.name) == prop


@settings(max_examples=50, deadline=None)
@given(stacks)
def test_composition_is_deterministic(stack):
    assert compose_quietly(stack) == compose_quietly(stack)


@settings(max_examples=80, deadline=None)
@given(stacks)
def test_prim_count_and_children(stack):
    stage = compose_quietly(stack)
    assert set(stage) == expected_paths(stack)
    for path, prim in stage.items():
        assert set(prim.child_paths) == {q for q in stage if len(q.segments) > 1 and q.parent == path}
