"""Turn usda scene descriptions into a queryable, reasoned knowledge graph."""

from .composition import Stage, compose_stage, load_stage, resolve_sublayers
from .facts import ConceptAssertion, DataAssertion, ExistentialAssertion, ObjectAssertion, OpaqueLiteral
from .kgstore import Graph, JointUpdate, apply_joint_update, load, serialize, stats
from .reasoner import (
    InferenceReport,
    check_consistency,
    classify_box_states,
    materialize,
    query_connected,
    query_instances,
    saturate,
)
from .schemas import SchemaRegistry, builtin_registry
from .tbox import TBox, builtin_tbox, generate_tagging_sublayer, load_tbox
from .translator import iri_of_path, mint_quality, path_of_iri, translate

__version__ = "0.1.0"

__all__ = [
    "ConceptAssertion", "DataAssertion", "ExistentialAssertion", "Graph", "InferenceReport",
    "JointUpdate", "ObjectAssertion", "OpaqueLiteral", "SchemaRegistry", "Stage", "TBox",
    "apply_joint_update", "builtin_registry", "builtin_tbox", "check_consistency",
    "classify_box_states", "compose_stage", "generate_tagging_sublayer", "iri_of_path", "load",
    "load_stage", "load_tbox", "materialize", "mint_quality", "path_of_iri", "query_connected",
    "query_instances", "resolve_sublayers", "saturate", "serialize", "stats", "translate",
]
