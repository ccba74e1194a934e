"""Parsing and printing of the textual usda subset."""

from .lexer import Token, TokenKind, tokenize
from .model import (
    DATATYPES,
    REL,
    ROOT,
    AttributeValue,
    Layer,
    Path,
    PrimSpec,
    Property,
    PropertyKind,
    Specifier,
)
from .parser import parse_file, parse_layer, parse_text, parse_value, parse_value_text
from .writer import format_layer, format_property

__all__ = [
    "DATATYPES",
    "REL",
    "ROOT",
    "AttributeValue",
    "Layer",
    "Path",
    "PrimSpec",
    "Property",
    "PropertyKind",
    "Specifier",
    "Token",
    "TokenKind",
    "format_layer",
    "format_property",
    "parse_file",
    "parse_layer",
    "parse_text",
    "parse_value",
    "parse_value_text",
    "tokenize",
]
