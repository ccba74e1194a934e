"""ABox assertions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .namespaces import USDT
from .usda.model import AttributeValue


@dataclass(frozen=True)
class OpaqueLiteral:
    """A literal whose datatype this toolkit does not interpret; kept verbatim."""

    lexical: str
    datatype: str

    def text(self) -> str:
        return self.lexical


Literal = Union[AttributeValue, OpaqueLiteral]


def literal_datatype_iri(literal: Literal) -> str:
    if isinstance(literal, OpaqueLiteral):
        return literal.datatype
    return USDT + literal.datatype


@dataclass(frozen=True)
class ConceptAssertion:
    individual: str
    concept: str

    def sort_key(self) -> tuple:
        return (self.individual, "0", self.concept, "")


@dataclass(frozen=True)
class ExistentialAssertion:
    """``(∃ property . filler)(individual)``."""

    individual: str
    property: str
    filler: str

    def sort_key(self) -> tuple:
        return (self.individual, "1" + self.property, self.filler, "")


@dataclass(frozen=True)
class ObjectAssertion:
    subject: str
    property: str
    object: str

    def sort_key(self) -> tuple:
        return (self.subject, "2" + self.property, self.object, "")


@dataclass(frozen=True)
class DataAssertion:
    subject: str
    property: str
    literal: Literal

    def sort_key(self) -> tuple:
        return (self.subject, "3" + self.property, self.literal.text(),
                literal_datatype_iri(self.literal))


Fact = Union[ConceptAssertion, ExistentialAssertion, ObjectAssertion, DataAssertion]
FACT_TYPES = (ConceptAssertion, ExistentialAssertion, ObjectAssertion, DataAssertion)


def subject_of(fact: Fact) -> str:
    return fact.individual if isinstance(fact, (ConceptAssertion, ExistentialAssertion)) else fact.subject


def variant_name(fact: Fact) -> str:
    return type(fact).__name__
