"""Exception hierarchy.

Each error family carries the process exit code the CLI maps it to, so the
command front end never needs a lookup table of its own.
"""

from __future__ import annotations


class UsdKgError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


# -- usda text ---------------------------------------------------------------


class UsdaSyntaxError(UsdKgError):
    """A lexical or grammatical defect in usda text.

    Attributes:
        line: 1-based line of the defect (0 when unknown).
        column: 1-based column of the defect (0 when unknown).
    """

    exit_code = 4

    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = "<string>"):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{source}:{line}:{column}: {message}")


class UnterminatedString(UsdaSyntaxError):
    pass


class InvalidCharacter(UsdaSyntaxError):
    pass


class UnexpectedToken(UsdaSyntaxError):
    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = "<string>",
                 expected: str = ""):
        self.expected = expected
        super().__init__(message, line, column, source)


class UnknownDatatypeKeyword(UsdaSyntaxError):
    def __init__(self, name: str, line: int = 0, column: int = 0, source: str = "<string>"):
        self.name = name
        super().__init__(f"unknown or unsupported attribute type {name!r}", line, column, source)


class ArityMismatch(UsdaSyntaxError):
    def __init__(self, expected: int, got: int, line: int = 0, column: int = 0,
                 source: str = "<string>", what: str = "tuple"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} needs {expected} components, got {got}", line, column, source)


class MalformedPath(UsdaSyntaxError):
    def __init__(self, text: str, line: int = 0, column: int = 0, source: str = "<string>"):
        self.text = text
        super().__init__(f"malformed prim path {text!r}", line, column, source)


class DuplicatePrimName(UsdaSyntaxError):
    def __init__(self, path: str, line: int = 0, column: int = 0, source: str = "<string>"):
        self.path = path
        super().__init__(f"prim {path} is declared twice in one layer", line, column, source)


class DuplicateProperty(UsdaSyntaxError):
    def __init__(self, path: str, name: str, line: int = 0, column: int = 0,
                 source: str = "<string>"):
        self.path = path
        self.name = name
        super().__init__(f"property {name!r} is declared twice on {path}", line, column, source)


# -- composition -------------------------------------------------------------


class CompositionError(UsdKgError):
    exit_code = 5


class SublayerNotFound(CompositionError):
    def __init__(self, identifier: str):
        self.identifier = identifier
        super().__init__(f"sublayer not found: {identifier}")


class SublayerCycle(CompositionError):
    def __init__(self, chain: list[str]):
        self.chain = list(chain)
        super().__init__("sublayer cycle: " + " -> ".join(self.chain))


class ConflictingTypedSchema(CompositionError):
    def __init__(self, path: str, schemas: tuple[str, str]):
        self.path = path
        self.schemas = schemas
        super().__init__(f"{path}: layers disagree on the typed schema ({schemas[0]} vs {schemas[1]})")


class InheritTargetNotFound(CompositionError):
    def __init__(self, path: str, target: str):
        self.path = path
        self.target = target
        super().__init__(f"{path}: inherits target {target} does not exist")


class InheritTargetNotClass(CompositionError):
    def __init__(self, path: str, target: str):
        self.path = path
        self.target = target
        super().__init__(f"{path}: inherits target {target} is not a class prim")


class InheritCycle(CompositionError):
    def __init__(self, chain: list[str]):
        self.chain = list(chain)
        super().__init__("inherits cycle: " + " -> ".join(self.chain))


class PrimNotFound(CompositionError, KeyError):
    def __init__(self, path: str):
        self.path = path
        Exception.__init__(self, f"no prim at {path}")

    def __str__(self) -> str:
        return f"no prim at {self.path}"


# -- schemas -----------------------------------------------------------------


class SchemaError(UsdKgError):
    exit_code = 6


class DuplicateSchema(SchemaError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"schema {name!r} is already registered")


class UnknownParent(SchemaError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown parent schema {name!r}")


class SchemaFileError(SchemaError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


# -- translation -------------------------------------------------------------


class TranslationError(UsdKgError):
    exit_code = 7


class DanglingTag(TranslationError):
    def __init__(self, prim: str, target: str, reason: str):
        self.prim = prim
        self.target = target
        super().__init__(f"{prim}: semantic tag {target} {reason}")


# -- reasoning ---------------------------------------------------------------


class ReasoningError(UsdKgError):
    exit_code = 8


class CapExceeded(ReasoningError):
    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"materialization did not reach a fixpoint within {cap} iterations")


class UnknownConcept(ReasoningError):
    def __init__(self, iri: str):
        self.iri = iri
        super().__init__(f"unknown concept {iri}")


# -- knowledge graph files ---------------------------------------------------


class KGFormatError(UsdKgError):
    exit_code = 9


class KGParseError(KGFormatError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class UnknownPrefix(KGFormatError):
    def __init__(self, prefix: str, line: int):
        self.prefix = prefix
        self.line = line
        super().__init__(f"line {line}: undeclared prefix {prefix!r}")


# -- terminology -------------------------------------------------------------


class TBoxError(UsdKgError):
    exit_code = 10


class TerminologyParseError(TBoxError):
    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}: {message}")


class RedefinitionOfBuiltin(TBoxError):
    def __init__(self, iri: str):
        self.iri = iri
        super().__init__(f"cannot redefine built-in term {iri}")


class EmptyNamespace(TBoxError):
    def __init__(self, concept: str):
        self.concept = concept
        super().__init__(f"concept {concept} has no namespace")


# -- joint updates -----------------------------------------------------------


class UpdateError(UsdKgError):
    exit_code = 11


class UnknownJoint(UpdateError):
    def __init__(self, path: str):
        self.path = path
        super().__init__(f"no joint individual for {path}")


class StaleTimestamp(UpdateError):
    def __init__(self, joint: str, ts: int, last: int):
        self.joint = joint
        self.ts = ts
        self.last = last
        super().__init__(f"{joint}: timestamp {ts} is not after {last}")


class MalformedUpdate(UpdateError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"update line {line}: {message}")
