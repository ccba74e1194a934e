"""Recursive-descent parser producing uncomposed :class:`Layer` objects.

The accepted grammar is written out in ``docs/usda-subset.md``. Anything
outside it (time samples, variant sets, references, ...) is rejected with a
message naming the unsupported construct.
"""

from __future__ import annotations

from pathlib import Path as FsPath
from typing import NoReturn, Sequence

from ..errors import (
    ArityMismatch,
    DuplicatePrimName,
    DuplicateProperty,
    MalformedPath,
    UnexpectedToken,
    UnknownDatatypeKeyword,
    UsdaSyntaxError,
)
from .lexer import TYPE_NAMES, Token, TokenKind, tokenize
from .model import (
    ARRAY_TYPES,
    DATATYPES,
    REL,
    ROOT,
    TUPLE_ARITY,
    AttributeValue,
    Layer,
    Path,
    PrimSpec,
    Property,
    Specifier,
    is_valid_name,
)

_SPECIFIERS = {"def": Specifier.DEF, "over": Specifier.OVER, "class": Specifier.CLS}
_UNSUPPORTED_ARCS = {"references", "payload", "specializes", "variantSets", "variants"}


def parse_layer(tokens: Sequence[Token], source_id: str = "<memory>") -> Layer:
    """Build a :class:`Layer` from a token sequence.

    Raises:
        UnexpectedToken: on any grammar violation.
        DuplicatePrimName: when two sibling specs share a name.
        UnknownDatatypeKeyword: on attribute types outside the supported set.
    """
    return _Parser(tokens, source_id).layer()


def parse_text(text: str, source_id: str = "<memory>") -> Layer:
    """Tokenize and parse usda text.

    When both the lexer and the parser would object, the error on the earlier
    line is reported, so an unsupported construct is named even if its body
    contains characters outside the subset.
    """
    try:
        tokens = tokenize(text, source_id)
    except UsdaSyntaxError as lex_error:
        prefix = "\n".join(text.split("\n")[:lex_error.line - 1])
        try:
            parse_layer(tokenize(prefix, source_id), source_id)
        except UsdaSyntaxError as parse_error:
            # running out of input is an artefact of the truncation
            truncated = getattr(parse_error, "at_end", False)
            if parse_error.line < lex_error.line and not truncated:
                raise parse_error from None
        raise
    return parse_layer(tokens, source_id)


def parse_file(path: str | FsPath) -> Layer:
    path = FsPath(path)
    return parse_text(path.read_text(encoding="utf-8"), str(path))


def parse_value(tokens: Sequence[Token], datatype: str, source_id: str = "<string>") -> AttributeValue:
    """Parse a complete token sequence as one value of ``datatype``."""
    if datatype not in DATATYPES:
        raise UnknownDatatypeKeyword(datatype, source=source_id)
    parser = _Parser(tokens, source_id)
    value = parser.value(datatype)
    if not parser.at_end():
        parser.fail("end of value")
    return value


def parse_value_text(text: str, datatype: str) -> AttributeValue:
    return parse_value(tokenize(text), datatype)


class _Parser:
    def __init__(self, tokens: Sequence[Token], source: str) -> None:
        self.tokens = list(tokens)
        self.pos = 0
        self.source = source

    # -- token helpers ------------------------------------------------------

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def _where(self, tok: Token | None) -> tuple[int, int]:
        if tok is not None:
            return tok.line, tok.column
        if self.tokens:
            last = self.tokens[-1]
            return last.line, last.column + len(last.value)
        return 1, 1

    def fail(self, expected: str, tok: Token | None = None, message: str | None = None) -> NoReturn:
        tok = tok if tok is not None else self.peek()
        line, col = self._where(tok)
        found = "end of input" if tok is None else repr(tok)
        err = UnexpectedToken(message or f"expected {expected}, found {found}", line, col,
                              self.source, expected=expected)
        err.at_end = tok is None
        raise err

    def check(self, kind: TokenKind, value: str | None = None) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind is kind and (value is None or tok.value == value)

    def expect(self, kind: TokenKind, value: str | None = None, what: str | None = None) -> Token:
        if not self.check(kind, value):
            self.fail(what or (repr(value) if value else kind.value))
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def accept(self, kind: TokenKind, value: str | None = None) -> Token | None:
        if self.check(kind, value):
            tok = self.tokens[self.pos]
            self.pos += 1
            return tok
        return None

    # -- layer --------------------------------------------------------------

    def layer(self) -> Layer:
        layer = Layer(source_id=self.source)
        if self.check(TokenKind.LPAREN):
            layer.sublayer_refs = self.layer_metadata()
        seen: set[str] = set()
        while not self.at_end():
            prim = self.prim(ROOT, seen)
            layer.root_prims.append(prim)
        return layer

    def layer_metadata(self) -> list[str]:
        self.expect(TokenKind.LPAREN)
        refs: list[str] = []
        while not self.accept(TokenKind.RPAREN):
            tok = self.peek()
            if tok is None:
                self.fail("')'")
            if tok.kind is TokenKind.IDENT and tok.value == "subLayers":
                self.pos += 1
                self.expect(TokenKind.EQ)
                for ref_tok in self.bracket_list(lambda: self.expect_one(
                        (TokenKind.ASSET, TokenKind.STRING), "asset path")):
                    if ref_tok.value in refs:
                        self.fail("distinct sublayer", ref_tok,
                                  f"sublayer {ref_tok.value!r} is listed twice")
                    refs.append(ref_tok.value)
            elif tok.kind in (TokenKind.IDENT, TokenKind.STRING):
                self.fail("subLayers", tok, f"unsupported layer metadata {tok.value!r} "
                          "(only subLayers is accepted)")
            else:
                self.fail("layer metadata or ')'", tok)
        return refs

    def expect_one(self, kinds: tuple[TokenKind, ...], what: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind not in kinds:
            self.fail(what)
        self.pos += 1
        return tok

    def bracket_list(self, item):
        """Parse ``[item, item, ...]`` allowing a trailing comma."""
        self.expect(TokenKind.LBRACKET)
        items = []
        while not self.accept(TokenKind.RBRACKET):
            items.append(item())
            if not self.accept(TokenKind.COMMA):
                self.expect(TokenKind.RBRACKET, what="',' or ']'")
                break
        return items

    # -- prims --------------------------------------------------------------

    def prim(self, parent: Path, seen_names: set[str]) -> PrimSpec:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.KW or tok.value not in _SPECIFIERS:
            if tok is not None and tok.kind is TokenKind.IDENT and tok.value == "variantSet":
                self.fail("prim", tok, "variant sets are not supported")
            self.fail("'def', 'over' or 'class'")
        self.pos += 1
        specifier = _SPECIFIERS[tok.value]
        type_name = None
        if self.check(TokenKind.IDENT):
            type_name = self.tokens[self.pos].value
            self.pos += 1
        name_tok = self.expect(TokenKind.STRING, what="prim name string")
        if not is_valid_name(name_tok.value):
            raise MalformedPath(str(parent).rstrip("/") + "/" + name_tok.value,
                                name_tok.line, name_tok.column, self.source)
        path = parent.child(name_tok.value)
        if name_tok.value in seen_names:
            raise DuplicatePrimName(str(path), name_tok.line, name_tok.column, self.source)
        seen_names.add(name_tok.value)
        spec = PrimSpec(specifier, type_name, path)
        if self.check(TokenKind.LPAREN):
            self.prim_metadata(spec)
        self.expect(TokenKind.LBRACE, what="'{'")
        child_names: set[str] = set()
        prop_names: set[str] = set()
        while not self.accept(TokenKind.RBRACE):
            tok = self.peek()
            if tok is None:
                self.fail("'}'")
            if tok.kind is TokenKind.KW and tok.value in _SPECIFIERS:
                spec.children.append(self.prim(path, child_names))
            else:
                name_tok, prop = self.property()
                if prop.name in prop_names:
                    raise DuplicateProperty(str(path), prop.name, name_tok.line,
                                            name_tok.column, self.source)
                prop_names.add(prop.name)
                spec.properties.append(prop)
        return spec

    def prim_metadata(self, spec: PrimSpec) -> None:
        self.expect(TokenKind.LPAREN)
        while not self.accept(TokenKind.RPAREN):
            tok = self.peek()
            if tok is None:
                self.fail("')'")
            self.accept(TokenKind.KW, "prepend")
            key = self.peek()
            if key is None or key.kind is not TokenKind.IDENT:
                self.fail("metadata key", key)
            if key.value == "apiSchemas":
                self.pos += 1
                self.expect(TokenKind.EQ)
                for t in self.bracket_list(lambda: self.expect(TokenKind.STRING, what="schema name")):
                    if t.value not in spec.api_schemas:
                        spec.api_schemas.append(t.value)
            elif key.value == "inherits":
                self.pos += 1
                self.expect(TokenKind.EQ)
                for target in self.path_or_list():
                    if target not in spec.inherits:
                        spec.inherits.append(target)
            elif key.value in _UNSUPPORTED_ARCS:
                self.fail("apiSchemas or inherits", key,
                          f"composition arc {key.value!r} is not supported "
                          "(only sublayers and inherits)")
            else:
                self.fail("apiSchemas or inherits", key,
                          f"unsupported prim metadata {key.value!r}")

    def property(self) -> tuple[Token, Property]:
        self.accept(TokenKind.KW, "uniform")
        tok = self.peek()
        if tok is None:
            self.fail("property")
        if tok.kind is TokenKind.KW and tok.value == "rel":
            self.pos += 1
            name_tok = self.property_name()
            self.expect(TokenKind.EQ, what="'=' (relationships need targets)")
            return name_tok, Property(name_tok.value, self.value(REL))
        if tok.kind is TokenKind.KW and tok.value in DATATYPES:
            self.pos += 1
            name_tok = self.property_name()
            self.expect(TokenKind.EQ, what="'=' (attributes need a default value)")
            return name_tok, Property(name_tok.value, self.value(tok.value))
        if tok.kind is TokenKind.KW and tok.value in TYPE_NAMES | {n + "[]" for n in TYPE_NAMES}:
            raise UnknownDatatypeKeyword(tok.value, tok.line, tok.column, self.source)
        if tok.kind is TokenKind.IDENT and tok.value == "variantSet":
            self.fail("property declaration or prim", tok, "variant sets are not supported")
        if tok.kind is TokenKind.IDENT:
            nxt = self.peek(1)
            if nxt is not None and nxt.kind in (TokenKind.IDENT, TokenKind.NSIDENT, TokenKind.LBRACKET):
                name = tok.value + ("[]" if nxt.kind is TokenKind.LBRACKET else "")
                raise UnknownDatatypeKeyword(name, tok.line, tok.column, self.source)
        self.fail("property declaration or prim", tok)

    def property_name(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind not in (TokenKind.IDENT, TokenKind.NSIDENT):
            self.fail("property name")
        self.pos += 1
        if "." in tok.value:
            suffix = tok.value.rsplit(".", 1)[1]
            if suffix == "timeSamples":
                msg = "time-sampled attribute values are not supported"
            elif suffix == "connect":
                msg = "attribute connections are not supported"
            else:
                msg = f"invalid property name {tok.value!r}"
            self.fail("property name", tok, msg)
        return tok

    # -- values -------------------------------------------------------------

    def number(self) -> float:
        tok = self.expect(TokenKind.NUM, what="number")
        return float(tok.value)

    def tuple_of(self, arity: int, what: str) -> tuple[float, ...]:
        start = self.expect(TokenKind.LPAREN, what=f"'(' starting {what}")
        items: list[float] = []
        while not self.accept(TokenKind.RPAREN):
            items.append(self.number())
            if not self.accept(TokenKind.COMMA):
                self.expect(TokenKind.RPAREN, what="',' or ')'")
                break
        if len(items) != arity:
            raise ArityMismatch(arity, len(items), start.line, start.column, self.source, what)
        return tuple(items)

    def path_token(self) -> Path:
        tok = self.expect(TokenKind.PATH, what="path")
        try:
            path = Path.parse(tok.value)
        except MalformedPath:
            raise MalformedPath(tok.value, tok.line, tok.column, self.source) from None
        if path.is_root:
            raise MalformedPath(tok.value, tok.line, tok.column, self.source)
        return path

    def path_or_list(self) -> list[Path]:
        if self.check(TokenKind.LBRACKET):
            return self.bracket_list(self.path_token)
        return [self.path_token()]

    def value(self, datatype: str) -> AttributeValue:
        if datatype in ("token", "string"):
            return AttributeValue(datatype, self.expect(TokenKind.STRING, what="string").value)
        if datatype in ("float", "double"):
            return AttributeValue(datatype, self.number())
        if datatype == "bool":
            tok = self.peek()
            if tok is not None and tok.kind is TokenKind.IDENT and tok.value in ("true", "false"):
                self.pos += 1
                return AttributeValue("bool", tok.value == "true")
            if tok is not None and tok.kind is TokenKind.NUM and tok.value in ("0", "1"):
                self.pos += 1
                return AttributeValue("bool", tok.value == "1")
            self.fail("true or false")
        if datatype == "matrix4d":
            start = self.expect(TokenKind.LPAREN, what="'(' starting matrix4d")
            rows: list[tuple[float, ...]] = []
            while not self.accept(TokenKind.RPAREN):
                rows.append(self.tuple_of(4, "matrix4d row"))
                if not self.accept(TokenKind.COMMA):
                    self.expect(TokenKind.RPAREN, what="',' or ')'")
                    break
            if len(rows) != 4:
                raise ArityMismatch(16, 4 * len(rows), start.line, start.column, self.source,
                                    "matrix4d")
            return AttributeValue("matrix4d", tuple(x for row in rows for x in row))
        if datatype in TUPLE_ARITY:
            return AttributeValue(datatype, self.tuple_of(TUPLE_ARITY[datatype], datatype))
        if datatype in ARRAY_TYPES:
            elem = ARRAY_TYPES[datatype]
            if elem == "token":
                items = self.bracket_list(lambda: self.expect(TokenKind.STRING, what="string").value)
            elif elem == "float":
                items = self.bracket_list(self.number)
            else:
                items = self.bracket_list(lambda: self.tuple_of(3, "color3f"))
            return AttributeValue(datatype, tuple(items))
        if datatype == REL:
            return AttributeValue(REL, tuple(self.path_or_list()))
        raise UnknownDatatypeKeyword(datatype, source=self.source)
