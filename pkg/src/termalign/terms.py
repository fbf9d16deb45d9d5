"""Term trees for the ``tt`` exchange format.

A term is one of three constructors: an identifier leaf (``Id``), a binary
application (``Comb``), or a typed abstraction (``Abs``).  Library statements
arrive as ``tt(Name, Kind, Term).`` clauses; this module parses those clauses,
serializes terms to a canonical single-line s-expression form, and provides
the constant analysis used by the alignment machinery.

Identifiers that were single-quoted in the clause source are constants, bare
identifiers are variables.  Since the s-expression form does not preserve
quoting, each parsed item carries its quoted-name set, and the analysis
functions accept an optional known-constant set; without one, every free
identifier is treated as a constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Union

__all__ = [
    "Id",
    "Comb",
    "Abs",
    "TtTerm",
    "Kind",
    "TtItem",
    "TtSyntaxError",
    "INFIX_PRECEDENCE",
    "DEFAULT_BINDERS",
    "DEFAULT_LOGICAL_CONSTANTS",
    "parse_tt_file",
    "parse_sexp",
    "to_sexp",
    "constants_of",
]


@dataclass(frozen=True)
class Id:
    name: str


@dataclass(frozen=True)
class Comb:
    fun: "TtTerm"
    arg: "TtTerm"


@dataclass(frozen=True)
class Abs:
    var: str
    var_type: "TtTerm"
    body: "TtTerm"


TtTerm = Union[Id, Comb, Abs]


class Kind(str, Enum):
    TY = "ty"
    AX = "ax"


@dataclass(frozen=True)
class TtItem:
    """A named library statement: a type declaration (ty) or an axiom/theorem (ax).

    ``constants`` records the names that were single-quoted in the source plus
    the operator symbols that occurred, i.e. everything classified constant.
    """

    name: str
    kind: Kind
    term: TtTerm
    library_id: int
    constants: frozenset = field(default_factory=frozenset)


class TtSyntaxError(ValueError):
    """Malformed tt or s-expression input, with source position when known."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


# Infix precedence, weakest binding first; application binds tighter than any
# infix and binders bind weakest of all.  All infix operators associate to the
# right and encode as Comb(Id(op), Comb(lhs, rhs)).
INFIX_PRECEDENCE: Mapping[str, int] = {
    "<=>": 1,
    "==>": 2,
    "\\/": 3,
    "/\\": 4,
    "=": 5,
    ">": 6,
    ":": 7,
}

DEFAULT_BINDERS = frozenset({"!", "?"})

# Connectives, quantifiers and the typing operator: tokens kept concrete during
# patternification and shared across libraries during corpus generation.
DEFAULT_LOGICAL_CONSTANTS = frozenset(INFIX_PRECEDENCE) | DEFAULT_BINDERS

_IDENT_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_/"
)

_PUNCT = ("(", ")", "[", "]", ",", ".")


@dataclass(frozen=True)
class _Token:
    kind: str  # "quoted" | "ident" | "sym" | "eof"
    text: str
    line: int
    column: int


def _tokenize_tt(text: str, symbols: list) -> list:
    """Split clause text into tokens, tracking line/column for diagnostics."""
    symbols = sorted(set(symbols) | set(_PUNCT), key=len, reverse=True)
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if c in "%#":  # comment to end of line
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if c == "'":
            start_line, start_col = line, col
            advance(1)
            out = []
            while True:
                if i >= n:
                    raise TtSyntaxError("unterminated quoted atom", start_line, start_col)
                c = text[i]
                if c == "\\":
                    if i + 1 >= n:
                        raise TtSyntaxError("dangling escape in quoted atom", line, col)
                    esc = text[i + 1]
                    if esc not in ("'", "\\"):
                        raise TtSyntaxError(f"unknown escape \\{esc} in quoted atom", line, col)
                    out.append(esc)
                    advance(2)
                elif c == "'":
                    advance(1)
                    break
                else:
                    out.append(c)
                    advance(1)
            tokens.append(_Token("quoted", "".join(out), start_line, start_col))
            continue
        # symbols first: "/\" must win over "/" as an identifier character
        matched = None
        for sym in symbols:
            if text.startswith(sym, i):
                matched = sym
                break
        if matched is not None:
            tokens.append(_Token("sym", matched, line, col))
            advance(len(matched))
            continue
        if c in _IDENT_CHARS:
            start_line, start_col = line, col
            j = i
            while j < n and text[j] in _IDENT_CHARS:
                j += 1
            tokens.append(_Token("ident", text[i:j], start_line, start_col))
            advance(j - i)
            continue
        raise TtSyntaxError(f"unexpected character {c!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _TtParser:
    """Recursive-descent parser over a token list, one instance per file."""

    def __init__(self, tokens, operators, binders):
        self.tokens = tokens
        self.pos = 0
        self.operators = operators
        self.binders = binders
        self.constants = set()  # quoted atoms and operator symbols of the current clause

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise TtSyntaxError(message, tok.line, tok.column)

    def expect(self, kind, text=None, what=None):
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            self.fail(f"expected {what or text or kind}, found {tok.text or tok.kind!r}", tok)
        return tok

    def parse_items(self, library_id):
        items = []
        while self.peek().kind != "eof":
            items.append(self.parse_clause(library_id))
        return items

    def parse_clause(self, library_id):
        self.constants = set()
        head = self.next()
        if head.kind != "ident" or head.text != "tt":
            self.fail("expected a tt(...) clause", head)
        self.expect("sym", "(")
        name_tok = self.next()
        if name_tok.kind != "quoted":
            self.fail("clause name must be a single-quoted atom", name_tok)
        name = name_tok.text
        self.constants.add(name)
        self.expect("sym", ",")
        kind_tok = self.next()
        if kind_tok.kind != "ident" or kind_tok.text not in ("ty", "ax"):
            self.fail("clause kind must be ty or ax", kind_tok)
        kind = Kind(kind_tok.text)
        self.expect("sym", ",")
        term = self.parse_term(0)
        self.expect("sym", ")")
        self.expect("sym", ".", what="clause terminator ').'")
        if kind is Kind.TY:
            # ty clauses carry only the type; wrap the declared constant with
            # the typing operator so the constant itself appears in the tree.
            term = Comb(Id(":"), Comb(Id(name), term))
            self.constants.add(":")
        return TtItem(name, kind, term, library_id, frozenset(self.constants))

    def _at_infix(self):
        tok = self.peek()
        if tok.kind in ("sym", "ident") and tok.text in self.operators:
            return tok.text
        return None

    def parse_term(self, min_prec):
        left = self.parse_application()
        while True:
            op = self._at_infix()
            if op is None or self.operators[op] < min_prec:
                return left
            self.next()
            self.constants.add(op)
            right = self.parse_term(self.operators[op])  # right-associative
            left = Comb(Id(op), Comb(left, right))

    def _starts_atom(self):
        tok = self.peek()
        if tok.kind in ("quoted",):
            return True
        if tok.kind == "ident":
            return tok.text not in self.operators
        if tok.kind == "sym":
            return tok.text == "(" or tok.text in self.binders
        return False

    def parse_application(self):
        term = self.parse_atom()
        while self._starts_atom():
            term = Comb(term, self.parse_atom())
        return term

    def parse_atom(self):
        tok = self.next()
        if tok.kind == "quoted":
            self.constants.add(tok.text)
            return Id(tok.text)
        if tok.kind == "ident":
            if tok.text in self.operators:
                self.fail(f"operator {tok.text!r} used as an atom", tok)
            return Id(tok.text)
        if tok.kind == "sym" and tok.text == "(":
            term = self.parse_term(0)
            self.expect("sym", ")")
            return term
        if tok.kind == "sym" and tok.text in self.binders:
            binder = tok.text
            self.constants.add(binder)
            self.expect("sym", "[")
            var_tok = self.next()
            if var_tok.kind != "ident":
                self.fail("binder variable must be a bare identifier", var_tok)
            self.expect("sym", ":")
            var_type = self.parse_term(0)
            self.expect("sym", "]")
            self.expect("sym", ":")
            body = self.parse_term(0)
            return Comb(Id(binder), Abs(var_tok.text, var_type, body))
        if tok.kind == "sym" and tok.text in INFIX_PRECEDENCE:
            self.fail(f"unknown infix operator {tok.text!r} (not in the operator table)", tok)
        self.fail(f"unexpected token {tok.text or tok.kind!r}", tok)


def parse_tt_file(
    text: str,
    library_id: int,
    operators: Optional[Mapping[str, int]] = None,
    binders: Optional[Iterable[str]] = None,
) -> list:
    """Parse ``tt(Name, Kind, Term).`` clauses into a list of items.

    ``operators`` maps accepted infix symbols to precedence (defaults to
    ``INFIX_PRECEDENCE``); an infix symbol outside the table is a syntax
    error.  Comments start with ``%`` or ``#`` and run to end of line; a
    clause may span physical lines.
    """
    ops = dict(INFIX_PRECEDENCE if operators is None else operators)
    binder_set = frozenset(DEFAULT_BINDERS if binders is None else binders)
    symbols = [s for s in list(ops) + list(binder_set) if not set(s) <= _IDENT_CHARS]
    # Known multi-char symbols must tokenize even when absent from the active
    # table so that a disabled operator fails as "unknown operator", not as a
    # character soup.
    symbols += [s for s in INFIX_PRECEDENCE if s not in symbols]
    tokens = _tokenize_tt(text, symbols)
    return _TtParser(tokens, ops, binder_set).parse_items(library_id)


def _escape(name: str) -> str:
    return name.replace("\\", "\\\\").replace('"', '\\"')


def to_sexp(term: TtTerm) -> str:
    """Serialize a term to its canonical single-line s-expression."""
    out = []

    def write(node):
        if isinstance(node, Id):
            out.append(f'(Id "{_escape(node.name)}")')
        elif isinstance(node, Comb):
            out.append("(Comb ")
            write(node.fun)
            out.append(" ")
            write(node.arg)
            out.append(")")
        elif isinstance(node, Abs):
            out.append(f'(Abs "{_escape(node.var)}" ')
            write(node.var_type)
            out.append(" ")
            write(node.body)
            out.append(")")
        else:
            raise TypeError(f"not a term: {node!r}")

    write(term)
    return "".join(out)


class _SexpReader:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def fail(self, message):
        raise TtSyntaxError(message, 1, self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def expect_char(self, c):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != c:
            self.fail(f"expected {c!r}")
        self.pos += 1

    def read_string(self):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != '"':
            self.fail("expected a double-quoted string")
        self.pos += 1
        out = []
        while True:
            if self.pos >= len(self.text):
                self.fail("unterminated string")
            c = self.text[self.pos]
            if c == "\\":
                if self.pos + 1 >= len(self.text):
                    self.fail("dangling escape in string")
                esc = self.text[self.pos + 1]
                if esc not in ('"', "\\"):
                    self.fail(f"unknown escape \\{esc} in string")
                out.append(esc)
                self.pos += 2
            elif c == '"':
                self.pos += 1
                return "".join(out)
            else:
                out.append(c)
                self.pos += 1

    def read_head(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        if start == self.pos:
            self.fail("expected a constructor name")
        return self.text[start:self.pos]

    def read_term(self):
        self.expect_char("(")
        head = self.read_head()
        if head == "Id":
            term = Id(self.read_string())
        elif head == "Comb":
            term = Comb(self.read_term(), self.read_term())
        elif head == "Abs":
            term = Abs(self.read_string(), self.read_term(), self.read_term())
        else:
            self.fail(f"unknown constructor {head!r}")
        self.expect_char(")")
        return term


def parse_sexp(line: str) -> TtTerm:
    """Parse one canonical s-expression back into a term (inverse of to_sexp)."""
    reader = _SexpReader(line)
    term = reader.read_term()
    reader.skip_ws()
    if reader.pos != len(reader.text):
        reader.fail("trailing input after term")
    return term


def constants_of(term, logical_set, known_constants=None):
    """Non-logical constant names in preorder first-occurrence order.

    Bound occurrences are variables.  A free identifier counts as a constant
    unless ``known_constants`` is given and does not contain it; names in
    ``logical_set`` are always skipped.  Duplicates collapse to the first
    occurrence.
    """
    out = []
    seen = set()

    def walk(node, bound):
        if isinstance(node, Id):
            name = node.name
            if name in bound or name in logical_set or name in seen:
                return
            if known_constants is not None and name not in known_constants:
                return
            seen.add(name)
            out.append(name)
        elif isinstance(node, Comb):
            walk(node.fun, bound)
            walk(node.arg, bound)
        else:
            walk(node.var_type, bound)
            walk(node.body, bound | {node.var})

    walk(term, frozenset())
    return out
