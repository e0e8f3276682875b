"""Text grammar for graded polynomial expressions.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := signed (('*' | '/') signed)*
    signed := ('+' | '-')* power
    power  := atom ('^' ('-')? INT)?
    atom   := INT | 'i' | NAME | '(' expr ')'

``i`` is the reserved imaginary unit.  Rationals are spelled with the
division operator (``3/4``), whose right-hand side must be a unit; negative
powers are only valid on invertible variables.  Names are resolved through
a scope object (``resolve_name(name) -> GradedPoly``), which is also how
jet suffixes like ``u12_xxx`` and ``u0_t`` come in.

The canonical printer in :mod:`graded_zcr.superscalar` emits text this
parser maps back to an equal polynomial.
"""

from __future__ import annotations

import re

from .superscalar import GR_I, GradedPoly, Variable

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<num>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()])"
)


class ParseError(ValueError):
    """Syntax or resolution error, carrying 1-based line/column position."""

    def __init__(self, message: str, text: str, offset: int):
        line = text.count("\n", 0, offset) + 1
        col = offset - text.rfind("\n", 0, offset)
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.column = col


class DictScope:
    """Name scope backed by a plain mapping of name -> Variable or poly."""

    def __init__(self, mapping: dict | None = None, parent=None):
        self.mapping = dict(mapping or {})
        self.parent = parent

    def add(self, *variables: Variable):
        for v in variables:
            self.mapping[v.name] = v
        return self

    def resolve_name(self, name: str) -> GradedPoly:
        entry = self.mapping.get(name)
        if entry is not None:
            if isinstance(entry, Variable):
                return GradedPoly.variable(entry)
            return entry
        if self.parent is not None:
            return self.parent.resolve_name(name)
        raise KeyError(name)


def _tokenize(text: str):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, scope):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.scope = scope

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, offset=None):
        if offset is None:
            offset = self.peek()[2]
        raise ParseError(message, self.text, offset)

    # grammar ----------------------------------------------------------------

    def parse(self) -> GradedPoly:
        value = self.expr()
        kind, tok, off = self.peek()
        if kind != "end":
            self.error(f"unexpected {tok!r} after expression")
        return value

    def expr(self) -> GradedPoly:
        value = self.term()
        while True:
            kind, tok, _ = self.peek()
            if kind == "op" and tok in "+-":
                self.advance()
                rhs = self.term()
                value = value + rhs if tok == "+" else value - rhs
            else:
                return value

    def term(self) -> GradedPoly:
        value = self.signed()
        while True:
            kind, tok, off = self.peek()
            if kind == "op" and tok in "*/":
                self.advance()
                rhs = self.signed()
                try:
                    value = value * rhs if tok == "*" else value / rhs
                except (ValueError, ZeroDivisionError) as exc:
                    self.error(str(exc), off)
            else:
                return value

    def signed(self) -> GradedPoly:
        negate = False
        while True:
            kind, tok, _ = self.peek()
            if kind == "op" and tok in "+-":
                self.advance()
                if tok == "-":
                    negate = not negate
            else:
                break
        value = self.power()
        return -value if negate else value

    def power(self) -> GradedPoly:
        value = self.atom()
        kind, tok, _ = self.peek()
        if kind == "op" and tok == "^":
            self.advance()
            exponent = self.exponent()
            off = self.tokens[self.i - 1][2]
            try:
                value = value ** exponent
            except (ValueError, ZeroDivisionError) as exc:
                self.error(str(exc), off)
        return value

    def exponent(self) -> int:
        sign = 1
        kind, tok, _ = self.peek()
        if kind == "op" and tok == "-":
            self.advance()
            sign = -1
        kind, tok, off = self.advance()
        if kind != "num":
            self.error("integer exponent expected", off)
        return sign * int(tok)

    def atom(self) -> GradedPoly:
        kind, tok, off = self.advance()
        if kind == "num":
            return GradedPoly.scalar(int(tok))
        if kind == "name":
            if tok == "i":
                return GradedPoly.scalar(GR_I)
            try:
                return self.scope.resolve_name(tok)
            except KeyError:
                self.error(f"unknown name {tok!r}", off)
        if kind == "op" and tok == "(":
            value = self.expr()
            kind, tok, off = self.advance()
            if not (kind == "op" and tok == ")"):
                self.error("')' expected", off)
            return value
        self.error(f"unexpected {tok!r}" if tok else "unexpected end of input", off)


def parse_expression(text: str, scope) -> GradedPoly:
    """Parse ``text`` against ``scope`` into a canonical GradedPoly."""
    return _Parser(text, scope).parse()
