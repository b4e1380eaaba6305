#!/usr/bin/env python3
"""
Expression Parser
Recursive-descent parser for the smooth expression language used by metric specs and vector fields.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := unary ('^' factor)?
    unary  := '-'? atom
    atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'

Binary operators are left associative except '^'. Functions: sqrt, exp, log.
"""

import re
from dataclasses import dataclass
from typing import Collection, List, Optional, Sequence

from gosphere.services.expression.nodes import FUNCTIONS, Binary, Const, Expr, Unary, Var, evaluate, to_text
from gosphere.utils.errors import ArityError, ExpressionSyntaxError, UnknownIdentifierError, ValidationError
from gosphere.utils.logger import get_logger

logger = get_logger(__name__)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)

FAMILY_VARIABLES = ("s1", "s2", "s3")

ATOM_START = ("number", "identifier", "(")


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | op | end
    text: str
    offset: int  # byte offset into the source


def coordinate_variables(prefix: str, count: int) -> List[str]:
    return [f"{prefix}{i}" for i in range(1, count + 1)]


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    position = 0
    while True:
        while position < len(text) and text[position].isspace():
            position += 1
        if position >= len(text):
            break
        match = _TOKEN_RE.match(text, position)
        if match is None or match.end() == position:
            offset = len(text[:position].encode("utf-8"))
            raise ExpressionSyntaxError(f"Unexpected character {text[position]!r}", offset,
                                        ["number", "identifier", "operator"])
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), len(text[:start].encode("utf-8"))))
        position = match.end()
    tokens.append(Token("end", "", len(text.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, text: str, allowed: Optional[Collection[str]]):
        self.tokens = tokenize(text)
        self.index = 0
        self.allowed = set(allowed) if allowed is not None else None

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def _is_op(self, *ops: str) -> bool:
        return self.current.kind == "op" and self.current.text in ops

    def _expect(self, op: str, expected: Sequence[str]) -> Token:
        if not self._is_op(op):
            self._fail(expected)
        return self._advance()

    def _fail(self, expected: Sequence[str]):
        token = self.current
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise ExpressionSyntaxError(f"Unexpected {found}", token.offset, expected)

    def parse(self) -> Expr:
        node = self.expr()
        if self.current.kind != "end":
            self._fail(["+", "-", "*", "/", "^", "end of input"])
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self._is_op("+", "-"):
            op = self._advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self._is_op("*", "/"):
            op = self._advance().text
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        base = self.unary()
        if self._is_op("^"):
            self._advance()
            return Binary("^", base, self.factor())
        return base

    def unary(self) -> Expr:
        if self._is_op("-"):
            self._advance()
            return Unary("neg", self.atom(["number", "identifier", "("]))
        return self.atom(list(ATOM_START) + ["-"])

    def atom(self, expected: Sequence[str]) -> Expr:
        token = self.current
        if token.kind == "number":
            self._advance()
            return Const(float(token.text))
        if token.kind == "ident":
            self._advance()
            if self._is_op("("):
                return self._call(token)
            if self.allowed is not None and token.text not in self.allowed:
                raise UnknownIdentifierError(token.text, token.offset)
            return Var(token.text)
        if self._is_op("("):
            self._advance()
            node = self.expr()
            self._expect(")", [")", "+", "-", "*", "/", "^"])
            return node
        self._fail(expected)

    def _call(self, name: Token) -> Expr:
        if name.text not in FUNCTIONS:
            raise UnknownIdentifierError(name.text, name.offset)
        self._advance()
        args = [self.expr()]
        while self._is_op(","):
            self._advance()
            args.append(self.expr())
        self._expect(")", [")", ","])
        if len(args) != FUNCTIONS[name.text]:
            raise ArityError(name.text, FUNCTIONS[name.text], len(args), name.offset)
        return Unary(name.text, args[0])


def parse_expr(text: str, variables: Optional[Collection[str]] = FAMILY_VARIABLES) -> Expr:
    """Parse text into an expression tree; `variables=None` accepts any identifier."""
    if text is None or not text.strip():
        raise ValidationError("Expression text is empty")
    tree = _Parser(text, variables).parse()
    logger.debug("Parsed expression %s", to_text(tree))
    return tree


def print_expr(tree: Expr) -> str:
    return to_text(tree)


__all__ = ["parse_expr", "print_expr", "tokenize", "evaluate", "coordinate_variables", "FAMILY_VARIABLES"]
