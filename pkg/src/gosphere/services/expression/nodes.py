#!/usr/bin/env python3
"""
Expression Tree
Node types, minimal-parenthesis printer and vectorized numpy evaluation
"""

from dataclasses import dataclass
from typing import Dict, Mapping, Tuple, Union

import numpy as np

from gosphere.utils.errors import UnknownIdentifierError

FUNCTIONS: Dict[str, int] = {"sqrt": 1, "exp": 1, "log": 1}

_NUMPY_FUNCTIONS = {"sqrt": np.sqrt, "exp": np.exp, "log": np.log}

# binding strength used by the printer
PREC_ADD = 1
PREC_MUL = 2
PREC_POW = 3
PREC_NEG = 4
PREC_ATOM = 5


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    """Negation ('neg') or a one-argument smooth function ('sqrt', 'exp', 'log')."""

    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Unary, Binary]


def precedence(node: Expr) -> int:
    if isinstance(node, Binary):
        return {"+": PREC_ADD, "-": PREC_ADD, "*": PREC_MUL, "/": PREC_MUL, "^": PREC_POW}[node.op]
    if isinstance(node, Unary) and node.op == "neg":
        return PREC_NEG
    return PREC_ATOM


def _wrap(node: Expr, needs_parens: bool) -> str:
    text = to_text(node)
    return f"({text})" if needs_parens else text


def _number(value: float) -> str:
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") and "e" not in text else text


def to_text(node: Expr) -> str:
    """Print with the fewest parentheses that parse back to the same tree."""
    if isinstance(node, Const):
        return _number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            return "-" + _wrap(node.operand, precedence(node.operand) < PREC_ATOM)
        return f"{node.op}({to_text(node.operand)})"
    left_prec, right_prec = precedence(node.left), precedence(node.right)
    if node.op in "+-":
        return f"{_wrap(node.left, left_prec < PREC_ADD)}{node.op}{_wrap(node.right, right_prec <= PREC_ADD)}"
    if node.op in "*/":
        return f"{_wrap(node.left, left_prec < PREC_MUL)}{node.op}{_wrap(node.right, right_prec <= PREC_MUL)}"
    # '^' is right associative and its base is a unary
    return f"{_wrap(node.left, left_prec < PREC_NEG)}^{_wrap(node.right, right_prec < PREC_POW)}"


def variables(node: Expr) -> Tuple[str, ...]:
    """Sorted variable names used by the tree."""
    found = set()
    stack = [node]
    while stack:
        item = stack.pop()
        if isinstance(item, Var):
            found.add(item.name)
        elif isinstance(item, Unary):
            stack.append(item.operand)
        elif isinstance(item, Binary):
            stack.extend([item.left, item.right])
    return tuple(sorted(found))


def evaluate(node: Expr, env: Mapping[str, np.ndarray]) -> np.ndarray:
    """Evaluate elementwise over numpy arrays; invalid operations give nan instead of raising."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.asarray(_evaluate(node, env), dtype=float)


def _evaluate(node: Expr, env: Mapping[str, np.ndarray]):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        if node.name not in env:
            raise UnknownIdentifierError(node.name, -1)
        return env[node.name]
    if isinstance(node, Unary):
        operand = _evaluate(node.operand, env)
        if node.op == "neg":
            return -operand
        return _NUMPY_FUNCTIONS[node.op](operand)
    left = _evaluate(node.left, env)
    right = _evaluate(node.right, env)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return np.divide(left, right)
    return np.power(left, right)
