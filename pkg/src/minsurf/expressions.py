"""Safe radial expressions.

Warp functions and extrinsic profiles are declared in config files as
expressions in the single variable ``r`` over the grammar
``{+, -, *, /, pow, exp, ln, sinh, cosh, sqrt}`` plus numeric literals and
``pi``.  Parsing goes through :mod:`ast` with a strict whitelist (no eval),
the validated tree is converted to a sympy expression, and first/second
derivatives are produced symbolically so that derivative data is analytic
rather than finite-differenced.
"""

from __future__ import annotations

import ast

import numpy as np
import sympy as sp

from .errors import ScenarioParseError

_R = sp.Symbol("r", positive=True)

_FUNCTIONS = {
    "exp": sp.exp,
    "ln": sp.log,
    "log": sp.log,
    "sinh": sp.sinh,
    "cosh": sp.cosh,
    "sqrt": sp.sqrt,
}

_UNICODE_OPS = str.maketrans({"−": "-", "×": "*", "÷": "/"})


def _convert(node, text):
    """Validated ast -> sympy, rejecting anything outside the grammar."""
    if isinstance(node, ast.Expression):
        return _convert(node.body, text)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return sp.Float(node.value) if isinstance(node.value, float) else sp.Integer(node.value)
        raise ScenarioParseError(
            f"literal {node.value!r} not allowed", getattr(node, "lineno", None), getattr(node, "col_offset", None)
        )
    if isinstance(node, ast.Name):
        if node.id == "r":
            return _R
        if node.id == "pi":
            return sp.pi
        raise ScenarioParseError(f"unknown symbol '{node.id}'", node.lineno, node.col_offset)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        val = _convert(node.operand, text)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.BinOp):
        lhs = _convert(node.left, text)
        rhs = _convert(node.right, text)
        if isinstance(node.op, ast.Add):
            return lhs + rhs
        if isinstance(node.op, ast.Sub):
            return lhs - rhs
        if isinstance(node.op, ast.Mult):
            return lhs * rhs
        if isinstance(node.op, ast.Div):
            return lhs / rhs
        if isinstance(node.op, ast.Pow):
            return lhs**rhs
        raise ScenarioParseError("operator not allowed", node.lineno, node.col_offset)
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.keywords:
            raise ScenarioParseError("only plain function calls allowed", node.lineno, node.col_offset)
        name = node.func.id
        if name == "pow":
            if len(node.args) != 2:
                raise ScenarioParseError("pow takes two arguments", node.lineno, node.col_offset)
            return _convert(node.args[0], text) ** _convert(node.args[1], text)
        if name in _FUNCTIONS:
            if len(node.args) != 1:
                raise ScenarioParseError(f"{name} takes one argument", node.lineno, node.col_offset)
            return _FUNCTIONS[name](_convert(node.args[0], text))
        raise ScenarioParseError(f"unknown function '{name}'", node.lineno, node.col_offset)
    raise ScenarioParseError(
        "syntax element not allowed", getattr(node, "lineno", None), getattr(node, "col_offset", None)
    )


def _wrap(fn):
    def call(r):
        r = np.asarray(r, dtype=float)
        out = fn(r)
        out = np.asarray(out, dtype=float)
        if out.shape != r.shape:
            out = np.broadcast_to(out, r.shape).copy()
        return out if r.ndim else float(out)

    return call


class RadialExpression:
    """A function of r with analytic first and second derivatives.

    Immutable; instances are safe for concurrent use.
    """

    __slots__ = ("text", "sym", "_f", "_d1", "_d2")

    def __init__(self, text, sym):
        self.text = text
        self.sym = sym
        d1 = sp.diff(sym, _R)
        d2 = sp.diff(d1, _R)
        self._f = _wrap(sp.lambdify(_R, sym, "numpy"))
        self._d1 = _wrap(sp.lambdify(_R, d1, "numpy"))
        self._d2 = _wrap(sp.lambdify(_R, d2, "numpy"))

    def __call__(self, r):
        return self._f(r)

    def d1(self, r):
        return self._d1(r)

    def d2(self, r):
        return self._d2(r)

    def __repr__(self):
        return f"RadialExpression({self.text!r})"


def parse_expression(text: str) -> RadialExpression:
    """Parse an expression in r; raises ScenarioParseError with position."""
    normalized = text.translate(_UNICODE_OPS).strip()
    if not normalized:
        raise ScenarioParseError("empty expression")
    try:
        tree = ast.parse(normalized, mode="eval")
    except SyntaxError as exc:
        raise ScenarioParseError(f"cannot parse '{text}': {exc.msg}", exc.lineno, exc.offset) from None
    sym = _convert(tree, normalized)
    return RadialExpression(normalized, sym)


# Finite-difference fallbacks, also used as independent oracles in tests.

def fd_d1(fn, r, scale=1e-6):
    """Centered first difference with step max(scale, scale*r)."""
    r = np.asarray(r, dtype=float)
    h = np.maximum(scale, scale * np.abs(r))
    return (np.asarray(fn(r + h)) - np.asarray(fn(r - h))) / (2.0 * h)


def fd_d2(fn, r, scale=1e-4):
    """Centered second difference; wider step keeps rounding error ~1e-8."""
    r = np.asarray(r, dtype=float)
    h = np.maximum(scale, scale * np.abs(r))
    return (np.asarray(fn(r + h)) - 2.0 * np.asarray(fn(r)) + np.asarray(fn(r - h))) / h**2
