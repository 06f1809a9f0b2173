"""Closed-form scalar fields over ``x1, x2``: parsing, evaluation, derivatives.

The grammar is a whitelisted subset of Python expression syntax (parsed with
:mod:`ast`): numbers, ``x1``, ``x2``, ``pi``, ``e``, ``+ - * /``, unary minus,
``**``/``^`` with a numeric exponent, and the calls ``exp log sin cos``.
Expressions are turned into a small immutable tree that can be evaluated on
numpy arrays, differentiated symbolically, and printed canonically.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass

import numpy as np

__all__ = ["Expr", "ExprError", "parse_expr"]

FUNCS = {"exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos}
CONSTS = {"pi": np.pi, "e": np.e}
VARS = ("x1", "x2")


class ExprError(ValueError):
    """Malformed or unsupported coefficient expression; carries the column."""

    def __init__(self, message: str, col: int | None = None):
        super().__init__(message if col is None else f"column {col}: {message}")
        self.col = col


@dataclass(frozen=True)
class Expr:
    """Expression node: ``op`` is ``const``, ``var``, ``+``, ``*``, ``/``,
    ``neg``, ``pow`` or a function name."""

    op: str
    args: tuple = ()
    value: float | str | None = None

    # -- construction with light simplification ------------------------------
    @staticmethod
    def const(c: float) -> "Expr":
        return Expr("const", value=float(c))

    @staticmethod
    def var(name: str) -> "Expr":
        return Expr("var", value=name)

    def is_const(self, c: float | None = None) -> bool:
        return self.op == "const" and (c is None or self.value == c)

    def __add__(self, other: "Expr") -> "Expr":
        if self.is_const(0.0):
            return other
        if other.is_const(0.0):
            return self
        if self.is_const() and other.is_const():
            return Expr.const(self.value + other.value)
        return Expr("+", (self, other))

    def __neg__(self) -> "Expr":
        if self.is_const():
            return Expr.const(-self.value)
        if self.op == "neg":
            return self.args[0]
        return Expr("neg", (self,))

    def __sub__(self, other: "Expr") -> "Expr":
        return self + (-other)

    def __mul__(self, other: "Expr") -> "Expr":
        if self.is_const(0.0) or other.is_const(0.0):
            return Expr.const(0.0)
        if self.is_const(1.0):
            return other
        if other.is_const(1.0):
            return self
        if self.is_const() and other.is_const():
            return Expr.const(self.value * other.value)
        return Expr("*", (self, other))

    def __truediv__(self, other: "Expr") -> "Expr":
        if other.is_const(1.0):
            return self
        if self.is_const(0.0):
            return Expr.const(0.0)
        return Expr("/", (self, other))

    def __pow__(self, k: float) -> "Expr":
        if k == 1.0:
            return self
        if k == 0.0:
            return Expr.const(1.0)
        return Expr("pow", (self,), float(k))

    # -- evaluation ----------------------------------------------------------------
    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = self._eval(x1, x2)
        return np.broadcast_to(out, np.broadcast(x1, x2).shape).astype(float)

    def _eval(self, x1, x2):
        op, a = self.op, self.args
        if op == "const":
            return self.value
        if op == "var":
            return x1 if self.value == "x1" else x2
        if op == "+":
            return a[0]._eval(x1, x2) + a[1]._eval(x1, x2)
        if op == "*":
            return a[0]._eval(x1, x2) * a[1]._eval(x1, x2)
        if op == "/":
            return a[0]._eval(x1, x2) / a[1]._eval(x1, x2)
        if op == "neg":
            return -a[0]._eval(x1, x2)
        if op == "pow":
            return a[0]._eval(x1, x2) ** self.value
        return FUNCS[op](a[0]._eval(x1, x2))

    # -- calculus ------------------------------------------------------------------
    def diff(self, var: str) -> "Expr":
        """Symbolic partial derivative with respect to ``x1`` or ``x2``."""
        op, a = self.op, self.args
        if op == "const":
            return Expr.const(0.0)
        if op == "var":
            return Expr.const(1.0 if self.value == var else 0.0)
        if op == "+":
            return a[0].diff(var) + a[1].diff(var)
        if op == "neg":
            return -a[0].diff(var)
        if op == "*":
            return a[0].diff(var) * a[1] + a[0] * a[1].diff(var)
        if op == "/":
            num = a[0].diff(var) * a[1] - a[0] * a[1].diff(var)
            return num / (a[1] ** 2.0)
        if op == "pow":
            k = self.value
            return Expr.const(k) * (a[0] ** (k - 1.0)) * a[0].diff(var)
        inner = a[0].diff(var)
        if op == "exp":
            return self * inner
        if op == "log":
            return inner / a[0]
        if op == "sin":
            return Expr("cos", (a[0],)) * inner
        if op == "cos":
            return -(Expr("sin", (a[0],)) * inner)
        raise ExprError(f"cannot differentiate {op}")  # pragma: no cover

    def uses(self) -> set:
        if self.op == "var":
            return {self.value}
        return set().union(*(x.uses() for x in self.args)) if self.args else set()

    # -- printing ------------------------------------------------------------------
    def _str_prec(self) -> tuple[str, int]:
        op, a = self.op, self.args
        if op == "const":
            return repr(float(self.value)), (2 if self.value < 0 else 5)
        if op == "var":
            return str(self.value), 5
        if op in FUNCS:
            return f"{op}({a[0]})", 5
        if op == "+":
            if a[1].op == "neg":
                return f"{_fmt(a[0], 1)} - {_fmt(a[1].args[0], 2)}", 1
            return f"{_fmt(a[0], 1)} + {_fmt(a[1], 2)}", 1
        if op == "neg":
            return f"-{_fmt(a[0], 4)}", 2
        if op in ("*", "/"):
            return f"{_fmt(a[0], 3)} {op} {_fmt(a[1], 4)}", 3
        return f"{_fmt(a[0], 5)} ** {float(self.value)!r}", 4

    def __str__(self) -> str:
        return self._str_prec()[0]


def _fmt(e: Expr, min_prec: int) -> str:
    s, p = e._str_prec()
    return f"({s})" if p < min_prec else s


def _convert(node: ast.AST) -> Expr:
    col = getattr(node, "col_offset", None)
    col = None if col is None else col + 1
    if isinstance(node, ast.Expression):
        return _convert(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return Expr.const(node.value)
    if isinstance(node, ast.Name):
        if node.id in VARS:
            return Expr.var(node.id)
        if node.id in CONSTS:
            return Expr.const(CONSTS[node.id])
        raise ExprError(f"unknown name {node.id!r}", col)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _convert(node.operand)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        left, right = _convert(node.left), _convert(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            return left / right
        if isinstance(node.op, ast.Pow):
            if not right.is_const():
                raise ExprError("exponent must be a numeric constant", col)
            return left ** right.value
        raise ExprError(f"unsupported operator {type(node.op).__name__}", col)
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCS:
            raise ExprError("only exp, log, sin and cos may be called", col)
        if len(node.args) != 1 or node.keywords:
            raise ExprError(f"{node.func.id} takes exactly one argument", col)
        return Expr(node.func.id, (_convert(node.args[0]),))
    raise ExprError(f"unsupported syntax {type(node).__name__}", col)


def parse_expr(text: str) -> Expr:
    """Parse a coefficient expression such as ``"1 + 0.3*x1"``."""
    if not isinstance(text, str) or not text.strip():
        raise ExprError("empty expression")
    src = text.strip().replace("^", "**")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"syntax error: {exc.msg}", exc.offset) from None
    return _convert(tree)
