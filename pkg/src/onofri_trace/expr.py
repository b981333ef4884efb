"""Small expression language for user test fields, with gradients by
forward-mode differentiation of the expression tree.

Grammar: numbers, + - * / ** and unary minus, the functions exp, log, sqrt,
abs, sin, cos, tanh, and the names
    x1 .. xn   coordinates (xn is also available as t)
    r          |x|
    rp         |x'| (the boundary coordinates only)
    pi, e
Anything else (attribute access, calls to other names, subscripts, ...) is
rejected at parse time; the string is never handed to eval.
"""
from __future__ import annotations

import ast
import math

import numpy as np

from .fields import ScalarField, Tail


class ExpressionError(ValueError):
    pass


class Dual:
    """value (m,) with gradient (m, n)."""
    __slots__ = ("v", "g")

    def __init__(self, v, g):
        self.v = v
        self.g = g

    def __add__(self, o):
        return Dual(self.v + o.v, self.g + o.g)

    def __sub__(self, o):
        return Dual(self.v - o.v, self.g - o.g)

    def __mul__(self, o):
        return Dual(self.v * o.v, self.g * o.v[:, None] + o.g * self.v[:, None])

    def __truediv__(self, o):
        return Dual(self.v / o.v, (self.g * o.v[:, None] - o.g * self.v[:, None]) / (o.v ** 2)[:, None])

    def __neg__(self):
        return Dual(-self.v, -self.g)

    def __pow__(self, o):
        if not np.any(o.g):
            c = o.v
            with np.errstate(divide="ignore", invalid="ignore"):
                dv = np.where(c == 0, 0.0, c * self.v ** (c - 1))
            return Dual(self.v ** c, self.g * dv[:, None])
        v = self.v ** o.v
        lg = np.log(self.v)
        with np.errstate(divide="ignore", invalid="ignore"):
            gs = np.where(np.any(self.g != 0, axis=1), o.v * self.v ** (o.v - 1), 0.0)
        return Dual(v, self.g * gs[:, None] + o.g * (v * lg)[:, None])

    def chain(self, f, df):
        return Dual(f(self.v), self.g * df(self.v)[:, None])


def _sign(v):
    return np.sign(v)


_FUNCS = {
    "exp": (np.exp, np.exp),
    "log": (np.log, lambda v: 1.0 / v),
    "sqrt": (np.sqrt, lambda v: 0.5 / np.sqrt(v)),
    "abs": (np.abs, _sign),
    "sin": (np.sin, np.cos),
    "cos": (np.cos, lambda v: -np.sin(v)),
    "tanh": (np.tanh, lambda v: 1.0 / np.cosh(v) ** 2),
}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: "__add__", ast.Sub: "__sub__", ast.Mult: "__mul__", ast.Div: "__truediv__",
           ast.Pow: "__pow__"}


def _names(n):
    out = {f"x{i + 1}" for i in range(n)} | {"t", "r", "rp"} | set(_CONSTS)
    return out


def parse(text: str, n: int) -> ast.Expression:
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    allowed = _names(n)
    for node in ast.walk(tree):
        if isinstance(node, (ast.Expression, ast.Load, ast.operator, ast.unaryop)):
            if isinstance(node, ast.operator) and type(node) not in _BINOPS:
                raise ExpressionError(f"operator {type(node).__name__} is not allowed")
            if isinstance(node, ast.unaryop) and not isinstance(node, (ast.USub, ast.UAdd)):
                raise ExpressionError(f"operator {type(node).__name__} is not allowed")
            continue
        if isinstance(node, (ast.BinOp, ast.UnaryOp)):
            continue
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ExpressionError(f"constant {node.value!r} is not a number")
            continue
        if isinstance(node, ast.Name):
            if node.id not in allowed and node.id not in _FUNCS:
                raise ExpressionError(f"unknown name {node.id!r}")
            continue
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                raise ExpressionError("only exp, log, sqrt, abs, sin, cos, tanh may be called")
            if len(node.args) != 1 or node.keywords:
                raise ExpressionError(f"{node.func.id} takes exactly one argument")
            continue
        raise ExpressionError(f"{type(node).__name__} is not allowed in a field expression")
    return tree


def _leaves(x):
    m, n = x.shape
    eye = np.eye(n)
    env = {}
    for i in range(n):
        env[f"x{i + 1}"] = Dual(x[:, i].copy(), np.broadcast_to(eye[i], (m, n)).copy())
    env["t"] = env[f"x{n}"]
    r = np.linalg.norm(x, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        env["r"] = Dual(r, np.where(r[:, None] > 0, x / r[:, None], 0.0))
        rp = np.linalg.norm(x[:, :-1], axis=1)
        grp = np.zeros_like(x)
        grp[:, :-1] = np.where(rp[:, None] > 0, x[:, :-1] / rp[:, None], 0.0)
    env["rp"] = Dual(rp, grp)
    return env


def _eval(node, env, m, n):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env, m, n)
    if isinstance(node, ast.Constant):
        return Dual(np.full(m, float(node.value)), np.zeros((m, n)))
    if isinstance(node, ast.Name):
        if node.id in _CONSTS:
            return Dual(np.full(m, _CONSTS[node.id]), np.zeros((m, n)))
        return env[node.id]
    if isinstance(node, ast.UnaryOp):
        a = _eval(node.operand, env, m, n)
        return -a if isinstance(node.op, ast.USub) else a
    if isinstance(node, ast.BinOp):
        a = _eval(node.left, env, m, n)
        b = _eval(node.right, env, m, n)
        return getattr(a, _BINOPS[type(node.op)])(b)
    if isinstance(node, ast.Call):
        f, df = _FUNCS[node.func.id]
        return _eval(node.args[0], env, m, n).chain(f, df)
    raise ExpressionError(f"unexpected node {type(node).__name__}")


def evaluate(tree: ast.Expression, x):
    """(value, gradient) of a parsed expression at points x of shape (..., n)."""
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    n = x.shape[-1]
    flat = x.reshape(-1, n)
    m = flat.shape[0]
    with np.errstate(all="ignore"):
        d = _eval(tree, _leaves(flat), m, n)
    return d.v.reshape(shape), d.g.reshape(shape + (n,))


def field_from_expression(text: str, n: int, tail: Tail | None = None) -> ScalarField:
    """ScalarField for a user expression.  Without tail data the integrability
    checks are skipped and results are marked tail-unverified."""
    tree = parse(text, n)
    return ScalarField(n, lambda x: evaluate(tree, x)[0], lambda x: evaluate(tree, x)[1], None, tail,
                       1.0, f"expr({text})")
