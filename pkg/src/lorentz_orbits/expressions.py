"""Closed-form potential components from a small arithmetic grammar.

Accepted syntax is a Python-style arithmetic expression over the symbols
``t, x1, x2, x3`` and the constants ``pi, T`` with ``+ - * / **`` (``^`` is
read as power), unary minus and the functions ``sin cos exp log sqrt abs``.
Anything else is rejected before evaluation; nothing is passed to ``eval``.

Parsed expressions become sympy objects so that all derivatives needed by
the field and action code are exact.
"""
import ast

import numpy as np
import sympy as sp

from .errors import ConfigError

t_sym, x1_sym, x2_sym, x3_sym = sp.symbols("t x1 x2 x3", real=True)
T_sym = sp.Symbol("T", positive=True)
SPACE = (x1_sym, x2_sym, x3_sym)

_NAMES = {"t": t_sym, "x1": x1_sym, "x2": x2_sym, "x3": x3_sym, "T": T_sym, "pi": sp.pi}
_FUNCS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "exp": sp.exp,
    "log": sp.log,
    "sqrt": sp.sqrt,
    "abs": sp.Abs,
}
_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}


def _convert(node):
    if isinstance(node, ast.Expression):
        return _convert(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return sp.nsimplify(node.value) if isinstance(node.value, int) else sp.Float(node.value)
    if isinstance(node, ast.Name):
        if node.id not in _NAMES:
            raise ConfigError(f"unknown symbol {node.id!r} in expression")
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_convert(node.left), _convert(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _convert(node.operand)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ConfigError("only sin, cos, exp, log, sqrt, abs may be called")
        if len(node.args) != 1 or node.keywords:
            raise ConfigError(f"{node.func.id} takes exactly one argument")
        return _FUNCS[node.func.id](_convert(node.args[0]))
    raise ConfigError(f"unsupported syntax in expression: {ast.dump(node)[:60]}")


def parse_expression(text, period=None):
    """Parse ``text`` into a sympy expression, substituting ``T`` if given."""
    if not isinstance(text, str):
        text = str(text)
    try:
        # '^' must bind like '**'; Python parses it as a low-precedence xor
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc.msg}") from exc
    expr = _convert(tree)
    if period is not None:
        expr = expr.subs(T_sym, sp.Float(period))
    return expr


def compile_scalar(expr):
    """Vectorised numpy callable ``f(t, x)`` for a sympy expression."""
    fn = sp.lambdify((t_sym, x1_sym, x2_sym, x3_sym), expr, modules="numpy")

    def evaluate(t, x):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        shape = np.broadcast_shapes(t.shape, x.shape[:-1])
        with np.errstate(divide="ignore", invalid="ignore"):
            val = fn(t, x[..., 0], x[..., 1], x[..., 2])
        return np.broadcast_to(np.asarray(val, dtype=float), shape).copy()

    return evaluate


def compile_vector(exprs):
    parts = [compile_scalar(e) for e in exprs]

    def evaluate(t, x):
        return np.stack([p(t, x) for p in parts], axis=-1)

    return evaluate


def compile_matrix(rows):
    parts = [[compile_scalar(e) for e in row] for row in rows]

    def evaluate(t, x):
        return np.stack([np.stack([p(t, x) for p in row], axis=-1) for row in parts], axis=-2)

    return evaluate


def scalar_derivatives(expr):
    """(dt, gradient, hessian, dt-gradient) of a scalar expression."""
    dt = sp.diff(expr, t_sym)
    grad = [sp.diff(expr, s) for s in SPACE]
    hess = [[sp.diff(g, s) for s in SPACE] for g in grad]
    dt_grad = [sp.diff(dt, s) for s in SPACE]
    return dt, grad, hess, dt_grad
