"""Coefficient-function expressions for p(x) and V(x).

Grammar (whitespace ignored)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := primary ('^' ['-' | '+'] INTEGER)?
    primary  := NUMBER | 'x' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
    FUNC     := sin | cos | exp | log | sqrt | sinh | cosh | tanh

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.  Exponents
must be integer literals.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .jets import Jet

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "sinh", "cosh", "tanh")


class ExpressionError(ValueError):
    """Raised for malformed expressions.

    Attributes
    ----------
    offset : int
        Byte offset into the source text where the problem was detected.
    expected : tuple of str
        Tokens that would have been accepted at ``offset`` (may be empty).
    """

    def __init__(self, message, offset=0, expected=()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class DomainError(ArithmeticError):
    """Function evaluated outside its real domain (log/sqrt of x <= 0, ...)."""


# --------------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Pi, BinOp, Neg, Pow, Call]


# ------------------------------------------------------------------------ lexing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected, message=None):
        kind, value, pos = self.tok
        if message is None:
            message = "unexpected end of input" if kind == "end" else f"unexpected token {value!r}"
        raise ExpressionError(message, pos, expected)

    def expect_op(self, op):
        if self.tok[0] == "op" and self.tok[1] == op:
            return self.advance()
        self.fail((repr(op),))

    def parse(self):
        node = self.expr()
        if self.tok[0] != "end":
            self.fail(("operator", "end of input"))
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            sign = 1
            if self.tok[0] == "op" and self.tok[1] in "+-":
                sign = -1 if self.advance()[1] == "-" else 1
            kind, value, pos = self.tok
            if kind != "number":
                self.fail(("integer exponent",))
            if not re.fullmatch(r"\d+", value):
                raise ExpressionError(f"non-integer exponent {value!r}", pos)
            self.advance()
            base = Pow(base, sign * int(value))
            if self.tok[0] == "op" and self.tok[1] == "^":
                self.fail(("operator", "end of input"), "chained exponent")
        return base

    def primary(self):
        kind, value, pos = self.tok
        if kind == "number":
            self.advance()
            return Num(float(value))
        if kind == "name":
            self.advance()
            if value == "x":
                return Var()
            if value == "pi":
                return Pi()
            if value in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(value, arg)
            raise ExpressionError(f"unknown identifier {value!r}", pos)
        if kind == "op" and value == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        self.fail(("number", "x", "pi", "function", "'('", "'-'"))


def parse_expression(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises
    ------
    ExpressionError
        On syntax errors, unknown identifiers or non-integer exponents.
    """
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("empty expression", 0)
    try:
        text.encode("ascii")
    except UnicodeEncodeError as exc:
        raise ExpressionError("non-ASCII character", exc.start) from None
    return _Parser(text).parse()


def to_string(node: Expr) -> str:
    """Print an expression so that :func:`parse_expression` rebuilds the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, BinOp):
        return f"({to_string(node.left)} {node.op} {to_string(node.right)})"
    if isinstance(node, Neg):
        return f"(-{to_string(node.operand)})"
    if isinstance(node, Pow):
        return f"({to_string(node.base)})^{node.exponent}"
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def substitute_affine(node: Expr, a: float, b: float) -> Expr:
    """Return the tree with ``x`` replaced by ``a + (b - a) * x``."""
    if isinstance(node, Var):
        if a == 0.0 and b == 1.0:
            return node
        return BinOp("+", Num(a), BinOp("*", Num(b - a), Var()))
    if isinstance(node, (Num, Pi)):
        return node
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute_affine(node.left, a, b), substitute_affine(node.right, a, b))
    if isinstance(node, Neg):
        return Neg(substitute_affine(node.operand, a, b))
    if isinstance(node, Pow):
        return Pow(substitute_affine(node.base, a, b), node.exponent)
    if isinstance(node, Call):
        return Call(node.func, substitute_affine(node.arg, a, b))
    raise TypeError(f"not an expression node: {node!r}")


# -------------------------------------------------------------------- evaluation

_BINARY = {"+": "__add__", "-": "__sub__", "*": "__mul__", "/": "__truediv__"}


def eval_jet_expr(node: Expr, x, order: int) -> Jet:
    """Propagate the seed jet ``(x, 1, 0, ...)`` through the tree."""
    if isinstance(node, Num):
        return Jet.constant(node.value, order, np.shape(x))
    if isinstance(node, Pi):
        return Jet.constant(math.pi, order, np.shape(x))
    if isinstance(node, Var):
        return Jet.variable(x, order)
    if isinstance(node, BinOp):
        left = eval_jet_expr(node.left, x, order)
        right = eval_jet_expr(node.right, x, order)
        if node.op == "/" and np.any(right.coeffs[0] == 0.0):
            raise DomainError("division by zero")
        return getattr(left, _BINARY[node.op])(right)
    if isinstance(node, Neg):
        return -eval_jet_expr(node.operand, x, order)
    if isinstance(node, Pow):
        base = eval_jet_expr(node.base, x, order)
        if node.exponent < 0 and np.any(base.coeffs[0] == 0.0):
            raise DomainError("negative power of zero")
        return base ** node.exponent
    if isinstance(node, Call):
        arg = eval_jet_expr(node.arg, x, order)
        if node.func in ("log", "sqrt") and np.any(arg.coeffs[0] <= 0.0):
            raise DomainError(f"{node.func} of non-positive value")
        return getattr(arg, node.func)()
    raise TypeError(f"not an expression node: {node!r}")


def python_source(node: Expr) -> str:
    """Render as a Python expression in ``x`` using the :mod:`math` namespace."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Var):
        return "x"
    if isinstance(node, BinOp):
        return f"({python_source(node.left)} {node.op} {python_source(node.right)})"
    if isinstance(node, Neg):
        return f"(-{python_source(node.operand)})"
    if isinstance(node, Pow):
        return f"({python_source(node.base)} ** {node.exponent})"
    if isinstance(node, Call):
        return f"{node.func}({python_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def compile_python(node: Expr):
    """Compile to a scalar Python function ``f(x) -> float``."""
    namespace = {name: getattr(math, name) for name in FUNCTIONS}
    namespace["pi"] = math.pi
    return eval(f"lambda x: {python_source(node)}", namespace)


# Stack-machine opcodes shared with the compiled kernel.
OP_CONST, OP_X, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_NEG, OP_POWI = range(8)
OP_FUNC = {name: 8 + i for i, name in enumerate(FUNCTIONS)}
_OP_BIN = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV}


def compile_program(node: Expr):
    """Compile to a postfix program ``(ops, args)`` for the native kernel."""
    ops, args = [], []

    def emit(node, depth):
        if isinstance(node, Num):
            ops.append(OP_CONST), args.append(node.value)
            return depth + 1
        if isinstance(node, Pi):
            ops.append(OP_CONST), args.append(math.pi)
            return depth + 1
        if isinstance(node, Var):
            ops.append(OP_X), args.append(0.0)
            return depth + 1
        if isinstance(node, BinOp):
            d1 = emit(node.left, depth)
            d2 = emit(node.right, depth + 1)
            ops.append(_OP_BIN[node.op]), args.append(0.0)
            return max(d1, d2)
        if isinstance(node, Neg):
            d = emit(node.operand, depth)
            ops.append(OP_NEG), args.append(0.0)
            return d
        if isinstance(node, Pow):
            d = emit(node.base, depth)
            ops.append(OP_POWI), args.append(float(node.exponent))
            return d
        if isinstance(node, Call):
            d = emit(node.arg, depth)
            ops.append(OP_FUNC[node.func]), args.append(0.0)
            return d
        raise TypeError(f"not an expression node: {node!r}")

    depth = emit(node, 0)
    return np.asarray(ops, dtype=np.int32), np.asarray(args, dtype=np.float64), depth


class SmoothFunction:
    """A coefficient function given by an expression in ``x``.

    Parameters
    ----------
    source : str or Expr
        Expression text or an already-parsed tree.
    positive : bool
        Require strictly positive values on a 101-point probe grid of [0, 1]
        (used for ``p``).
    """

    PROBE_POINTS = 101

    def __init__(self, source, positive=False):
        if isinstance(source, str):
            self.expr = parse_expression(source)
            self.text = source.strip()
        else:
            self.expr = source
            self.text = to_string(source)
        self.positive = positive
        self._scalar = compile_python(self.expr)
        grid = np.linspace(0.0, 1.0, self.PROBE_POINTS)
        try:
            values = np.array([self._scalar(x) for x in grid])
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f"cannot evaluate {self.text!r} on [0, 1]: {exc}") from None
        if not np.all(np.isfinite(values)):
            raise DomainError(f"{self.text!r} is not finite on [0, 1]")
        if positive and np.any(values <= 0.0):
            bad = grid[np.argmax(values <= 0.0)]
            raise DomainError(f"{self.text!r} must be positive on [0, 1] (fails at x={bad:g})")

    def __repr__(self):
        return f"SmoothFunction({self.text!r})"

    def __call__(self, x):
        if np.ndim(x) == 0:
            return self._scalar(float(x))
        return np.array([self._scalar(float(t)) for t in np.ravel(x)]).reshape(np.shape(x))

    def jet(self, x, order: int) -> Jet:
        return eval_jet(self, x, order)

    def affine(self, a, b, factor=1.0):
        """``factor * f(a + (b - a) x)`` as a new function."""
        node = substitute_affine(self.expr, a, b)
        if factor != 1.0:
            node = BinOp("*", Num(float(factor)), node)
        return SmoothFunction(node, positive=self.positive)


def eval_jet(f: SmoothFunction, x, order: int) -> Jet:
    """Taylor coefficients ``c_k = f^(k)(x) / k!`` for ``k = 0..order``.

    ``x`` may be a scalar or an array; coefficients then carry the array shape
    in their trailing axes.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("x must lie in [0, 1]")
    with np.errstate(over="raise", invalid="raise", divide="raise", under="ignore"):
        try:
            return eval_jet_expr(f.expr, x, order)
        except FloatingPointError as exc:
            raise DomainError(f"overflow or invalid value evaluating {f.text!r}: {exc}") from None
