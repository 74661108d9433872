"""A small recursive-descent parser for coefficient expressions.

Grammar, loosest binding first::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

so ``^`` is right associative and binds tighter than unary minus
(``-x^2 == -(x^2)``). Names are the variable ``x``, the constant ``eps``
and the functions ``exp``, ``ln``, ``sin``, ``cos``.
"""

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

VARIABLES = ("x", "eps")
FUNCTIONS = {"exp": np.exp, "ln": np.log, "sin": np.sin, "cos": np.cos}


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ExprEvalError(ExprError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def tokenize(text):
    """Split ``text`` into ``(kind, value, offset)`` triples, ending with an EOF token."""
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            offset = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[offset]!r}", offset)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, off = self.tok
        if val != value:
            found = "end of input" if kind == "eof" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", off)
        self.advance()

    def parse(self):
        node = self.expr()
        kind, val, off = self.tok
        if kind != "eof":
            raise ExprSyntaxError(f"unexpected {val!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] in ("-", "+"):
            op = self.advance()[1]
            operand = self.unary()
            return Neg(operand) if op == "-" else operand
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, val, off = self.tok
        if kind == "num":
            self.advance()
            return Num(float(val))
        if kind == "name":
            self.advance()
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val in VARIABLES:
                return Var(val)
            raise ExprSyntaxError(f"unknown identifier {val!r}", off)
        if val == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "eof" else repr(val)
        raise ExprSyntaxError(f"expected a number, name or '(', found {found}", off)


def parse_expr(text):
    """Parse ``text`` into an expression tree."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text).parse()


def to_text(node):
    """Render a tree as fully parenthesized text that parses back to the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    return f"({to_text(node.left)} {node.op} {to_text(node.right)})"


def eval_expr(node, x, eps):
    """Evaluate a tree at ``x`` (scalar or array) with the constant ``eps``.

    Division by zero and out-of-domain logarithms raise ``ExprEvalError``.
    """
    try:
        with np.errstate(divide="raise", invalid="raise", over="ignore", under="ignore"):
            out = _eval(node, np.asarray(x, dtype=float), float(eps))
    except (FloatingPointError, ZeroDivisionError) as err:
        raise ExprEvalError(f"evaluation failed: {err}") from err
    return out


def _eval(node, x, eps):
    if isinstance(node, Num):
        return np.full_like(x, node.value)
    if isinstance(node, Var):
        return x.copy() if node.name == "x" else np.full_like(x, eps)
    if isinstance(node, Neg):
        return -_eval(node.operand, x, eps)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_eval(node.arg, x, eps))
    a = _eval(node.left, x, eps)
    b = _eval(node.right, x, eps)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if np.any(b == 0):
            raise ExprEvalError("division by zero")
        return a / b
    return np.power(a, b)


class Expression:
    """A parsed expression usable as a vectorized callable ``f(x)``."""

    def __init__(self, text, eps):
        self.text = text
        self.eps = eps
        self.ast = parse_expr(text)

    def __call__(self, x):
        return eval_expr(self.ast, x, self.eps)

    def __repr__(self):
        return f"Expression({self.text!r}, eps={self.eps!r})"


def differentiate(node):
    """Symbolic derivative with respect to ``x`` (no simplification)."""
    if isinstance(node, Num):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0 if node.name == "x" else 0.0)
    if isinstance(node, Neg):
        return Neg(differentiate(node.operand))
    if isinstance(node, Call):
        inner = differentiate(node.arg)
        outer = {
            "exp": node,
            "ln": BinOp("/", Num(1.0), node.arg),
            "sin": Call("cos", node.arg),
            "cos": Neg(Call("sin", node.arg)),
        }[node.func]
        return BinOp("*", outer, inner)
    a, b = node.left, node.right
    da, db = differentiate(a), differentiate(b)
    if node.op in ("+", "-"):
        return BinOp(node.op, da, db)
    if node.op == "*":
        return BinOp("+", BinOp("*", da, b), BinOp("*", a, db))
    if node.op == "/":
        return BinOp("/", BinOp("-", BinOp("*", da, b), BinOp("*", a, db)), BinOp("^", b, Num(2.0)))
    if _is_constant(b):
        return BinOp("*", BinOp("*", b, BinOp("^", a, BinOp("-", b, Num(1.0)))), da)
    # a^b = exp(b ln a)
    return BinOp("*", node, BinOp("+", BinOp("*", db, Call("ln", a)), BinOp("/", BinOp("*", b, da), a)))


def _is_constant(node):
    if isinstance(node, Num):
        return True
    if isinstance(node, Var):
        return node.name != "x"
    if isinstance(node, Neg):
        return _is_constant(node.operand)
    if isinstance(node, Call):
        return _is_constant(node.arg)
    return _is_constant(node.left) and _is_constant(node.right)
