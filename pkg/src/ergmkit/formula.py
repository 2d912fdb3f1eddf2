"""Recursive-descent parser for the model-formula mini-language.

One grammar serves model formulas, attribute expressions, level selectors,
and constraint specifications; the consumer interprets the AST in context.
Operator precedence follows the host-language conventions the syntax is
borrowed from: `:` binds tighter than `*`, both left-associative, and a
trailing/leading `~` builds one- or two-sided formula nodes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import FormulaError

__all__ = [
    "Num", "Str", "Bool", "Null", "Ident", "Arg", "Call",
    "Unary", "Binary", "FormulaNode", "parse_text", "deparse",
]


# -- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float
    _fields = ("value",)


@dataclass(frozen=True)
class Str:
    value: str
    _fields = ("value",)


@dataclass(frozen=True)
class Bool:
    value: bool
    _fields = ("value",)


@dataclass(frozen=True)
class Null:
    _fields = ()


@dataclass(frozen=True)
class Ident:
    name: str
    _fields = ("name",)


@dataclass(frozen=True)
class Arg:
    name: Optional[str]
    value: object
    _fields = ("name", "value")


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    _fields = ("name", "args")

    def positional(self) -> list:
        return [a.value for a in self.args if a.name is None]

    def named(self) -> dict:
        return {a.name: a.value for a in self.args if a.name is not None}


@dataclass(frozen=True)
class Unary:
    op: str
    operand: object
    _fields = ("op", "operand")


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object
    _fields = ("op", "left", "right")


@dataclass(frozen=True)
class FormulaNode:
    lhs: Optional[object]
    rhs: object
    _fields = ("lhs", "rhs")


# -- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<str>"([^"\\]|\\.)*"|'([^'\\]|\\.)*')
  | (?P<ident>[A-Za-z_.][A-Za-z0-9._]*)
  | (?P<special>%[A-Za-z]+%)
  | (?P<op>==|!=|<=|>=|&&|\|\||[-+*/^:~(),=<>!&|])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"TRUE": True, "FALSE": False, "T": True, "F": False}


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            out.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(_Token("eof", "", len(text)))
    return out


# -- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Token:
        t = self.next()
        if t.text != text:
            raise FormulaError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.pos)
        return t

    def at_op(self, *texts: str) -> bool:
        t = self.peek()
        return t.kind in ("op", "special") and t.text in texts

    # precedence chain, loosest first
    def parse_formula(self):
        if self.at_op("~"):
            self.next()
            return FormulaNode(None, self.parse_or())
        left = self.parse_or()
        if self.at_op("~"):
            self.next()
            return FormulaNode(left, self.parse_or())
        return left

    def parse_or(self):
        node = self.parse_and()
        while self.at_op("|", "||"):
            op = self.next().text
            node = Binary("|", node, self.parse_and())
        return node

    def parse_and(self):
        node = self.parse_not()
        while self.at_op("&", "&&"):
            op = self.next().text
            node = Binary("&", node, self.parse_not())
        return node

    def parse_not(self):
        if self.at_op("!"):
            self.next()
            return Unary("!", self.parse_not())
        return self.parse_compare()

    def parse_compare(self):
        node = self.parse_add()
        if self.at_op("==", "!=", "<", "<=", ">", ">="):
            op = self.next().text
            node = Binary(op, node, self.parse_add())
        return node

    def parse_add(self):
        node = self.parse_mul()
        while self.at_op("+", "-"):
            op = self.next().text
            node = Binary(op, node, self.parse_mul())
        return node

    def parse_mul(self):
        node = self.parse_special()
        while self.at_op("*", "/"):
            op = self.next().text
            node = Binary(op, node, self.parse_special())
        return node

    def parse_special(self):
        node = self.parse_range()
        while self.peek().kind == "special":
            op = self.next().text
            node = Binary(op, node, self.parse_range())
        return node

    def parse_range(self):
        node = self.parse_unary()
        while self.at_op(":"):
            self.next()
            node = Binary(":", node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.at_op("-"):
            self.next()
            return Unary("-", self.parse_unary())
        if self.at_op("+"):
            self.next()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self):
        node = self.parse_primary()
        if self.at_op("^"):
            self.next()
            return Binary("^", node, self.parse_unary())  # right-associative
        return node

    def parse_primary(self):
        t = self.peek()
        if t.kind == "num":
            self.next()
            return Num(float(t.text))
        if t.kind == "str":
            self.next()
            body = t.text[1:-1]
            body = re.sub(r"\\(.)", r"\1", body)
            return Str(body)
        if t.kind == "ident":
            self.next()
            name = t.text
            if name in _KEYWORDS and not self.at_op("("):
                return Bool(_KEYWORDS[name])
            if name == "NULL":
                return Null()
            if name == "NA":
                return Null()
            if self.at_op("("):
                return self.parse_call(name)
            return Ident(name)
        if self.at_op("("):
            self.next()
            node = self.parse_formula()
            self.expect(")")
            return node
        if self.at_op("~"):
            # a nested one-sided formula in argument position
            self.next()
            return FormulaNode(None, self.parse_or())
        raise FormulaError(f"unexpected token {t.text or 'end of input'!r}", t.pos)

    def parse_call(self, name: str) -> Call:
        self.expect("(")
        args: list[Arg] = []
        if not self.at_op(")"):
            while True:
                args.append(self.parse_arg())
                if self.at_op(","):
                    self.next()
                    continue
                break
        self.expect(")")
        return Call(name, tuple(args))

    def parse_arg(self) -> Arg:
        t = self.peek()
        if t.kind == "ident" and self.toks[self.i + 1].text == "=" and self.toks[self.i + 1].kind == "op":
            name = self.next().text
            self.next()  # '='
            return Arg(name, self.parse_formula())
        return Arg(None, self.parse_formula())


def parse_text(text: str):
    """Parse a formula, expression, or constraint string into an AST."""
    if not text or not text.strip():
        raise FormulaError("empty formula")
    p = _Parser(text)
    node = p.parse_formula()
    t = p.peek()
    if t.kind != "eof":
        raise FormulaError(f"unexpected trailing input {t.text!r}", t.pos)
    return node


# -- deparse ---------------------------------------------------------------

def _num_text(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def deparse(node) -> str:
    """Compact canonical text for an AST node, used for synthesized names."""
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, Str):
        return '"%s"' % node.value
    if isinstance(node, Bool):
        return "TRUE" if node.value else "FALSE"
    if isinstance(node, Null):
        return "NULL"
    if isinstance(node, Ident):
        return node.name
    if isinstance(node, Unary):
        return node.op + deparse(node.operand)
    if isinstance(node, Binary):
        return f"{deparse(node.left)}{node.op}{deparse(node.right)}"
    if isinstance(node, FormulaNode):
        lhs = deparse(node.lhs) if node.lhs is not None else ""
        return f"{lhs}~{deparse(node.rhs)}"
    if isinstance(node, Call):
        parts = []
        for a in node.args:
            txt = deparse(a.value)
            parts.append(f"{a.name}={txt}" if a.name else txt)
        return f"{node.name}({','.join(parts)})"
    raise FormulaError(f"cannot deparse {node!r}")
