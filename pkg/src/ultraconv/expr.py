"""Function-expression mini-language.

    expr   := term ("+" term)*
    term   := factor ("*" factor)*
    factor := number | atom | "reflect(" expr ")" | "(" expr ")"
    atom   := name "(" number ("," number)* ")"

Numeric factors in a term multiply into one scale. A term made only of numbers is
rejected: a bare constant is written const(c).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from . import functions as fn
from .errors import DomainError, ParseError

# name -> (parameter names, indices that must be integers)
ATOMS = {
    "gaussian": (("c", "s"), ()),
    "hermite": (("n", "s"), (0,)),
    "expdecay": (("t",), ()),
    "expgrow": (("a",), ()),
    "gaussgrow": (("a",), ()),
    "const": (("c",), ()),
    "cos": (("w",), ()),
    "weier": (("a", "b", "t", "N"), (1, 3)),
    "delta": (("x0", "w"), ()),
}

_NUM = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")
_NUM_RUN = re.compile(r"[0-9.]+([eE][+-]?[0-9]*)?[0-9A-Za-z_.]*")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple


@dataclass(frozen=True)
class Add:
    terms: tuple


@dataclass(frozen=True)
class Mul:
    factors: tuple


@dataclass(frozen=True)
class Scale:
    c: float
    expr: object


@dataclass(frozen=True)
class ReflectE:
    expr: object


def _num(v) -> str:
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def to_text(e) -> str:
    """Canonical text; parse_expr(to_text(e)) == e."""
    if isinstance(e, Atom):
        return f"{e.name}({','.join(_num(a) for a in e.args)})"
    if isinstance(e, ReflectE):
        return f"reflect({to_text(e.expr)})"
    if isinstance(e, Add):
        return "+".join(_wrap(t, (Add,)) for t in e.terms)
    if isinstance(e, Mul):
        return "*".join(_wrap(f, (Add, Scale, Mul)) for f in e.factors)
    if isinstance(e, Scale):
        return f"{_num(e.c)}*{_wrap(e.expr, (Add, Scale))}"
    raise TypeError(f"not an expression node: {e!r}")


def _wrap(e, kinds) -> str:
    s = to_text(e)
    return f"({s})" if isinstance(e, kinds) else s


# ---------------------------------------------------------------------------
# tokens


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | name | ( | ) | , | + | * | end
    text: str
    line: int
    col: int
    value: float | None = None


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        sign_ok = ch in "+-" and (not toks or toks[-1].kind in ("(", ",", "+", "*")) \
            and i + 1 < n and (text[i + 1].isdigit() or text[i + 1] == ".")
        if ch.isdigit() or ch == "." or sign_ok:
            m = _NUM_RUN.match(text, i + (1 if sign_ok else 0))
            raw = text[i:m.end()]
            if not _NUM.match(raw):
                raise ParseError("numeral", f"malformed numeral {raw!r}", line, col)
            v = float(raw)
            if not math.isfinite(v):
                raise ParseError("numeral", f"numeral {raw!r} is out of range", line, col)
            toks.append(_Tok("num", raw, line, col, v))
            col += len(raw)
            i = m.end()
            continue
        m = _NAME.match(text, i)
        if m:
            toks.append(_Tok("name", m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        if ch in "(),+*":
            toks.append(_Tok(ch, ch, line, col))
            i, col = i + 1, col + 1
            continue
        raise ParseError("syntax", f"unexpected character {ch!r}", line, col,
                         ("number", "name", "(", "+", "*"))
    toks.append(_Tok("end", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self, kind: str, expected=None) -> _Tok:
        t = self.tok
        if t.kind != kind:
            what = "end of input" if t.kind == "end" else repr(t.text)
            raise ParseError("syntax", f"unexpected {what}", t.line, t.col, expected or (kind,))
        self.i += 1
        return t

    def parse(self):
        e = self.expr()
        self.take("end", ("+", "*", "end of input"))
        return e

    def expr(self):
        terms = [self.term()]
        while self.tok.kind == "+":
            self.i += 1
            terms.append(self.term())
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self):
        start = self.tok
        c, parts = None, []
        while True:
            t = self.tok
            if t.kind == "num":
                self.i += 1
                c = t.value if c is None else c * t.value
            else:
                parts.append(self.factor())
            if self.tok.kind != "*":
                break
            self.i += 1
        if not parts:
            raise ParseError("syntax", "a number alone is not a function; use const(c)", start.line, start.col,
                             ("*",))
        body = parts[0] if len(parts) == 1 else Mul(tuple(parts))
        return body if c is None else Scale(float(c), body)

    def factor(self):
        t = self.tok
        if t.kind == "(":
            self.i += 1
            e = self.expr()
            self.take(")", (")", "+", "*"))
            return e
        if t.kind != "name":
            what = "end of input" if t.kind == "end" else repr(t.text)
            raise ParseError("syntax", f"unexpected {what}", t.line, t.col, ("number", "atom", "reflect", "("))
        self.i += 1
        if t.text == "reflect":
            self.take("(")
            e = self.expr()
            self.take(")", (")", "+", "*"))
            return ReflectE(e)
        if t.text not in ATOMS:
            raise ParseError("unknown-atom", f"unknown atom {t.text!r}", t.line, t.col,
                             tuple(sorted(ATOMS)) + ("reflect",))
        params, ints = ATOMS[t.text]
        self.take("(")
        args = []
        if self.tok.kind != ")":
            while True:
                a = self.take("num", ("number",))
                args.append(a)
                if self.tok.kind != ",":
                    break
                self.i += 1
        self.take(")", (",", ")"))
        if len(args) != len(params):
            raise ParseError("arity", f"{t.text} takes {len(params)} arguments ({', '.join(params)}), "
                             f"got {len(args)}", t.line, t.col)
        vals = []
        for k, a in enumerate(args):
            if k in ints:
                if a.value != int(a.value) or not _NUM.match(a.text) or any(ch in a.text for ch in ".eE"):
                    raise ParseError("numeral", f"{params[k]} of {t.text} must be an integer literal",
                                     a.line, a.col)
                vals.append(int(a.value))
            else:
                vals.append(float(a.value))
        return Atom(t.text, tuple(vals))


def parse_expr(text: str):
    """Parse a function expression into its AST; raises ParseError with a position."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# AST -> descriptor


def _atom(a: Atom) -> fn.TestFunction:
    p = a.args
    if a.name == "gaussian":
        _positive(a, p[1])
        return fn.Gaussian(p[0], p[1])
    if a.name == "hermite":
        if p[0] < 0:
            raise DomainError("hermite order must be >= 0")
        _positive(a, p[1])
        return fn.HermiteGaussian(p[0], p[1])
    if a.name == "expdecay":
        _positive(a, p[0])
        return fn.ExpDecay(p[0])
    if a.name == "expgrow":
        _positive(a, p[0])
        return fn.ExpGrowth(p[0])
    if a.name == "gaussgrow":
        _positive(a, p[0])
        return fn.GaussGrowth(p[0])
    if a.name == "const":
        return fn.Constant(p[0])
    if a.name == "cos":
        return fn.Cosine(p[0])
    if a.name == "weier":
        return fn.DampedWeierstrass(p[0], p[1], p[2], p[3])
    if a.name == "delta":
        return fn.delta(p[0], p[1])
    raise DomainError(f"unknown atom {a.name}")


def _positive(a: Atom, v: float) -> None:
    if not v > 0:
        raise DomainError(f"{to_text(a)}: scale/rate parameter must be positive")


def build(e) -> fn.TestFunction:
    """Descriptor for an AST."""
    if isinstance(e, Atom):
        return _atom(e)
    if isinstance(e, Add):
        return fn.Sum(tuple(build(t) for t in e.terms))
    if isinstance(e, Mul):
        out = build(e.factors[0])
        for f in e.factors[1:]:
            out = fn.Product(out, build(f))
        return out
    if isinstance(e, Scale):
        return fn.Scaled(e.c, build(e.expr))
    if isinstance(e, ReflectE):
        return fn.Reflect(build(e.expr))
    raise TypeError(f"not an expression node: {e!r}")


def function(text: str) -> fn.TestFunction:
    return build(parse_expr(text))
